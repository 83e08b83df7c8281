//! Task wrenches, work, and the reliability / minimal force / minimal work
//! qualities of a grasp.
//!
//! A grasp is scored over `K` perturbed copies of its pose and every pose of
//! the task trajectory. Per pose the sample values are averaged; the grasp
//! keeps the lowest per-pose value of each metric.

use nalgebra::{Rotation3, Unit};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::{ContactError, ContactPatch, GraspCandidate};
use crate::exec::Execution;
use crate::geometry::{Pose, Pt3, Vec3};
use crate::limitsurface::{LimitSurface, LimitSurfaceError, LimitSurfaceParams, Wrench};
use crate::mesh::TriMesh;
use crate::optimizer::{self, build_system, OptimizerError};
use crate::rng::{derive_seed, seeded};
use crate::stiffness::StiffnessMap;

pub const GRAVITY: f64 = 9.81;
pub const DEFAULT_EPSILON: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error(transparent)]
    Solver(#[from] OptimizerError),
    #[error(transparent)]
    LimitSurface(#[from] LimitSurfaceError),
    #[error("labels contain a single class")]
    SingleClassLabels,
    #[error("length mismatch: {0} values, {1} labels")]
    LengthMismatch(usize, usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    #[default]
    VerticalLift,
    LiftRotate90,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Task {
    pub kind: TaskKind,
    /// Object mass (kg).
    pub mass: f64,
    pub gravity: f64,
    /// Axis the object turns about during the rotation task (world frame).
    pub rotation_axis: Vec3,
}

impl Default for Task {
    fn default() -> Self {
        Task {
            kind: TaskKind::VerticalLift,
            mass: 1.0,
            gravity: GRAVITY,
            rotation_axis: Vec3::x(),
        }
    }
}

impl Task {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if !(self.mass > 0.0 && self.gravity > 0.0 && self.rotation_axis.norm() > 1e-12) {
            return Err(MetricsError::InvalidInput(format!("invalid task {self:?}")));
        }
        Ok(())
    }

    /// Rotation angles of the discretized trajectory (rad).
    pub fn pose_angles(&self) -> Vec<f64> {
        match self.kind {
            TaskKind::VerticalLift => vec![0.0],
            TaskKind::LiftRotate90 => vec![
                0.0,
                std::f64::consts::FRAC_PI_4,
                std::f64::consts::FRAC_PI_2,
            ],
        }
    }

    pub fn pose_count(&self) -> usize {
        self.pose_angles().len()
    }

    /// Wrench the grasp must apply in each pose, about `frame_origin` with
    /// world-aligned axes at the start of the trajectory.
    pub fn wrenches_about(&self, center_of_mass: &Pt3, frame_origin: &Pt3) -> Vec<Wrench> {
        let axis = Unit::new_normalize(self.rotation_axis);
        let lever = center_of_mass - frame_origin;
        self.pose_angles()
            .into_iter()
            .map(|theta| {
                let r = Rotation3::from_axis_angle(&axis, theta);
                let force = r.inverse() * Vec3::new(0.0, 0.0, self.mass * self.gravity);
                Wrench::new(force, lever.cross(&force))
            })
            .collect()
    }
}

/// Task wrenches about the grasp center.
pub fn task_wrenches(task: &Task, mesh: &TriMesh, grasp: &GraspCandidate) -> Vec<Wrench> {
    task.wrenches_about(&mesh.center_of_mass(), &grasp.center())
}

/// `Σ F_i (F_i / s_i + ε)`; an infinite stiffness leaves only the ε term.
pub fn work(forces: &[f64], stiffness: &[f64], epsilon: f64) -> f64 {
    forces
        .iter()
        .zip(stiffness)
        .map(|(f, s)| f * (f / s + epsilon))
        .sum()
}

/// Stiffness used in the work term: values at the rigid floor count as rigid.
pub fn effective_stiffness(s: f64, rigid_floor: f64) -> f64 {
    if s >= rigid_floor {
        f64::INFINITY
    } else {
        s
    }
}

/// Normalizers for the force and work qualities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizers {
    /// Maximum grasp force per jaw (N).
    pub f_max: f64,
    /// Maximum work (J).
    pub w_max: f64,
    /// Offset ε in the per-contact displacement (m).
    pub epsilon: f64,
}

impl Normalizers {
    /// `W_max = F_max (F_max / s_min + ε)` from the softest point of the map.
    pub fn new(f_max: f64, epsilon: f64, map: &StiffnessMap) -> Self {
        let s_min = effective_stiffness(map.min_stiffness(), map.rigid_floor());
        Normalizers {
            f_max,
            w_max: work(&[f_max], &[s_min], epsilon),
            epsilon,
        }
    }

    pub fn with_w_max(mut self, w_max: f64) -> Self {
        self.w_max = w_max;
        self
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        if !(self.f_max > 0.0 && self.w_max > 0.0 && self.epsilon > 0.0) {
            return Err(MetricsError::InvalidInput(format!(
                "invalid normalizers {self:?}"
            )));
        }
        Ok(())
    }
}

/// Gaussian pose noise applied to the grasp about its center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationSpec {
    pub k: usize,
    /// Per-axis translation standard deviation (m).
    pub sigma_translation: f64,
    /// Per-axis rotation-vector standard deviation (rad).
    pub sigma_rotation: f64,
    pub rng_seed: u64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec {
            k: 20,
            sigma_translation: 0.003,
            sigma_rotation: 0.05,
            rng_seed: 0,
        }
    }
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.k == 0 || !(self.sigma_translation >= 0.0) || !(self.sigma_rotation >= 0.0) {
            return Err(MetricsError::InvalidInput(format!(
                "invalid perturbation spec {self:?}"
            )));
        }
        Ok(())
    }

    /// Pose offset of perturbation `index`.
    pub fn delta(&self, index: usize) -> Pose {
        use rand_distr::{Distribution, Normal};
        let mut rng = seeded(derive_seed(self.rng_seed, &[0, index as u64]));
        let n = Normal::new(0.0, 1.0).expect("unit normal");
        let mut draw = |sigma: f64| {
            Vec3::new(n.sample(&mut rng), n.sample(&mut rng), n.sample(&mut rng)) * sigma
        };
        let t = draw(self.sigma_translation);
        let r = draw(self.sigma_rotation);
        Pose::new(t, r)
    }
}

/// Limit-surface settings and execution mode of an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    pub limit_surface: LimitSurfaceParams,
    pub execution: Execution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStatus {
    Feasible,
    Infeasible,
    NoContact,
}

/// Raw outcome of one (pose, perturbation) sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub pose: usize,
    pub perturbation: usize,
    pub status: SampleStatus,
    /// Resisted with every grasp force within `F_max`.
    pub reliable: bool,
    /// Σ F_i (N); `F_max` when the sample failed.
    pub force: f64,
    /// W (J); `W_max` when the sample failed.
    pub work: f64,
}

impl SampleResult {
    pub fn failed(pose: usize, perturbation: usize, status: SampleStatus, n: &Normalizers) -> Self {
        SampleResult {
            pose,
            perturbation,
            status,
            reliable: false,
            force: n.f_max,
            work: n.w_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Qualities {
    pub q_r: f64,
    pub q_f: f64,
    pub q_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub q_r: f64,
    pub q_f: f64,
    pub q_w: f64,
    pub per_pose: Vec<Qualities>,
    /// Samples ordered by pose, then perturbation.
    pub samples: Vec<SampleResult>,
    pub normalizers: Normalizers,
    pub k: usize,
    pub pose_count: usize,
    pub rng_seed: u64,
}

impl QualityReport {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Reliability => self.q_r,
            Metric::MinForce => self.q_f,
            Metric::MinWork => self.q_w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Reliability,
    MinForce,
    MinWork,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Reliability, Metric::MinForce, Metric::MinWork];

    pub fn short_name(self) -> &'static str {
        match self {
            Metric::Reliability => "GR",
            Metric::MinForce => "MF",
            Metric::MinWork => "MW",
        }
    }
}

/// Per-pose means and the minimum over poses of each metric.
pub fn aggregate(
    samples: &[SampleResult],
    pose_count: usize,
    n: &Normalizers,
) -> (Qualities, Vec<Qualities>) {
    let per_pose: Vec<Qualities> = (0..pose_count)
        .map(|pose| {
            let mut count = 0usize;
            let (mut r, mut f, mut w) = (0.0, 0.0, 0.0);
            for s in samples.iter().filter(|s| s.pose == pose) {
                count += 1;
                r += if s.reliable { 1.0 } else { 0.0 };
                f += (1.0 - s.force / n.f_max).max(0.0);
                w += (1.0 - s.work / n.w_max).max(0.0);
            }
            let c = count.max(1) as f64;
            Qualities {
                q_r: r / c,
                q_f: f / c,
                q_w: w / c,
            }
        })
        .collect();
    let min = |get: fn(&Qualities) -> f64| per_pose.iter().map(get).fold(f64::INFINITY, f64::min);
    let overall = Qualities {
        q_r: min(|q| q.q_r),
        q_f: min(|q| q.q_f),
        q_w: min(|q| q.q_w),
    };
    (overall, per_pose)
}

/// Contact patches, limit surfaces and grasp system of one grasp pose.
pub struct GraspModel {
    pub patches: [ContactPatch; 2],
    pub surfaces: [LimitSurface; 2],
    pub system: optimizer::GraspSystem,
    /// Origin of the wrench frame: midpoint of the two centers of pressure.
    pub frame_origin: Pt3,
}

/// Builds the contact model of `grasp`; `Ok(None)` when a pad misses the object.
pub fn model_grasp(
    mesh: &TriMesh,
    grasp: &GraspCandidate,
    params: &LimitSurfaceParams,
    rng_seed: u64,
) -> Result<Option<GraspModel>, MetricsError> {
    let patches = match grasp.patches(mesh) {
        Ok(p) => p,
        Err(ContactError::NoContact | ContactError::DegeneratePatch(_)) => return Ok(None),
        Err(ContactError::InvalidJaw(msg)) => return Err(MetricsError::InvalidInput(msg)),
    };
    let mu = grasp.jaw.friction_coefficient;
    let s0 = LimitSurface::build(&patches[0], mu, params, 0, derive_seed(rng_seed, &[1, 0]))?;
    let s1 = LimitSurface::build(&patches[1], mu, params, 1, derive_seed(rng_seed, &[1, 1]))?;
    let frame_origin = nalgebra::center(
        &patches[0].center_of_pressure(),
        &patches[1].center_of_pressure(),
    );
    let frame = Pose::translation(frame_origin.x, frame_origin.y, frame_origin.z);
    let system = build_system(
        &[
            (patches[0].clone(), s0.constraints.clone()),
            (patches[1].clone(), s1.constraints.clone()),
        ],
        frame,
        mesh.bounding_radius(),
    )?;
    Ok(Some(GraspModel {
        patches,
        surfaces: [s0, s1],
        system,
        frame_origin,
    }))
}

fn score_model(
    model: &GraspModel,
    mesh: &TriMesh,
    map: &StiffnessMap,
    task: &Task,
    perturbation: usize,
    n: &Normalizers,
) -> Result<Vec<SampleResult>, MetricsError> {
    let stiffness: Vec<f64> = model
        .patches
        .iter()
        .map(|p| {
            effective_stiffness(
                map.stiffness_nearest(&p.center_of_pressure()),
                map.rigid_floor(),
            )
        })
        .collect();
    let targets = task.wrenches_about(&mesh.center_of_mass(), &model.frame_origin);
    let mut out = Vec::with_capacity(targets.len());
    for (pose, t) in targets.iter().enumerate() {
        let sol = optimizer::min_force(&model.system, t)?;
        if !sol.feasible {
            out.push(SampleResult::failed(
                pose,
                perturbation,
                SampleStatus::Infeasible,
                n,
            ));
            continue;
        }
        // the unbounded optimum already certifies reliability when it fits
        let reliable = sol.forces.iter().all(|&f| f <= n.f_max)
            || optimizer::check_reliability(&model.system, t, n.f_max)?;
        out.push(SampleResult {
            pose,
            perturbation,
            status: SampleStatus::Feasible,
            reliable,
            force: sol.objective,
            work: work(&sol.forces, &stiffness, n.epsilon),
        });
    }
    Ok(out)
}

/// Limit-surface seed keyed on the perturbation itself, so equal offsets
/// share their friction approximation.
pub fn pose_seed(base: u64, delta: &Pose) -> u64 {
    let t = delta.translation.vector;
    let r = delta.rotation.scaled_axis();
    // `+ 0.0` folds -0.0 into 0.0
    let bits: Vec<u64> = t
        .iter()
        .chain(r.iter())
        .map(|v| (v + 0.0).to_bits())
        .collect();
    derive_seed(base, &[&[1][..], &bits].concat())
}

/// Scores `grasp` over the perturbations and task poses.
pub fn evaluate_grasp(
    mesh: &TriMesh,
    map: &StiffnessMap,
    grasp: &GraspCandidate,
    task: &Task,
    perturb: &PerturbationSpec,
    normalizers: &Normalizers,
    options: &EvalOptions,
) -> Result<QualityReport, MetricsError> {
    task.validate()?;
    perturb.validate()?;
    normalizers.validate()?;
    let pose_count = task.pose_count();
    let per_k: Vec<Result<Vec<SampleResult>, MetricsError>> =
        options.execution.map_indexed(perturb.k, |k| {
            let delta = perturb.delta(k);
            let g = grasp.perturbed(&delta);
            let seed = pose_seed(perturb.rng_seed, &delta);
            match model_grasp(mesh, &g, &options.limit_surface, seed)? {
                Some(model) => score_model(&model, mesh, map, task, k, normalizers),
                None => Ok((0..pose_count)
                    .map(|pose| SampleResult::failed(pose, k, SampleStatus::NoContact, normalizers))
                    .collect()),
            }
        });
    let mut samples = Vec::with_capacity(perturb.k * pose_count);
    for r in per_k {
        samples.extend(r?);
    }
    samples.sort_by_key(|s| (s.pose, s.perturbation));
    let (overall, per_pose) = aggregate(&samples, pose_count, normalizers);
    Ok(QualityReport {
        q_r: overall.q_r,
        q_f: overall.q_f,
        q_w: overall.q_w,
        per_pose,
        samples,
        normalizers: *normalizers,
        k: perturb.k,
        pose_count,
        rng_seed: perturb.rng_seed,
    })
}

/// Mean of sensitivity and specificity.
pub fn balanced_accuracy(predictions: &[bool], labels: &[bool]) -> Result<f64, MetricsError> {
    if predictions.len() != labels.len() || labels.is_empty() {
        return Err(MetricsError::LengthMismatch(
            predictions.len(),
            labels.len(),
        ));
    }
    let (mut tp, mut fneg, mut tn, mut fpos) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (true, true) => tp += 1,
            (false, true) => fneg += 1,
            (false, false) => tn += 1,
            (true, false) => fpos += 1,
        }
    }
    if tp + fneg == 0 || tn + fpos == 0 {
        return Err(MetricsError::SingleClassLabels);
    }
    Ok(0.5 * (tp as f64 / (tp + fneg) as f64 + tn as f64 / (tn + fpos) as f64))
}

/// Best threshold for predicting success as `value > threshold`.
///
/// Candidates are the midpoints between consecutive distinct values plus the
/// largest value (everything predicted negative); ties keep the lower threshold.
pub fn threshold_sweep(values: &[f64], labels: &[bool]) -> Result<(f64, f64), MetricsError> {
    if values.len() != labels.len() || values.is_empty() {
        return Err(MetricsError::LengthMismatch(values.len(), labels.len()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::InvalidInput(
            "metric values must be finite".into(),
        ));
    }
    let mut unique = values.to_vec();
    unique.sort_by(f64::total_cmp);
    unique.dedup();
    let mut thresholds: Vec<f64> = unique.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    thresholds.push(*unique.last().expect("non-empty"));
    let mut best: Option<(f64, f64)> = None;
    for t in thresholds {
        let preds: Vec<bool> = values.iter().map(|&v| v > t).collect();
        let acc = balanced_accuracy(&preds, labels)?;
        if best.map_or(true, |(_, b)| acc > b) {
            best = Some((t, acc));
        }
    }
    Ok(best.expect("at least one threshold"))
}

/// Indices sorted by descending value; values within `1e-12` of each other
/// are ties and keep ascending index order.
pub fn rank_descending(values: &[f64]) -> Vec<usize> {
    let key = |v: f64| (v * 1e12).round() as i64;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| key(values[b]).cmp(&key(values[a])).then(a.cmp(&b)));
    idx
}
