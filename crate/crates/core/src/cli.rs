//! Command-line driver.
//!
//! Settings come from an optional JSON config file; command-line flags take
//! precedence over the file, which takes precedence over built-in defaults.
//! Relative paths inside a config file are resolved against its directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::{GraspCandidate, JawConfig};
use crate::exec::Execution;
use crate::geometry::{Pose, Pt3};
use crate::limitsurface::LimitSurfaceParams;
use crate::mesh::{load_mesh, MeshError, TriMesh};
use crate::metrics::{
    self, evaluate_grasp, rank_descending, threshold_sweep, EvalOptions, Metric, MetricsError,
    Normalizers, PerturbationSpec, QualityReport, Task, TaskKind,
};
use crate::ply;
use crate::rng::derive_seed;
use crate::sampler::{sample_candidates_with, SamplerConfig, SamplerError};
use crate::stiffness::{self, MeanKind, StiffnessError, StiffnessMap, DEFAULT_RIGID_STIFFNESS};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_EMPTY: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Stiffness(#[from] StiffnessError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sampler(SamplerError::NoCandidates(_)) => EXIT_EMPTY,
            CliError::Metrics(MetricsError::Solver(_) | MetricsError::LimitSurface(_)) => {
                EXIT_NUMERICAL
            }
            _ => EXIT_INPUT,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "minwork",
    version,
    about = "Plan and score parallel-jaw grasps on deformable objects"
)]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interpolate stiffness measurements over a mesh (JSON + colored PLY).
    Stiffness(RunArgs),
    /// Sample antipodal grasps and rank them by one metric.
    Plan(RunArgs),
    /// Score grasps with all metrics against success labels.
    Eval(EvalArgs),
    /// Write the force LP and limit surfaces of one candidate for inspection.
    DumpLp(DumpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Lift,
    LiftRotate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Gr,
    Mf,
    Mw,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[arg(long)]
    pub stiffness_csv: Option<PathBuf>,
    /// Multiplier from mesh file units to meters.
    #[arg(long)]
    pub units: Option<f64>,
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    /// Number of pose perturbations per grasp.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (1 runs sequentially).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// CSV with header `grasp_id,success`.
    #[arg(long)]
    pub labels: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DumpArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Candidate id from the sampled list.
    #[arg(long, default_value_t = 0)]
    pub candidate: usize,
}

/// Force and work normalizers; unset values are derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizerConfig {
    /// Defaults to the jaw force limit.
    pub f_max: Option<f64>,
    /// Defaults to `F_max (F_max / s_min + ε)`.
    pub w_max: Option<f64>,
    pub epsilon: f64,
}

impl Default for NormalizerConfig {
    fn default() -> Self {
        NormalizerConfig {
            f_max: None,
            w_max: None,
            epsilon: metrics::DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub mesh: Option<PathBuf>,
    pub stiffness_csv: Option<PathBuf>,
    pub units: f64,
    /// Stiffness everywhere when no measurement file is given (N/m).
    pub constant_stiffness: Option<f64>,
    pub stiffness_mean: MeanKind,
    pub rigid_stiffness: f64,
    pub jaw: JawConfig,
    pub task: Task,
    pub perturbation: PerturbationSpec,
    pub metric: Metric,
    pub normalizers: NormalizerConfig,
    pub sampler: SamplerConfig,
    pub limit_surface: LimitSurfaceParams,
    pub out: PathBuf,
    pub rng_seed: u64,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh: None,
            stiffness_csv: None,
            units: 1.0,
            constant_stiffness: None,
            stiffness_mean: MeanKind::Arithmetic,
            rigid_stiffness: DEFAULT_RIGID_STIFFNESS,
            jaw: JawConfig::default(),
            task: Task::default(),
            perturbation: PerturbationSpec::default(),
            metric: Metric::MinWork,
            normalizers: NormalizerConfig::default(),
            sampler: SamplerConfig::default(),
            limit_surface: LimitSurfaceParams::default(),
            out: PathBuf::from("out"),
            rng_seed: 0,
            jobs: None,
        }
    }
}

impl RunConfig {
    /// Merges defaults, the config file named in `args` and the flags.
    pub fn resolve(args: &RunArgs) -> Result<Self, CliError> {
        let mut cfg = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Input(format!("cannot read config {}: {e}", path.display()))
                })?;
                let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| {
                    CliError::Input(format!("invalid config {}: {e}", path.display()))
                })?;
                let base = path.parent().unwrap_or(Path::new(""));
                let rebase = |p: &mut Option<PathBuf>| {
                    if let Some(q) = p.as_mut() {
                        if q.is_relative() {
                            *q = base.join(&*q);
                        }
                    }
                };
                rebase(&mut cfg.mesh);
                rebase(&mut cfg.stiffness_csv);
                if cfg.out.is_relative() {
                    cfg.out = base.join(&cfg.out);
                }
                cfg
            }
            None => RunConfig::default(),
        };
        if let Some(m) = &args.mesh {
            cfg.mesh = Some(m.clone());
        }
        if let Some(c) = &args.stiffness_csv {
            cfg.stiffness_csv = Some(c.clone());
        }
        if let Some(u) = args.units {
            cfg.units = u;
        }
        if let Some(t) = args.task {
            cfg.task.kind = match t {
                TaskArg::Lift => TaskKind::VerticalLift,
                TaskArg::LiftRotate => TaskKind::LiftRotate90,
            };
        }
        if let Some(m) = args.metric {
            cfg.metric = match m {
                MetricArg::Gr => Metric::Reliability,
                MetricArg::Mf => Metric::MinForce,
                MetricArg::Mw => Metric::MinWork,
            };
        }
        if let Some(k) = args.k {
            cfg.perturbation.k = k;
        }
        if let Some(s) = args.seed {
            cfg.rng_seed = s;
        }
        if let Some(j) = args.jobs {
            cfg.jobs = Some(j);
        }
        if let Some(o) = &args.out {
            cfg.out = o.clone();
        }
        // one seed drives every random stream
        cfg.sampler.rng_seed = derive_seed(cfg.rng_seed, &[10]);
        cfg.perturbation.rng_seed = derive_seed(cfg.rng_seed, &[20]);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Input(m));
        if !(self.units > 0.0) {
            return bad(format!("units must be positive, got {}", self.units));
        }
        if let Some(s) = self.constant_stiffness {
            if !(s > 0.0) {
                return bad(format!("constant_stiffness must be positive, got {s}"));
            }
        }
        if !(self.rigid_stiffness > 0.0) {
            return bad(format!(
                "rigid_stiffness must be positive, got {}",
                self.rigid_stiffness
            ));
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        self.jaw
            .validate()
            .map_err(|e| CliError::Input(e.to_string()))?;
        self.task.validate()?;
        self.perturbation.validate()?;
        self.sampler.validate()?;
        if self.limit_surface.twist_count < 100 || self.limit_surface.hyperplanes < 20 {
            return bad(format!(
                "limit surface needs twist_count ≥ 100 and hyperplanes ≥ 20: {:?}",
                self.limit_surface
            ));
        }
        Ok(())
    }

    pub fn execution(&self) -> Execution {
        if self.jobs == Some(1) {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    pub fn load_mesh(&self) -> Result<Arc<TriMesh>, CliError> {
        let path = self
            .mesh
            .as_ref()
            .ok_or_else(|| CliError::Input("no mesh given (--mesh)".into()))?;
        if !path.exists() {
            return Err(CliError::Input(format!(
                "mesh file {} does not exist",
                path.display()
            )));
        }
        Ok(Arc::new(
            load_mesh(path, self.units)?.with_mass(self.task.mass),
        ))
    }

    /// Measured map, a constant map, or a rigid object when neither is given.
    pub fn stiffness_map(&self, mesh: &Arc<TriMesh>) -> Result<StiffnessMap, CliError> {
        match (&self.stiffness_csv, self.constant_stiffness) {
            (Some(csv), _) => {
                if !csv.exists() {
                    return Err(CliError::Input(format!(
                        "stiffness file {} does not exist",
                        csv.display()
                    )));
                }
                let ms = stiffness::read_measurements(csv)?;
                Ok(stiffness::build_map(
                    mesh.clone(),
                    &ms,
                    self.stiffness_mean,
                    self.rigid_stiffness,
                )?)
            }
            (None, Some(s)) => {
                Ok(StiffnessMap::constant(mesh.clone(), s).with_rigid_floor(self.rigid_stiffness))
            }
            (None, None) => Ok(StiffnessMap::constant(mesh.clone(), self.rigid_stiffness)
                .with_rigid_floor(self.rigid_stiffness)),
        }
    }

    pub fn normalizers(&self, map: &StiffnessMap) -> Normalizers {
        let f_max = self.normalizers.f_max.unwrap_or(self.jaw.max_force);
        let n = Normalizers::new(f_max, self.normalizers.epsilon, map);
        match self.normalizers.w_max {
            Some(w) => n.with_w_max(w),
            None => n,
        }
    }
}

/// A candidate with its evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedGrasp {
    pub id: usize,
    pub quality: f64,
    pub candidate: GraspCandidate,
    pub report: QualityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub rng_seed: u64,
    pub metric: Metric,
    pub colormap: String,
    pub config: RunConfig,
    pub normalizers: Normalizers,
    pub grasps: Vec<RankedGrasp>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub metric: Metric,
    pub threshold: f64,
    pub balanced_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rng_seed: u64,
    pub config: RunConfig,
    pub grasp_count: usize,
    pub positives: usize,
    pub scores: Vec<MetricScore>,
    pub grasps: Vec<RankedGrasp>,
}

impl EvalReport {
    pub fn to_markdown(&self) -> String {
        let mut s = String::from("# Balanced accuracy\n\n");
        s += &format!(
            "{} grasps, {} successful, seed {}\n\n",
            self.grasp_count, self.positives, self.rng_seed
        );
        s += "| | GR | MF | MW |\n|---|---|---|---|\n| Balanced accuracy |";
        for m in &self.scores {
            s += &format!(" {:.1}% |", 100.0 * m.balanced_accuracy);
        }
        s += "\n| Threshold |";
        for m in &self.scores {
            s += &format!(" {:.4} |", m.threshold);
        }
        s.push('\n');
        s
    }
}

fn with_jobs<T: Send>(cfg: &RunConfig, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    #[cfg(feature = "parallel")]
    if let Some(j) = cfg.jobs {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| CliError::Input(format!("cannot start {j} worker threads: {e}")))?;
        return Ok(pool.install(f));
    }
    let _ = cfg;
    Ok(f())
}

/// Samples candidates and evaluates them with `cfg`, in sample order.
pub fn evaluate_candidates(
    cfg: &RunConfig,
    mesh: &TriMesh,
    map: &StiffnessMap,
) -> Result<(Vec<GraspCandidate>, Vec<QualityReport>, Normalizers), CliError> {
    let exec = cfg.execution();
    let candidates = sample_candidates_with(mesh, &cfg.jaw, &cfg.sampler, exec)?;
    let normalizers = cfg.normalizers(map);
    normalizers.validate()?;
    let options = EvalOptions {
        limit_surface: cfg.limit_surface,
        execution: Execution::Sequential,
    };
    let reports = exec.map_slice(&candidates, |g| {
        evaluate_grasp(
            mesh,
            map,
            g,
            &cfg.task,
            &cfg.perturbation,
            &normalizers,
            &options,
        )
    });
    let reports = reports.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok((candidates, reports, normalizers))
}

fn ranked(
    candidates: &[GraspCandidate],
    reports: &[QualityReport],
    metric: Metric,
) -> Vec<RankedGrasp> {
    let q: Vec<f64> = reports.iter().map(|r| r.get(metric)).collect();
    rank_descending(&q)
        .into_iter()
        .map(|i| RankedGrasp {
            id: i,
            quality: q[i],
            candidate: candidates[i],
            report: reports[i].clone(),
        })
        .collect()
}

const COLORMAP: &str = "per-vertex quality: red = 0 (worst), white = 0.5, blue = 1 (best); for min_work red means high work";

pub fn cmd_stiffness(args: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args)?;
    if cfg.stiffness_csv.is_none() {
        return Err(CliError::Input(
            "no stiffness measurements given (--stiffness-csv)".into(),
        ));
    }
    let mesh = cfg.load_mesh()?;
    let map = cfg.stiffness_map(&mesh)?;
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("stiffness.json"), map.to_json()?)?;
    map.write_ply(cfg.out.join("stiffness.ply"))?;
    println!(
        "wrote stiffness map for {} vertices to {}",
        mesh.vertices().len(),
        cfg.out.display()
    );
    Ok(())
}

pub fn cmd_plan(args: &RunArgs) -> Result<Ranking, CliError> {
    let cfg = RunConfig::resolve(args)?;
    let mesh = cfg.load_mesh()?;
    let map = cfg.stiffness_map(&mesh)?;
    let (candidates, reports, normalizers) =
        with_jobs(&cfg, || evaluate_candidates(&cfg, &mesh, &map))??;
    let grasps = ranked(&candidates, &reports, cfg.metric);
    let ranking = Ranking {
        rng_seed: cfg.rng_seed,
        metric: cfg.metric,
        colormap: COLORMAP.into(),
        config: cfg.clone(),
        normalizers,
        grasps,
    };
    fs::create_dir_all(&cfg.out)?;
    fs::write(
        cfg.out.join("ranking.json"),
        serde_json::to_string_pretty(&ranking)?,
    )?;
    let mut points: Vec<Pt3> = Vec::new();
    let mut colors = Vec::new();
    for g in &ranking.grasps {
        let c = ply::red_white_blue(g.quality);
        points.extend([g.candidate.contact1, g.candidate.contact2]);
        colors.extend([c, c]);
    }
    ply::write_ply(
        cfg.out.join("grasps.ply"),
        &points,
        &[],
        Some(&colors),
        &[COLORMAP.to_string()],
    )?;
    if let Some(best) = ranking.grasps.first() {
        println!(
            "ranked {} grasps by {:?}; best id {} quality {:.4}",
            ranking.grasps.len(),
            cfg.metric,
            best.id,
            best.quality
        );
    }
    Ok(ranking)
}

#[derive(Debug, Deserialize)]
struct LabelRow {
    grasp_id: usize,
    success: String,
}

fn parse_success(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" => Some(false),
        _ => None,
    }
}

/// Reads `grasp_id,success` rows.
pub fn read_labels(path: &Path) -> Result<BTreeMap<usize, bool>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = BTreeMap::new();
    for row in reader.deserialize() {
        let row: LabelRow = row?;
        let v = parse_success(&row.success).ok_or_else(|| {
            CliError::Input(format!(
                "grasp {}: bad success value '{}'",
                row.grasp_id, row.success
            ))
        })?;
        if out.insert(row.grasp_id, v).is_some() {
            return Err(CliError::Input(format!(
                "grasp {} labelled twice",
                row.grasp_id
            )));
        }
    }
    Ok(out)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport, CliError> {
    let cfg = RunConfig::resolve(&args.run)?;
    let labels = read_labels(&args.labels)?;
    let mesh = cfg.load_mesh()?;
    let map = cfg.stiffness_map(&mesh)?;
    let (candidates, reports, _) = with_jobs(&cfg, || evaluate_candidates(&cfg, &mesh, &map))??;
    let ids: BTreeSet<usize> = (0..candidates.len()).collect();
    let labelled: BTreeSet<usize> = labels.keys().copied().collect();
    if ids != labelled {
        let missing: Vec<_> = ids.difference(&labelled).collect();
        let unknown: Vec<_> = labelled.difference(&ids).collect();
        return Err(CliError::Input(format!(
            "labels do not match the {} evaluated grasps: missing {missing:?}, unknown {unknown:?}",
            ids.len()
        )));
    }
    let y: Vec<bool> = (0..candidates.len()).map(|i| labels[&i]).collect();
    let mut scores = Vec::new();
    for metric in Metric::ALL {
        let values: Vec<f64> = reports.iter().map(|r| r.get(metric)).collect();
        let (threshold, balanced_accuracy) = threshold_sweep(&values, &y)?;
        scores.push(MetricScore {
            metric,
            threshold,
            balanced_accuracy,
        });
    }
    let report = EvalReport {
        rng_seed: cfg.rng_seed,
        config: cfg.clone(),
        grasp_count: candidates.len(),
        positives: y.iter().filter(|v| **v).count(),
        scores,
        grasps: ranked(&candidates, &reports, cfg.metric),
    };
    fs::create_dir_all(&cfg.out)?;
    fs::write(
        cfg.out.join("eval_report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    fs::write(cfg.out.join("eval_report.md"), report.to_markdown())?;
    print!("{}", report.to_markdown());
    Ok(report)
}

#[derive(Serialize)]
struct LimitSurfaceDump<'a> {
    contact: usize,
    rho: f64,
    matrix: Vec<Vec<f64>>,
    rank: usize,
    samples: &'a [crate::limitsurface::Wrench],
    constraints: &'a crate::limitsurface::ConstraintSet,
}

pub fn cmd_dump_lp(args: &DumpArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&args.run)?;
    let mesh = cfg.load_mesh()?;
    let candidates = sample_candidates_with(&mesh, &cfg.jaw, &cfg.sampler, cfg.execution())?;
    let grasp = candidates.get(args.candidate).ok_or_else(|| {
        CliError::Input(format!(
            "candidate {} out of range ({} sampled)",
            args.candidate,
            candidates.len()
        ))
    })?;
    let model = metrics::model_grasp(
        &mesh,
        grasp,
        &cfg.limit_surface,
        metrics::pose_seed(cfg.perturbation.rng_seed, &Pose::identity()),
    )?
    .ok_or_else(|| CliError::Input(format!("candidate {} has no contact", args.candidate)))?;
    fs::create_dir_all(&cfg.out)?;
    let force_limit = cfg.normalizers.f_max.unwrap_or(cfg.jaw.max_force);
    let targets = cfg
        .task
        .wrenches_about(&mesh.center_of_mass(), &model.frame_origin);
    for (j, t) in targets.iter().enumerate() {
        let path = cfg
            .out
            .join(format!("candidate{}_pose{j}.lp", args.candidate));
        fs::write(&path, model.system.dump_lp(t, Some(force_limit)))?;
        println!("{}", path.display());
    }
    for (i, s) in model.surfaces.iter().enumerate() {
        let a = s.matrix();
        let dump = LimitSurfaceDump {
            contact: i,
            rho: s.rho,
            matrix: (0..6)
                .map(|r| (0..6).map(|c| a[(r, c)]).collect())
                .collect(),
            rank: s.ellipsoid.rank(),
            samples: &s.samples,
            constraints: &s.constraints,
        };
        let path = cfg.out.join(format!(
            "candidate{}_contact{i}_limit_surface.json",
            args.candidate
        ));
        fs::write(&path, serde_json::to_string_pretty(&dump)?)?;
        println!("{}", path.display());
    }
    Ok(())
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Stiffness(a) => cmd_stiffness(a),
        Command::Plan(a) => cmd_plan(a).map(|_| ()),
        Command::Eval(a) => cmd_eval(a).map(|_| ()),
        Command::DumpLp(a) => cmd_dump_lp(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(
            &path,
            r#"{"mesh": "box.obj", "rng_seed": 5, "perturbation": {"k": 7}, "jaw": {"mu": 0.3}}"#,
        )
        .unwrap();
        let args = RunArgs {
            config: Some(path.clone()),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!(cfg.mesh, Some(dir.path().join("box.obj")));
        assert_eq!(cfg.perturbation.k, 7);
        assert_eq!(cfg.rng_seed, 5);
        assert_eq!(cfg.jaw.friction_coefficient, 0.3);
        assert_eq!(cfg.perturbation.sigma_translation, 0.003);

        let args = RunArgs {
            config: Some(path),
            k: Some(3),
            seed: Some(9),
            task: Some(TaskArg::LiftRotate),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!(cfg.perturbation.k, 3);
        assert_eq!(cfg.rng_seed, 9);
        assert_eq!(cfg.task.kind, TaskKind::LiftRotate90);
    }

    #[test]
    fn bad_config_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"jaw": {"mu": -1}}"#).unwrap();
        let err = RunConfig::resolve(&RunArgs {
            config: Some(path),
            ..Default::default()
        })
        .unwrap_err();
        assert_eq!(err.exit_code(), EXIT_INPUT);
        let err = RunConfig::resolve(&RunArgs {
            jobs: Some(0),
            ..Default::default()
        })
        .unwrap_err();
        assert_eq!(err.exit_code(), EXIT_INPUT);
    }

    #[test]
    fn labels_parse() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.csv");
        fs::write(&path, "grasp_id,success\n0,1\n1,false\n2,yes\n").unwrap();
        let l = read_labels(&path).unwrap();
        assert_eq!(
            l.into_iter().collect::<Vec<_>>(),
            vec![(0, true), (1, false), (2, true)]
        );
        fs::write(&path, "grasp_id,success\n0,maybe\n").unwrap();
        assert!(read_labels(&path).is_err());
    }
}
