//! Minimal grasp force linear program.
//!
//! Variables are the grasp force `F_i ≥ 0` of every contact and its contact
//! wrench `w_i` (patch frame, torque divided by the patch length ρ_i). The
//! program minimizes `Σ F_i` subject to `G w = t` and, per hyperplane,
//! `n·w_i − F_i n·(p + f⊥) ≤ 0`.
//!
//! The common wrench frame divides torques by a global length ρ_g, so the
//! block of contact `i` in `G` is `[[R, 0], [[r]×R/ρ_g, (ρ_i/ρ_g) R]]`.

mod simplex;

use nalgebra::{DMatrix, Matrix3, Matrix6, Vector6};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::ContactPatch;
use crate::geometry::{skew, Pose};
use crate::limitsurface::{ConstraintSet, Wrench};

pub use simplex::{LinearProgram, LpOutcome, LpSolution, Row, RowSense};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// One contact of a grasp system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemContact {
    pub constraints: ConstraintSet,
    /// Patch frame in world coordinates.
    pub frame: Pose,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspSystem {
    pub contacts: Vec<SystemContact>,
    /// 6 × 6N map from scaled contact wrenches to the scaled net wrench.
    pub g: DMatrix<f64>,
    pub wrench_frame: Pose,
    /// Global torque length ρ_g (m).
    pub torque_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceSolution {
    pub feasible: bool,
    /// Grasp force per contact (N).
    pub forces: Vec<f64>,
    /// Contact wrenches in their patch frames, torques divided by ρ_i.
    pub wrenches: Vec<Wrench>,
    /// Σ F_i (N).
    pub objective: f64,
    /// Target wrench in the wrench frame (N, N·m).
    pub target: Wrench,
    /// |primal − dual| objective when feasible.
    pub duality_gap: Option<f64>,
}

/// Adjoint block mapping a contact wrench into the common frame.
pub fn adjoint_block(relative: &Pose, rho_contact: f64, torque_scale: f64) -> Matrix6<f64> {
    let r: Matrix3<f64> = relative.rotation.to_rotation_matrix().into_inner();
    let t = relative.translation.vector;
    let mut block = Matrix6::zeros();
    block.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
    block
        .fixed_view_mut::<3, 3>(3, 0)
        .copy_from(&(skew(&t) * r / torque_scale));
    block
        .fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&(r * (rho_contact / torque_scale)));
    block
}

/// Assembles the grasp matrix of `contacts` about `wrench_frame`.
pub fn build_system(
    contacts: &[(ContactPatch, ConstraintSet)],
    wrench_frame: Pose,
    torque_scale: f64,
) -> Result<GraspSystem, OptimizerError> {
    if contacts.is_empty() {
        return Err(OptimizerError::InvalidInput(
            "grasp system needs at least one contact".into(),
        ));
    }
    if !(torque_scale > 0.0 && torque_scale.is_finite()) {
        return Err(OptimizerError::InvalidInput(format!(
            "torque scale must be positive, got {torque_scale}"
        )));
    }
    let n = contacts.len();
    let mut g = DMatrix::zeros(6, 6 * n);
    let inv = wrench_frame.inverse();
    let mut out = Vec::with_capacity(n);
    for (i, (patch, cs)) in contacts.iter().enumerate() {
        let block = adjoint_block(&(inv * patch.frame), cs.rho, torque_scale);
        g.view_mut((0, 6 * i), (6, 6)).copy_from(&block);
        out.push(SystemContact {
            constraints: cs.clone(),
            frame: patch.frame,
        });
    }
    Ok(GraspSystem {
        contacts: out,
        g,
        wrench_frame,
        torque_scale,
    })
}

impl GraspSystem {
    pub fn contact_count(&self) -> usize {
        self.contacts.len()
    }

    /// Target wrench with its torque divided by the global torque length.
    pub fn scaled_target(&self, t: &Wrench) -> Vector6<f64> {
        Wrench::new(t.force(), t.torque() / self.torque_scale)
            .as_vector()
            .to_owned()
    }

    /// Builds the linear program; `force_limit` bounds every `F_i` from above.
    pub fn linear_program(&self, t: &Wrench, force_limit: Option<f64>) -> LinearProgram {
        let n = self.contacts.len();
        let mut lp = LinearProgram::new();
        let upper = force_limit.unwrap_or(f64::INFINITY);
        for i in 0..n {
            lp.add_variable(format!("F{i}"), 1.0, 0.0, upper);
        }
        let wvar = |i: usize, k: usize| n + 6 * i + k;
        for i in 0..n {
            for k in 0..6 {
                lp.add_variable(format!("w{i}_{k}"), 0.0, f64::NEG_INFINITY, f64::INFINITY);
            }
        }
        let ts = self.scaled_target(t);
        for k in 0..6 {
            let coeffs = (0..6 * n)
                .filter(|&col| self.g[(k, col)] != 0.0)
                .map(|col| (wvar(col / 6, col % 6), self.g[(k, col)]))
                .collect();
            lp.add_row(format!("balance{k}"), coeffs, RowSense::Eq, ts[k]);
        }
        for (i, c) in self.contacts.iter().enumerate() {
            let cs = &c.constraints;
            for (h, plane) in cs.hyperplanes.iter().enumerate() {
                let norm = plane.n.norm();
                let nv = plane.n.as_vector() / norm;
                let mut coeffs: Vec<(usize, f64)> = (0..6)
                    .filter(|&k| nv[k] != 0.0)
                    .map(|k| (wvar(i, k), nv[k]))
                    .collect();
                let reach = plane.n.dot(&(plane.p + cs.f_perp_unit)) / norm;
                coeffs.push((i, -reach));
                lp.add_row(format!("c{i}_{h}"), coeffs, RowSense::Le, 0.0);
            }
        }
        lp
    }

    /// Plain-text (CPLEX LP) dump of the program for `t`.
    pub fn dump_lp(&self, t: &Wrench, force_limit: Option<f64>) -> String {
        self.linear_program(t, force_limit).to_lp_text()
    }

    /// Scaled net wrench `G w` of the given contact wrenches.
    pub fn net_wrench(&self, wrenches: &[Wrench]) -> Vector6<f64> {
        let mut net = Vector6::zeros();
        for (i, w) in wrenches.iter().enumerate() {
            net += self.g.view((0, 6 * i), (6, 6)) * w.as_vector();
        }
        net
    }
}

/// Minimal total grasp force resisting `t` (wrench frame, physical units).
pub fn min_force(system: &GraspSystem, t: &Wrench) -> Result<ForceSolution, OptimizerError> {
    solve(system, t, None)
}

/// As [`min_force`] with every grasp force bounded by `force_limit`.
pub fn min_force_bounded(
    system: &GraspSystem,
    t: &Wrench,
    force_limit: f64,
) -> Result<ForceSolution, OptimizerError> {
    solve(system, t, Some(force_limit))
}

/// Whether `t` can be resisted without any grasp force exceeding `force_limit`.
pub fn check_reliability(
    system: &GraspSystem,
    t: &Wrench,
    force_limit: f64,
) -> Result<bool, OptimizerError> {
    if !(force_limit > 0.0) {
        return Err(OptimizerError::InvalidInput(format!(
            "force limit must be positive, got {force_limit}"
        )));
    }
    Ok(min_force_bounded(system, t, force_limit)?.feasible)
}

fn solve(
    system: &GraspSystem,
    t: &Wrench,
    force_limit: Option<f64>,
) -> Result<ForceSolution, OptimizerError> {
    if !t.is_finite() {
        return Err(OptimizerError::InvalidInput(
            "target wrench is not finite".into(),
        ));
    }
    let n = system.contact_count();
    let lp = system.linear_program(t, force_limit);
    match lp.solve()? {
        LpOutcome::Optimal(sol) => {
            let forces = sol.x[..n].to_vec();
            let wrenches = (0..n)
                .map(|i| {
                    Wrench::from_vector(Vector6::from_column_slice(
                        &sol.x[n + 6 * i..n + 6 * i + 6],
                    ))
                })
                .collect();
            Ok(ForceSolution {
                feasible: true,
                objective: forces.iter().sum(),
                forces,
                wrenches,
                target: *t,
                duality_gap: Some((sol.objective - sol.dual_objective).abs()),
            })
        }
        LpOutcome::Infeasible { .. } => Ok(ForceSolution {
            feasible: false,
            forces: vec![0.0; n],
            wrenches: vec![Wrench::zero(); n],
            objective: f64::INFINITY,
            target: *t,
            duality_gap: None,
        }),
        LpOutcome::Unbounded => Err(OptimizerError::SolverFailure(
            "minimal force program reported unbounded".into(),
        )),
    }
}

/// Substitutes a feasible solution back into every constraint, independently
/// of the solver. Returns the first violation found.
pub fn verify_solution(system: &GraspSystem, sol: &ForceSolution, tol: f64) -> Result<(), String> {
    if !sol.feasible {
        return Ok(());
    }
    let t = system.scaled_target(&sol.target);
    let residual = (system.net_wrench(&sol.wrenches) - t).norm();
    if residual > tol * (1.0 + t.norm()) {
        return Err(format!("balance residual {residual:e}"));
    }
    for (i, c) in system.contacts.iter().enumerate() {
        if sol.forces[i] < -tol {
            return Err(format!(
                "negative grasp force {} at contact {i}",
                sol.forces[i]
            ));
        }
        let v = c.constraints.max_violation(&sol.wrenches[i], sol.forces[i]);
        if v > tol * (1.0 + sol.forces[i]) {
            return Err(format!("hyperplane violation {v:e} at contact {i}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Pt3, Vec3};
    use crate::limitsurface::Hyperplane;
    use approx::assert_relative_eq;
    use nalgebra::{Isometry3, Translation3, UnitQuaternion};

    #[test]
    fn coincident_contact_block_is_identity() {
        let b = adjoint_block(&Pose::identity(), 0.01, 0.01);
        assert_relative_eq!(b, Matrix6::identity(), epsilon = 1e-15);
    }

    #[test]
    fn translated_contact_moment() {
        let r = 0.03;
        let b = adjoint_block(&Isometry3::translation(r, 0.0, 0.0), 1.0, 1.0);
        let w = b * Vector6::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0);
        let expected = Vec3::x().cross(&Vec3::z()) * r;
        assert_relative_eq!(Vec3::new(w[3], w[4], w[5]), expected, epsilon = 1e-15);
    }

    #[test]
    fn mirrored_contacts_compose() {
        // block(T1 ∘ T2) = block(T1) · block(T2) with unit lengths
        let a = Isometry3::from_parts(
            Translation3::new(0.02, -0.01, 0.03),
            UnitQuaternion::from_euler_angles(0.3, -0.2, 0.9),
        );
        let b = Isometry3::from_parts(
            Translation3::new(-0.04, 0.0, 0.01),
            UnitQuaternion::from_euler_angles(1.0, 0.4, 0.0),
        );
        assert_relative_eq!(
            adjoint_block(&(a * b), 1.0, 1.0),
            adjoint_block(&a, 1.0, 1.0) * adjoint_block(&b, 1.0, 1.0),
            epsilon = 1e-12
        );
        // mirror pair about the origin: rotation by π about y maps one onto the other
        let flip = Isometry3::rotation(Vec3::y() * std::f64::consts::PI);
        let c1 = Isometry3::translation(-0.05, 0.0, 0.0);
        let c2 = flip * c1;
        assert_relative_eq!(
            adjoint_block(&c2, 1.0, 1.0),
            adjoint_block(&flip, 1.0, 1.0) * adjoint_block(&c1, 1.0, 1.0),
            epsilon = 1e-12
        );
    }

    /// Point contact with an isotropic tangential friction disc of radius μ.
    fn point_constraints(mu: f64, m: usize) -> ConstraintSet {
        let hyperplanes = (0..m)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                let p = Wrench::new(Vec3::new(a.cos(), a.sin(), 0.0) * mu, Vec3::zeros());
                Hyperplane {
                    p,
                    n: p * (1.0 / (mu * mu)),
                }
            })
            .collect();
        ConstraintSet {
            contact_id: 0,
            hyperplanes,
            f_perp_unit: Wrench::new(Vec3::z(), Vec3::zeros()),
            rho: 1.0,
        }
    }

    fn point_patch(at: Pt3, axis: Vec3) -> ContactPatch {
        let cell = crate::contact::ContactCell {
            centroid: at,
            normal: -axis,
            area: 1.0,
            unit_pressure: 1.0,
        };
        ContactPatch::from_weighted_cells(vec![cell], &axis, &Vec3::z()).unwrap()
    }

    fn two_point_system(mu: f64) -> GraspSystem {
        let c = vec![
            (
                point_patch(Pt3::new(-0.05, 0.0, 0.0), Vec3::x()),
                point_constraints(mu, 64),
            ),
            (
                point_patch(Pt3::new(0.05, 0.0, 0.0), -Vec3::x()),
                point_constraints(mu, 64),
            ),
        ];
        build_system(&c, Pose::identity(), 0.05).unwrap()
    }

    #[test]
    fn zero_target_needs_no_force() {
        let s = two_point_system(0.5);
        let sol = min_force(&s, &Wrench::zero()).unwrap();
        assert!(sol.feasible);
        assert!(sol.objective.abs() < 1e-12);
        assert!(sol.wrenches.iter().all(|w| w.norm() < 1e-12));
        assert!(check_reliability(&s, &Wrench::zero(), 1.0).unwrap());
    }

    #[test]
    fn point_contacts_lift() {
        // friction polygon with 64 facets is outer by 1/cos(π/64)
        let s = two_point_system(0.5);
        let t = Wrench::new(Vec3::new(0.0, 0.0, 9.81), Vec3::zeros());
        let sol = min_force(&s, &t).unwrap();
        assert!(sol.feasible);
        let bound = 9.81 / 0.5;
        assert!(
            sol.objective <= bound + 1e-9
                && sol.objective >= bound * (std::f64::consts::PI / 64.0).cos() - 1e-9
        );
        assert!(sol.duality_gap.unwrap() < 1e-6);
        verify_solution(&s, &sol, 1e-6).unwrap();
        assert!(check_reliability(&s, &t, 20.0).unwrap());
        assert!(!check_reliability(&s, &t, 5.0).unwrap());
    }

    #[test]
    fn lp_dump_has_all_rows() {
        let s = two_point_system(0.5);
        let text = s.dump_lp(&Wrench::new(Vec3::z(), Vec3::zeros()), Some(20.0));
        assert_eq!(text.matches("balance").count(), 6);
        assert_eq!(text.matches(" c1_").count(), 64);
        assert!(text.contains("0e0 <= F1 <= 2e1"));
    }
}
