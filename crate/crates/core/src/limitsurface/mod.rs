//! 6D ellipsoidal limit surfaces of area contacts and their linearization.
//!
//! Friction wrenches are sampled by sweeping unit body twists over the patch:
//! each cell resists its own tangential slip velocity with Coulomb friction,
//! and the cell forces and moments about the friction-weighted center of
//! pressure are summed. The samples are enclosed by a minimum-volume
//! ellipsoid `fᵀ A f ≤ 1`, whose surface is then sampled into hyperplanes
//! `n·(w − F f⊥) ≤ F n·p` with `n = A p`.
//!
//! All wrenches here live in the patch frame with torques divided by the
//! patch's characteristic length ρ.

mod mvee;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Vector3, Vector6};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::ContactPatch;
use crate::geometry::Vec3;
use crate::rng::{seeded, unit_sphere_point};

pub use mvee::{
    fit_ellipsoid, fit_ellipsoid_with, Ellipsoid, DEGENERATE_AXIS_RATIO, FIT_TOLERANCE,
    MAX_ITERATIONS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitSurfaceError {
    #[error("contact patch has no cells")]
    EmptyPatch,
    #[error("ellipsoid fit needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Stacked force/torque 6-vector `[f; τ]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench(Vector6<f64>);

impl Wrench {
    pub fn new(force: Vec3, torque: Vec3) -> Self {
        Wrench(Vector6::new(
            force.x, force.y, force.z, torque.x, torque.y, torque.z,
        ))
    }
    pub fn zero() -> Self {
        Wrench(Vector6::zeros())
    }
    pub fn from_vector(v: Vector6<f64>) -> Self {
        Wrench(v)
    }
    pub fn as_vector(&self) -> &Vector6<f64> {
        &self.0
    }
    pub fn force(&self) -> Vec3 {
        Vector3::new(self.0[0], self.0[1], self.0[2])
    }
    pub fn torque(&self) -> Vec3 {
        Vector3::new(self.0[3], self.0[4], self.0[5])
    }
    pub fn dot(&self, other: &Wrench) -> f64 {
        self.0.dot(&other.0)
    }
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Add for Wrench {
    type Output = Wrench;
    fn add(self, o: Wrench) -> Wrench {
        Wrench(self.0 + o.0)
    }
}
impl Sub for Wrench {
    type Output = Wrench;
    fn sub(self, o: Wrench) -> Wrench {
        Wrench(self.0 - o.0)
    }
}
impl Neg for Wrench {
    type Output = Wrench;
    fn neg(self) -> Wrench {
        Wrench(-self.0)
    }
}
impl Mul<f64> for Wrench {
    type Output = Wrench;
    fn mul(self, s: f64) -> Wrench {
        Wrench(self.0 * s)
    }
}

#[derive(Serialize, Deserialize)]
struct WrenchRepr {
    force: [f64; 3],
    torque: [f64; 3],
}

impl Serialize for Wrench {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let f = self.force();
        let t = self.torque();
        WrenchRepr {
            force: [f.x, f.y, f.z],
            torque: [t.x, t.y, t.z],
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Wrench {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = WrenchRepr::deserialize(d)?;
        Ok(Wrench::new(Vec3::from(r.force), Vec3::from(r.torque)))
    }
}

/// Unit twist `(v, ω)` in the patch frame; ω acts on positions divided by ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist {
    pub linear: Vec3,
    pub angular: Vec3,
}

/// Torque scale of a patch: the largest distance of a loaded cell from the
/// center of pressure (the square root of the area for a point-like patch).
pub fn characteristic_length(patch: &ContactPatch) -> f64 {
    let c = patch.center_of_pressure();
    let rho = patch
        .cells
        .iter()
        .filter(|cell| cell.unit_pressure > 0.0)
        .map(|cell| (cell.centroid - c).norm())
        .fold(0.0, f64::max);
    if rho > 1e-9 {
        rho
    } else {
        patch.area().sqrt().max(1e-9)
    }
}

/// Friction wrench the patch transmits while sliding with `twist`.
pub fn friction_wrench(patch: &ContactPatch, mu: f64, twist: &Twist, rho: f64) -> Wrench {
    let local = patch.local_cells();
    friction_wrench_local(&local, mu, twist, rho)
}

fn friction_wrench_local(
    local: &[crate::contact::ContactCell],
    mu: f64,
    twist: &Twist,
    rho: f64,
) -> Wrench {
    let mut force = Vec3::zeros();
    let mut torque = Vec3::zeros();
    for cell in local {
        let x = cell.centroid.coords;
        let u = twist.linear + twist.angular.cross(&(x / rho));
        let tangential = u - cell.normal * u.dot(&cell.normal);
        let speed = tangential.norm();
        if speed < 1e-12 {
            continue;
        }
        let f = -(tangential / speed) * (mu * cell.unit_pressure * cell.area);
        force += f;
        torque += x.cross(&f);
    }
    Wrench::new(force, torque / rho)
}

/// Samples friction wrenches for `twist_count` unit twists drawn uniformly on
/// S⁵; both `w` and `-w` are returned for every twist.
pub fn sample_friction_wrenches(
    patch: &ContactPatch,
    mu: f64,
    twist_count: usize,
    rng_seed: u64,
) -> Result<Vec<Wrench>, LimitSurfaceError> {
    if patch.cells.is_empty() {
        return Err(LimitSurfaceError::EmptyPatch);
    }
    if twist_count < 100 {
        return Err(LimitSurfaceError::InvalidParameter(format!(
            "twist_count must be at least 100, got {twist_count}"
        )));
    }
    let rho = characteristic_length(patch);
    let local = patch.local_cells();
    let mut rng = seeded(rng_seed);
    let mut out = Vec::with_capacity(2 * twist_count);
    for _ in 0..twist_count {
        let q = unit_sphere_point(&mut rng, 6);
        let twist = Twist {
            linear: Vec3::new(q[0], q[1], q[2]),
            angular: Vec3::new(q[3], q[4], q[5]),
        };
        let w = friction_wrench_local(&local, mu, &twist, rho);
        out.push(w);
        out.push(-w);
    }
    Ok(out)
}

/// Wrench impressed on the object by the normal pressure of the patch per
/// newton of grasp force (patch frame, torque divided by ρ).
pub fn normal_wrench(patch: &ContactPatch, rho: f64) -> Wrench {
    let mut force = Vec3::zeros();
    let mut torque = Vec3::zeros();
    for cell in patch.local_cells() {
        let f = -cell.normal * (cell.unit_pressure * cell.area);
        force += f;
        torque += cell.centroid.coords.cross(&f);
    }
    Wrench::new(force, torque / rho)
}

/// One linearizing hyperplane: `p` on the ellipsoid surface and `n = A p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub p: Wrench,
    pub n: Wrench,
}

impl Hyperplane {
    /// Left-hand side of `n·w − F n·(p + f⊥) ≤ 0`; non-positive when satisfied.
    pub fn residual(&self, w: &Wrench, grasp_force: f64, f_perp_unit: &Wrench) -> f64 {
        self.n.dot(w) - grasp_force * self.n.dot(&(self.p + *f_perp_unit))
    }
}

/// Linearized wrench constraints of one contact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub contact_id: usize,
    pub hyperplanes: Vec<Hyperplane>,
    pub f_perp_unit: Wrench,
    /// Torque scale used by every wrench in this set (m).
    pub rho: f64,
}

impl ConstraintSet {
    /// Largest hyperplane violation of `(w, F)` scaled by each normal's length;
    /// non-positive when every constraint holds.
    pub fn max_violation(&self, w: &Wrench, grasp_force: f64) -> f64 {
        self.hyperplanes
            .iter()
            .map(|h| h.residual(w, grasp_force, &self.f_perp_unit) / h.n.norm())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Minimum number of hyperplanes per contact.
pub const MIN_HYPERPLANES: usize = 20;

/// Samples `m` hyperplanes evenly over the ellipsoid surface.
///
/// With a full-rank ellipsoid the surface points are `W⁻¹q` for `q` spread
/// evenly over S⁵. When some axes were clamped, each clamped axis gets an explicit pair of
/// facets and the remaining facets sample the non-degenerate sub-sphere, so
/// that no facet budget is spent on nearly flat directions.
pub fn linearize(
    ellipsoid: &Ellipsoid,
    f_perp_unit: Wrench,
    m: usize,
    rng_seed: u64,
) -> Result<ConstraintSet, LimitSurfaceError> {
    if m < MIN_HYPERPLANES {
        return Err(LimitSurfaceError::InvalidParameter(format!(
            "need at least {MIN_HYPERPLANES} hyperplanes, got {m}"
        )));
    }
    let rank = ellipsoid.rank();
    let mut qs: Vec<Vector6<f64>> = Vec::with_capacity(m);
    for axis in rank..6 {
        let mut e = Vector6::zeros();
        e[axis] = 1.0;
        qs.push(e);
        qs.push(-e);
    }
    for s in even_sphere_points(rank, m - qs.len(), rng_seed) {
        let mut q = Vector6::zeros();
        q.as_mut_slice()[..rank].copy_from_slice(&s);
        qs.push(q);
    }
    let hyperplanes = qs
        .iter()
        .map(|q| Hyperplane {
            p: Wrench::from_vector(ellipsoid.surface_point(q)),
            n: Wrench::from_vector(ellipsoid.surface_normal(q)),
        })
        .collect();
    Ok(ConstraintSet {
        contact_id: 0,
        hyperplanes,
        f_perp_unit,
        rho: 1.0,
    })
}

/// `count` points spread evenly over S^{dim-1}: antipodal pairs picked by
/// farthest-point selection from a seeded pool of uniform samples. The pool
/// does not depend on `count` below 200 points, so smaller sets are prefixes
/// of larger ones.
pub fn even_sphere_points(dim: usize, count: usize, rng_seed: u64) -> Vec<Vec<f64>> {
    if count == 0 || dim == 0 {
        return Vec::new();
    }
    if dim == 1 {
        return (0..count)
            .map(|k| vec![if k % 2 == 0 { 1.0 } else { -1.0 }])
            .collect();
    }
    let mut rng = seeded(rng_seed);
    let pool: Vec<Vec<f64>> = (0..(POOL_FACTOR * count).max(MIN_POOL))
        .map(|_| unit_sphere_point(&mut rng, dim))
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // closeness to the chosen set, measured as the largest |cos| to any chosen axis
    let mut closeness = vec![f64::NEG_INFINITY; pool.len()];
    let mut out = Vec::with_capacity(count);
    let mut next = 0;
    while out.len() < count {
        let q = pool[next].clone();
        for (c, p) in closeness.iter_mut().zip(&pool) {
            *c = c.max(dot(p, &q).abs());
        }
        out.push(q.clone());
        if out.len() < count {
            out.push(q.iter().map(|v| -v).collect());
        }
        next = (0..pool.len())
            .min_by(|&a, &b| closeness[a].total_cmp(&closeness[b]))
            .unwrap_or(0);
    }
    out
}

const POOL_FACTOR: usize = 20;
const MIN_POOL: usize = 4000;

/// Sampling and fitting parameters for a limit surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimitSurfaceParams {
    pub twist_count: usize,
    pub hyperplanes: usize,
}

impl Default for LimitSurfaceParams {
    fn default() -> Self {
        LimitSurfaceParams {
            twist_count: 500,
            hyperplanes: 100,
        }
    }
}

/// Fitted limit surface of one contact patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSurface {
    pub ellipsoid: Ellipsoid,
    pub f_perp_unit: Wrench,
    pub rho: f64,
    pub constraints: ConstraintSet,
    /// Sampled friction wrenches the ellipsoid was fitted to.
    #[serde(skip)]
    pub samples: Vec<Wrench>,
}

impl LimitSurface {
    /// Samples, fits and linearizes the limit surface of `patch`.
    pub fn build(
        patch: &ContactPatch,
        mu: f64,
        params: &LimitSurfaceParams,
        contact_id: usize,
        rng_seed: u64,
    ) -> Result<Self, LimitSurfaceError> {
        let rho = characteristic_length(patch);
        let samples = sample_friction_wrenches(patch, mu, params.twist_count, rng_seed)?;
        let ellipsoid = fit_ellipsoid(&samples)?;
        let f_perp_unit = normal_wrench(patch, rho);
        let mut constraints = linearize(
            &ellipsoid,
            f_perp_unit,
            params.hyperplanes,
            crate::rng::derive_seed(rng_seed, &[1]),
        )?;
        constraints.contact_id = contact_id;
        constraints.rho = rho;
        Ok(LimitSurface {
            ellipsoid,
            f_perp_unit,
            rho,
            constraints,
            samples,
        })
    }

    pub fn matrix(&self) -> nalgebra::Matrix6<f64> {
        self.ellipsoid.matrix()
    }
}
