//! Object stiffness from gripper measurements, interpolated over the mesh.
//!
//! A measurement closes the gripper on a surface point until the force `F_c`
//! is reached; the opening shrinks from `L_s` (first contact) to `L_e`, so the
//! local stiffness is `F_c / (L_s − L_e)`. Vertex values come from
//! inverse-square-distance weighting where distance is the shortest path along
//! mesh edges, so values do not leak through thin walls.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Pt3;
use crate::mesh::{ClosestPoint, TriMesh};
use crate::ply;

/// Stiffness used for rigid material (N/m); larger measurements are clamped to it.
pub const DEFAULT_RIGID_STIFFNESS: f64 = 1e7;
/// Largest distance between a measurement point and the surface (m).
pub const SNAP_TOLERANCE: f64 = 0.005;
const IDW_POWER: i32 = 2;

#[derive(Debug, Error)]
pub enum StiffnessError {
    #[error("non-positive deflection: l_s = {l_s}, l_e = {l_e}")]
    NonPositiveDeflection { l_s: f64, l_e: f64 },
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),
    #[error("no stiffness measurements")]
    NoMeasurements,
    #[error("point {point:?} is {distance} m from the surface (tolerance {tolerance} m)")]
    PointOffSurface {
        point: [f64; 3],
        distance: f64,
        tolerance: f64,
    },
    #[error("stiffness map has {got} values for {expected} vertices")]
    SizeMismatch { expected: usize, got: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// One gripper closing measurement, in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffnessMeasurement {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Closing force reached (N).
    pub f_c: f64,
    /// Opening at first contact (m).
    pub l_s: f64,
    /// Opening when `f_c` is reached (m).
    pub l_e: f64,
}

impl StiffnessMeasurement {
    pub fn new(point: Pt3, f_c: f64, l_s: f64, l_e: f64) -> Self {
        StiffnessMeasurement {
            x: point.x,
            y: point.y,
            z: point.z,
            f_c,
            l_s,
            l_e,
        }
    }

    pub fn grasp_point(&self) -> Pt3 {
        Pt3::new(self.x, self.y, self.z)
    }
}

/// `F_c / (L_s − L_e)`, clamped to `rigid`.
pub fn stiffness_from_measurement(
    m: &StiffnessMeasurement,
    rigid: f64,
) -> Result<f64, StiffnessError> {
    if !(m.f_c > 0.0) || !m.f_c.is_finite() {
        return Err(StiffnessError::InvalidMeasurement(format!(
            "closing force must be positive, got {}",
            m.f_c
        )));
    }
    if !(m.l_e >= 0.0) {
        return Err(StiffnessError::InvalidMeasurement(format!(
            "final opening must be non-negative, got {}",
            m.l_e
        )));
    }
    let deflection = m.l_s - m.l_e;
    if !(deflection > 0.0) {
        return Err(StiffnessError::NonPositiveDeflection {
            l_s: m.l_s,
            l_e: m.l_e,
        });
    }
    Ok((m.f_c / deflection).min(rigid))
}

/// Reads measurements from a CSV file with header `x,y,z,f_c,l_s,l_e`.
pub fn read_measurements(
    path: impl AsRef<Path>,
) -> Result<Vec<StiffnessMeasurement>, StiffnessError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    reader
        .deserialize()
        .map(|r| r.map_err(StiffnessError::from))
        .collect()
}

pub fn write_measurements(
    path: impl AsRef<Path>,
    ms: &[StiffnessMeasurement],
) -> Result<(), StiffnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for m in ms {
        w.serialize(m)?;
    }
    w.flush()?;
    Ok(())
}

/// How neighbouring measurements are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanKind {
    #[default]
    Arithmetic,
    /// Weighted harmonic mean, as for springs in series.
    Harmonic,
}

/// Per-vertex stiffness of a mesh.
#[derive(Debug, Clone)]
pub struct StiffnessMap {
    mesh: Arc<TriMesh>,
    values: Vec<f64>,
    measurements: Vec<StiffnessMeasurement>,
    rigid_floor: f64,
}

impl StiffnessMap {
    /// Same stiffness everywhere.
    pub fn constant(mesh: Arc<TriMesh>, stiffness: f64) -> Self {
        let values = vec![stiffness; mesh.vertices().len()];
        StiffnessMap {
            mesh,
            values,
            measurements: Vec::new(),
            rigid_floor: DEFAULT_RIGID_STIFFNESS,
        }
    }

    /// Uses explicit per-vertex values.
    pub fn from_values(mesh: Arc<TriMesh>, values: Vec<f64>) -> Result<Self, StiffnessError> {
        if values.len() != mesh.vertices().len() {
            return Err(StiffnessError::SizeMismatch {
                expected: mesh.vertices().len(),
                got: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
            return Err(StiffnessError::InvalidMeasurement(format!(
                "stiffness must be positive, got {v}"
            )));
        }
        Ok(StiffnessMap {
            mesh,
            values,
            measurements: Vec::new(),
            rigid_floor: DEFAULT_RIGID_STIFFNESS,
        })
    }

    pub fn with_rigid_floor(mut self, rigid: f64) -> Self {
        self.rigid_floor = rigid;
        self
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn vertex_values(&self) -> &[f64] {
        &self.values
    }

    pub fn measurements(&self) -> &[StiffnessMeasurement] {
        &self.measurements
    }

    /// Stiffness at and above which material counts as rigid.
    pub fn rigid_floor(&self) -> f64 {
        self.rigid_floor
    }

    pub fn min_stiffness(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_stiffness(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Multiplies every vertex stiffness by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= factor);
        m
    }

    /// Barycentric interpolation on the triangle closest to `point`.
    pub fn stiffness_at(&self, point: &Pt3) -> Result<f64, StiffnessError> {
        let cp = self.mesh.closest_point(point);
        if cp.distance > SNAP_TOLERANCE {
            return Err(StiffnessError::PointOffSurface {
                point: [point.x, point.y, point.z],
                distance: cp.distance,
                tolerance: SNAP_TOLERANCE,
            });
        }
        Ok(self.interpolate(&cp))
    }

    // clamped so rounding never leaves the vertex range
    fn interpolate(&self, cp: &ClosestPoint) -> f64 {
        let v = self.mesh.triangles()[cp.triangle].map(|i| self.values[i]);
        let s: f64 = (0..3).map(|k| cp.barycentric[k] * v[k]).sum();
        s.clamp(v[0].min(v[1]).min(v[2]), v[0].max(v[1]).max(v[2]))
    }

    /// Barycentric interpolation on the closest triangle, without a distance check.
    pub fn stiffness_nearest(&self, point: &Pt3) -> f64 {
        self.interpolate(&self.mesh.closest_point(point))
    }

    /// `{vertex_index: stiffness}` as JSON.
    pub fn to_json(&self) -> Result<String, StiffnessError> {
        let map: BTreeMap<usize, f64> = self.values.iter().copied().enumerate().collect();
        Ok(serde_json::to_string_pretty(&map)?)
    }

    /// Vertex colors on a log scale between the extreme values: red is soft.
    pub fn vertex_colors(&self) -> Vec<[u8; 3]> {
        let (lo, hi) = (self.min_stiffness().ln(), self.max_stiffness().ln());
        self.values
            .iter()
            .map(|v| {
                let t = if hi - lo > 1e-12 {
                    (v.ln() - lo) / (hi - lo)
                } else {
                    1.0
                };
                ply::red_white_blue(t)
            })
            .collect()
    }

    pub fn write_ply(&self, path: impl AsRef<Path>) -> Result<(), StiffnessError> {
        let comments = vec![
            "stiffness map: red = soft, blue = stiff (log scale)".to_string(),
            format!(
                "min_stiffness {} max_stiffness {}",
                self.min_stiffness(),
                self.max_stiffness()
            ),
        ];
        ply::write_ply(
            path,
            self.mesh.vertices(),
            self.mesh.triangles(),
            Some(&self.vertex_colors()),
            &comments,
        )?;
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Shortest edge-path distance from `seeds` (vertex, initial distance) to every vertex.
fn graph_distances(adjacency: &[Vec<(usize, f64)>], seeds: &[(usize, f64)]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adjacency.len()];
    let mut heap = BinaryHeap::new();
    for &(v, d) in seeds {
        if d < dist[v] {
            dist[v] = d;
            heap.push(Entry(d, v));
        }
    }
    while let Some(Entry(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(u, len) in &adjacency[v] {
            let nd = d + len;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Entry(nd, u));
            }
        }
    }
    dist
}

/// Interpolates measurements over the mesh vertices.
pub fn build_map(
    mesh: Arc<TriMesh>,
    measurements: &[StiffnessMeasurement],
    mean: MeanKind,
    rigid: f64,
) -> Result<StiffnessMap, StiffnessError> {
    if measurements.is_empty() {
        return Err(StiffnessError::NoMeasurements);
    }
    let n = mesh.vertices().len();
    let mut adjacency = vec![Vec::new(); n];
    for (a, b, len) in mesh.edges() {
        adjacency[a].push((b, len));
        adjacency[b].push((a, len));
    }

    let mut sources = Vec::with_capacity(measurements.len());
    for m in measurements {
        let s = stiffness_from_measurement(m, rigid)?;
        let p = m.grasp_point();
        let cp = mesh.closest_point(&p);
        if cp.distance > SNAP_TOLERANCE {
            return Err(StiffnessError::PointOffSurface {
                point: [p.x, p.y, p.z],
                distance: cp.distance,
                tolerance: SNAP_TOLERANCE,
            });
        }
        let seeds: Vec<(usize, f64)> = mesh.triangles()[cp.triangle]
            .iter()
            .map(|&v| (v, (mesh.vertices()[v] - cp.point).norm()))
            .collect();
        let mut dist = graph_distances(&adjacency, &seeds);
        if dist.iter().any(|d| !d.is_finite()) {
            // other shells of the mesh: straight-line distance instead
            for (v, d) in dist.iter_mut().enumerate() {
                if !d.is_finite() {
                    *d = (mesh.vertices()[v] - cp.point).norm();
                }
            }
        }
        sources.push((s, dist));
    }

    let exact_tol = 1e-12 * mesh.bounding_radius().max(1e-300);
    let values = (0..n)
        .map(|v| {
            let exact: Vec<f64> = sources
                .iter()
                .filter(|(_, d)| d[v] <= exact_tol)
                .map(|(s, _)| *s)
                .collect();
            if !exact.is_empty() {
                return combine(exact.iter().map(|&s| (1.0, s)), mean);
            }
            combine(
                sources.iter().map(|(s, d)| (d[v].powi(-IDW_POWER), *s)),
                mean,
            )
        })
        .collect();
    Ok(StiffnessMap {
        mesh,
        values,
        measurements: measurements.to_vec(),
        rigid_floor: rigid,
    })
}

fn combine(weighted: impl Iterator<Item = (f64, f64)>, mean: MeanKind) -> f64 {
    let (mut wsum, mut acc) = (0.0, 0.0);
    for (w, s) in weighted {
        wsum += w;
        acc += match mean {
            MeanKind::Arithmetic => w * s,
            MeanKind::Harmonic => w / s,
        };
    }
    match mean {
        MeanKind::Arithmetic => acc / wsum,
        MeanKind::Harmonic => wsum / acc,
    }
}
