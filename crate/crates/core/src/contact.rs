//! Area contact between a compliant rectangular jaw pad and the object mesh.
//!
//! The pad footprint is extruded along the closing direction by casting one
//! ray per pad cell. The first touching cell anchors the jaw; every cell whose
//! hit lies within the pad thickness of that anchor is compressed, and its
//! pressure is proportional to the compression. Pressures are normalized so a
//! patch always carries 1 N along the closing axis per 1 N of grasp force.

use nalgebra::{Matrix3, Rotation3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{frame_from_axis, Pose, Pt3, Vec3};
use crate::mesh::{Ray, SurfaceSample, TriMesh};

/// Minimum |cos| between a cell's surface normal and the closing axis used
/// when converting pad cell area to surface area.
const MIN_AREA_COSINE: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContactError {
    #[error("no ray from the pad reaches the object within the jaw travel")]
    NoContact,
    #[error("contact patch area {0:e} m^2 is below 1e-10 m^2")]
    DegeneratePatch(f64),
    #[error("invalid jaw configuration: {0}")]
    InvalidJaw(String),
}

/// Geometry and limits of one parallel-jaw gripper with compliant pads.
///
/// Defaults describe a generic desk-scale gripper; they are assumptions, not
/// measured values for any particular product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JawConfig {
    /// Pad extent along the pad's width axis (m).
    pub pad_width: f64,
    /// Pad extent along the pad's height axis (m).
    pub pad_height: f64,
    /// Maximum compliant compression of the pad (m).
    pub pad_thickness: f64,
    /// Cells per pad side.
    pub grid_resolution: usize,
    /// Coulomb friction coefficient.
    #[serde(rename = "mu")]
    pub friction_coefficient: f64,
    /// Maximum grasp force per jaw (N).
    #[serde(rename = "f_max")]
    pub max_force: f64,
    /// Maximum jaw opening (m).
    pub max_opening: f64,
}

impl Default for JawConfig {
    fn default() -> Self {
        JawConfig {
            pad_width: 0.02,
            pad_height: 0.03,
            pad_thickness: 0.005,
            grid_resolution: 16,
            friction_coefficient: 0.5,
            max_force: 20.0,
            max_opening: 0.085,
        }
    }
}

impl JawConfig {
    pub fn validate(&self) -> Result<(), ContactError> {
        let bad = |m: &str| Err(ContactError::InvalidJaw(m.to_string()));
        if !(self.pad_width > 0.0 && self.pad_height > 0.0 && self.pad_thickness > 0.0) {
            return bad("pad dimensions must be positive");
        }
        if !(self.max_opening > 0.0) {
            return bad("max_opening must be positive");
        }
        if !(self.friction_coefficient > 0.0 && self.friction_coefficient <= 2.0) {
            return bad("mu must lie in (0, 2]");
        }
        if self.grid_resolution < 4 {
            return bad("grid_resolution must be at least 4");
        }
        if !(self.max_force > 0.0) {
            return bad("f_max must be positive");
        }
        Ok(())
    }

    /// Half-angle of the friction cone.
    pub fn cone_half_angle(&self) -> f64 {
        self.friction_coefficient.atan()
    }
}

/// One discretized element of a contact area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactCell {
    pub centroid: Pt3,
    /// Outward surface normal of the object at the cell.
    pub normal: Vec3,
    /// Surface area (m^2).
    pub area: f64,
    /// Normal pressure per newton of grasp force (Pa/N).
    pub unit_pressure: f64,
}

/// A discretized, possibly non-planar contact area with its pressure field.
///
/// `frame` has its origin at the friction-weighted center of pressure and its
/// z axis along the closing direction. Cells are stored in world coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactPatch {
    pub cells: Vec<ContactCell>,
    pub frame: Pose,
}

impl ContactPatch {
    /// Builds a patch from cells carrying unnormalized pressure weights.
    ///
    /// Pressures are rescaled so the closing-axis force per unit grasp force is
    /// one; the frame origin becomes the friction-weighted center of pressure
    /// and its x axis the projection of `width_axis` onto the pad plane.
    pub fn from_weighted_cells(
        mut cells: Vec<ContactCell>,
        closing_axis: &Vec3,
        width_axis: &Vec3,
    ) -> Result<Self, ContactError> {
        let z = closing_axis.normalize();
        if cells.is_empty() {
            return Err(ContactError::NoContact);
        }
        let area: f64 = cells.iter().map(|c| c.area).sum();
        if !(area >= 1e-10) {
            return Err(ContactError::DegeneratePatch(area));
        }
        let closing_force: f64 = cells
            .iter()
            .map(|c| c.unit_pressure * c.area * c.normal.dot(&z).abs())
            .sum();
        if !(closing_force > 0.0) {
            return Err(ContactError::DegeneratePatch(area));
        }
        for c in &mut cells {
            c.unit_pressure /= closing_force;
        }
        // μ is uniform over the patch, so it cancels in the weighted mean.
        let weight: f64 = cells.iter().map(|c| c.unit_pressure * c.area).sum();
        let center = cells.iter().fold(Vec3::zeros(), |acc, c| {
            acc + c.centroid.coords * (c.unit_pressure * c.area)
        }) / weight;

        let mut x = width_axis - z * z.dot(width_axis);
        if x.norm() < 1e-9 {
            x = frame_from_axis(&Pt3::origin(), &z).rotation * Vec3::x();
        }
        let x = x.normalize();
        let y = z.cross(&x);
        let rot = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]));
        let frame = Pose::from_parts(
            Translation3::from(center),
            UnitQuaternion::from_rotation_matrix(&rot),
        );
        Ok(ContactPatch { cells, frame })
    }

    pub fn closing_axis(&self) -> Vec3 {
        self.frame.rotation * Vec3::z()
    }

    pub fn center_of_pressure(&self) -> Pt3 {
        Pt3::from(self.frame.translation.vector)
    }

    /// Closing-axis force carried per newton of grasp force (1 by construction).
    pub fn total_unit_force(&self) -> f64 {
        let z = self.closing_axis();
        self.cells
            .iter()
            .map(|c| c.unit_pressure * c.area * c.normal.dot(&z).abs())
            .sum()
    }

    pub fn area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    /// Cells with centroid and normal expressed in the patch frame.
    pub fn local_cells(&self) -> Vec<ContactCell> {
        let inv = self.frame.inverse();
        self.cells
            .iter()
            .map(|c| ContactCell {
                centroid: inv * c.centroid,
                normal: inv.rotation * c.normal,
                ..*c
            })
            .collect()
    }
}

/// Estimates the contact patch of a pad approaching the mesh along `closing_dir`.
///
/// `pad_pose` places the pad center; its local x and y axes span the pad
/// rectangle (width, height). The pad must start outside the object.
pub fn extract_patch(
    mesh: &TriMesh,
    pad_pose: &Pose,
    closing_dir: &Vec3,
    jaw: &JawConfig,
) -> Result<ContactPatch, ContactError> {
    jaw.validate()?;
    let dir = closing_dir.normalize();
    let n = jaw.grid_resolution;
    let cell_w = jaw.pad_width / n as f64;
    let cell_h = jaw.pad_height / n as f64;
    let cell_area = cell_w * cell_h;
    let travel = jaw.max_opening;

    let mut hits = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let local = Pt3::new(
                (i as f64 + 0.5) * cell_w - jaw.pad_width / 2.0,
                (j as f64 + 0.5) * cell_h - jaw.pad_height / 2.0,
                0.0,
            );
            let ray = Ray {
                origin: pad_pose * local,
                direction: dir,
            };
            if let Some(hit) = mesh.raycast(&ray) {
                // back-facing first hits mean the cell starts inside the object
                if hit.distance <= travel && hit.normal.dot(&dir) < 0.0 {
                    hits.push((ray.at(hit.distance), hit.normal, hit.distance));
                }
            }
        }
    }
    if hits.is_empty() {
        return Err(ContactError::NoContact);
    }
    let d_min = hits.iter().map(|h| h.2).fold(f64::INFINITY, f64::min);
    let h = jaw.pad_thickness;
    let cells: Vec<ContactCell> = hits
        .into_iter()
        .filter(|&(_, _, d)| d - d_min <= h)
        .map(|(point, normal, d)| {
            let compression = h - (d - d_min);
            let cos = normal.dot(&dir).abs().max(MIN_AREA_COSINE);
            ContactCell {
                centroid: point,
                normal,
                area: cell_area / cos,
                unit_pressure: compression,
            }
        })
        .collect();
    let width_axis = pad_pose.rotation * Vec3::x();
    ContactPatch::from_weighted_cells(cells, &dir, &width_axis)
}

/// Two facing jaw pads of a parallel-jaw grasp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspCandidate {
    /// Pad pose of jaw 1; its z axis is the closing axis.
    pub jaw1: Pose,
    /// Pad pose of jaw 2; its z axis is minus the closing axis.
    pub jaw2: Pose,
    /// Closing direction of jaw 1 (unit).
    pub closing_axis: Vec3,
    pub contact1: Pt3,
    pub contact2: Pt3,
    pub jaw: JawConfig,
}

impl GraspCandidate {
    /// Places both pads on the line through `contact1` and `contact2`, each
    /// half the maximum opening away from their midpoint.
    pub fn from_contacts(contact1: Pt3, contact2: Pt3, jaw: JawConfig) -> Self {
        let axis = (contact2 - contact1).normalize();
        let mid = nalgebra::center(&contact1, &contact2);
        let half = jaw.max_opening / 2.0;
        GraspCandidate {
            jaw1: frame_from_axis(&(mid - axis * half), &axis),
            jaw2: frame_from_axis(&(mid + axis * half), &-axis),
            closing_axis: axis,
            contact1,
            contact2,
            jaw,
        }
    }

    pub fn center(&self) -> Pt3 {
        nalgebra::center(&self.contact1, &self.contact2)
    }

    /// Applies `delta` (expressed about the grasp center, in world axes) to the whole grasp.
    pub fn perturbed(&self, delta: &Pose) -> GraspCandidate {
        let c = Pose::translation(self.center().x, self.center().y, self.center().z);
        let t = c * delta * c.inverse();
        GraspCandidate {
            jaw1: t * self.jaw1,
            jaw2: t * self.jaw2,
            closing_axis: t.rotation * self.closing_axis,
            contact1: t * self.contact1,
            contact2: t * self.contact2,
            jaw: self.jaw,
        }
    }

    /// Contact patches for jaw 1 and jaw 2.
    pub fn patches(&self, mesh: &TriMesh) -> Result<[ContactPatch; 2], ContactError> {
        let p1 = extract_patch(mesh, &self.jaw1, &self.closing_axis, &self.jaw)?;
        let p2 = extract_patch(mesh, &self.jaw2, &-self.closing_axis, &self.jaw)?;
        Ok([p1, p2])
    }
}

/// Returns whether the surface points form an antipodal pair under `jaw`.
pub fn is_antipodal(p1: &SurfaceSample, p2: &SurfaceSample, jaw: &JawConfig) -> bool {
    let d = p2.point - p1.point;
    let len = d.norm();
    if !(len > 1e-9 && len < jaw.max_opening) {
        return false;
    }
    let axis = d / len;
    let cos_cone = jaw.cone_half_angle().cos();
    // tolerance absorbs rounding for exactly opposed normals
    p1.normal.dot(&-axis) >= cos_cone - 1e-12 && p2.normal.dot(&axis) >= cos_cone - 1e-12
}

/// Builds a grasp from two surface points when they are antipodal within the
/// friction cone and closer than the maximum opening, and when each pad
/// reaches its own contact point first.
pub fn make_antipodal_grasp(
    mesh: &TriMesh,
    p1: &SurfaceSample,
    p2: &SurfaceSample,
    jaw: &JawConfig,
) -> Option<GraspCandidate> {
    if !is_antipodal(p1, p2, jaw) {
        return None;
    }
    let g = GraspCandidate::from_contacts(p1.point, p2.point, *jaw);
    let tol = 1e-6 + 1e-6 * jaw.max_opening;
    for (pad, target, dir) in [
        (&g.jaw1, p1.point, g.closing_axis),
        (&g.jaw2, p2.point, -g.closing_axis),
    ] {
        let origin = Pt3::from(pad.translation.vector);
        let hit = mesh.raycast(&Ray {
            origin,
            direction: dir,
        })?;
        if hit.normal.dot(&dir) >= 0.0 || hit.distance > (target - origin).norm() + tol {
            return None;
        }
    }
    Some(g)
}
