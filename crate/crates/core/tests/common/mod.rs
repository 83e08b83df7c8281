#![allow(dead_code)]

use std::sync::Arc;

use minwork::contact::{GraspCandidate, JawConfig};
use minwork::geometry::{Pt3, Vec3};
use minwork::mesh::shapes::{cylinder, icosphere, subdivided_cuboid};
use minwork::mesh::TriMesh;
use minwork::sampler::{sample_candidates, SamplerConfig};

pub const BOX_SIZE: [f64; 3] = [0.06, 0.08, 0.12];

pub fn test_box() -> Arc<TriMesh> {
    Arc::new(subdivided_cuboid(
        Pt3::origin(),
        Vec3::new(BOX_SIZE[0], BOX_SIZE[1], BOX_SIZE[2]),
        6,
    ))
}

pub fn test_cylinder() -> Arc<TriMesh> {
    Arc::new(cylinder(0.03, 0.1, 48))
}

pub fn test_sphere() -> Arc<TriMesh> {
    Arc::new(icosphere(0.035, 3))
}

/// Pads small enough that each contact is close to a point.
pub fn point_jaw(mu: f64) -> JawConfig {
    JawConfig {
        pad_width: 0.004,
        pad_height: 0.004,
        friction_coefficient: mu,
        ..JawConfig::default()
    }
}

/// Symmetric grasp across the box's x faces through its center.
pub fn box_grasp(jaw: JawConfig) -> GraspCandidate {
    let hx = BOX_SIZE[0] / 2.0;
    GraspCandidate::from_contacts(Pt3::new(-hx, 0.0, 0.0), Pt3::new(hx, 0.0, 0.0), jaw)
}

pub fn candidates(mesh: &TriMesh, jaw: &JawConfig, count: usize, seed: u64) -> Vec<GraspCandidate> {
    let cfg = SamplerConfig {
        surface_sample_count: 400,
        max_candidates: count,
        rng_seed: seed,
        ..Default::default()
    };
    sample_candidates(mesh, jaw, &cfg).expect("antipodal candidates")
}
