mod common;

use minwork::contact::{extract_patch, is_antipodal, ContactPatch, JawConfig};
use minwork::geometry::{frame_from_axis, Pose, Pt3, Vec3};
use minwork::mesh::shapes::icosphere;
use minwork::mesh::{SurfaceSample, TriMesh};
use minwork::sampler::{candidate_distance, sample_candidates, SamplerConfig};
use proptest::prelude::*;

use common::{test_box, test_cylinder, test_sphere};

fn pad_toward(target: &Pt3, dir: &Vec3, standoff: f64) -> Pose {
    frame_from_axis(&(target - dir * standoff), dir)
}

fn check_patch(mesh: &TriMesh, patch: &ContactPatch) -> Result<(), TestCaseError> {
    prop_assert!((patch.total_unit_force() - 1.0).abs() < 1e-6);
    for c in &patch.cells {
        prop_assert!(c.unit_pressure >= 0.0);
        prop_assert!(mesh.closest_point(&c.centroid).distance < 1e-9);
    }
    Ok(())
}

#[test]
fn sphere_patch_area_converges_with_grid() {
    let mesh = icosphere(0.05, 4);
    let dir = -Vec3::z();
    let pad = pad_toward(&Pt3::new(0.0, 0.0, 0.05), &dir, 0.02);
    let jaw = |grid| JawConfig {
        grid_resolution: grid,
        pad_width: 0.04,
        pad_height: 0.04,
        ..JawConfig::default()
    };
    let a16 = extract_patch(&mesh, &pad, &dir, &jaw(16)).unwrap().area();
    let a32 = extract_patch(&mesh, &pad, &dir, &jaw(32)).unwrap().area();
    assert!((a32 - a16).abs() / a32 < 0.05, "{a16} vs {a32}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn patches_are_normalized_and_on_surface(which in 0usize..3, theta in 0.2..2.9f64, phi in 0.0..std::f64::consts::TAU) {
        let mesh = [test_box(), test_cylinder(), test_sphere()][which].clone();
        let dir = -Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        let pad = pad_toward(&Pt3::origin(), &dir, 0.1);
        let patch = extract_patch(&mesh, &pad, &dir, &JawConfig::default());
        prop_assume!(patch.is_ok());
        check_patch(&mesh, &patch.unwrap())?;
    }

    #[test]
    fn extraction_commutes_with_rigid_motion(tx in -0.5..0.5f64, ty in -0.5..0.5f64, tz in -0.5..0.5f64,
                                             rx in -3.0..3.0f64, ry in -3.0..3.0f64, rz in -3.0..3.0f64,
                                             theta in 0.2..2.9f64, phi in 0.0..std::f64::consts::TAU) {
        let mesh = icosphere(0.04, 3);
        let dir = -Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        let pad = pad_toward(&Pt3::origin(), &dir, 0.08);
        let jaw = JawConfig::default();
        let a = extract_patch(&mesh, &pad, &dir, &jaw).unwrap();
        let g = Pose::new(Vec3::new(tx, ty, tz), Vec3::new(rx, ry, rz));
        let moved = mesh.transformed(&g).unwrap();
        let b = extract_patch(&moved, &(g * pad), &(g.rotation * dir), &jaw).unwrap();
        prop_assert_eq!(a.cells.len(), b.cells.len());
        for (ca, cb) in a.cells.iter().zip(&b.cells) {
            prop_assert!((g * ca.centroid - cb.centroid).norm() < 1e-9);
            prop_assert!((g.rotation * ca.normal - cb.normal).norm() < 1e-9);
            prop_assert!((ca.area - cb.area).abs() < 1e-9 * ca.area.max(1e-12));
            prop_assert!((ca.unit_pressure - cb.unit_pressure).abs() < 1e-9 * ca.unit_pressure.max(1.0));
        }
        prop_assert!((g * a.center_of_pressure() - b.center_of_pressure()).norm() < 1e-9);
    }

    #[test]
    fn sampled_candidates_are_antipodal_and_separated(which in 0usize..3, seed in any::<u64>()) {
        let mesh = [test_box(), test_cylinder(), test_sphere()][which].clone();
        let jaw = JawConfig::default();
        let cfg = SamplerConfig { surface_sample_count: 200, max_candidates: 15, min_pair_separation: 0.004, rng_seed: seed };
        let cands = sample_candidates(&mesh, &jaw, &cfg);
        prop_assume!(cands.is_ok());
        let cands = cands.unwrap();
        prop_assert!(cands.len() <= 15);
        for (i, g) in cands.iter().enumerate() {
            // independent re-check from the stored contacts and surface normals
            let s = |p: Pt3| {
                let cp = mesh.closest_point(&p);
                SurfaceSample { point: p, normal: mesh.face_normal(cp.triangle), triangle_id: cp.triangle }
            };
            prop_assert!(is_antipodal(&s(g.contact1), &s(g.contact2), &jaw));
            prop_assert!((g.jaw1.rotation * Vec3::z() + g.jaw2.rotation * Vec3::z()).norm() < 1e-6);
            for h in &cands[i + 1..] {
                prop_assert!(candidate_distance(g, h) >= 0.004);
            }
        }
    }
}
