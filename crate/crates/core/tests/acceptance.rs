//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use minwork::cli::{cmd_plan, RunArgs};
use minwork::contact::{extract_patch, GraspCandidate, JawConfig};
use minwork::exec::Execution;
use minwork::geometry::{frame_from_axis, Pt3, Vec3};
use minwork::limitsurface::{friction_wrench, LimitSurfaceParams, Twist};
use minwork::mesh::shapes::cylinder;
use minwork::mesh::{write_obj, TriMesh};
use minwork::metrics::{
    aggregate, balanced_accuracy, evaluate_grasp, model_grasp, rank_descending, threshold_sweep,
    EvalOptions, Normalizers, PerturbationSpec, SampleResult, SampleStatus, Task, TaskKind,
};
use minwork::optimizer::{check_reliability, min_force, verify_solution};
use minwork::rng::seeded;
use minwork::stiffness::{StiffnessMap, DEFAULT_RIGID_STIFFNESS};
use rand::Rng;

use common::*;

const ORACLE_REL_TOL: f64 = 0.05;
const TORSION_REL_TOL: f64 = 0.02;
const CONTAINMENT_TOL: f64 = 1e-4;
const HOMOGENEITY_REL_TOL: f64 = 1e-6;
const EVAL_BUDGET: Duration = Duration::from_secs(1);
const PLAN_BUDGET: Duration = Duration::from_secs(120);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sequential() -> EvalOptions {
    EvalOptions {
        execution: Execution::Sequential,
        ..Default::default()
    }
}

fn criterion_1() -> Outcome {
    let mesh = test_box();
    let grasp = box_grasp(point_jaw(0.5));
    let task = Task::default();
    let start = Instant::now();
    let model = model_grasp(&mesh, &grasp, &LimitSurfaceParams::default(), 0)
        .unwrap()
        .expect("contact");
    let t = task.wrenches_about(&mesh.center_of_mass(), &model.frame_origin)[0];
    let sol = min_force(&model.system, &t).unwrap();
    let elapsed = start.elapsed();
    let oracle = task.mass * task.gravity / 0.5;
    let err = (sol.objective - oracle) / oracle;
    let verified = sol.feasible && verify_solution(&model.system, &sol, 1e-6).is_ok();

    // with vanishing friction the lift needs ~mg/μ of squeeze, far beyond any jaw limit
    let slick = box_grasp(point_jaw(1e-6));
    let m0 = model_grasp(&mesh, &slick, &LimitSurfaceParams::default(), 0)
        .unwrap()
        .expect("contact");
    let t0 = task.wrenches_about(&mesh.center_of_mass(), &m0.frame_origin)[0];
    let slick_holds = check_reliability(&m0.system, &t0, grasp.jaw.max_force).unwrap();

    outcome(
        verified && err.abs() <= ORACLE_REL_TOL && elapsed < EVAL_BUDGET && !slick_holds,
        format!(
            "analytic min-force oracle: sum F = {:.3} N vs mg/mu = {oracle:.2} N ({:+.2}%, tol {:.0}%), {:.0} ms; mu=1e-6 reliable under F_max: {slick_holds}",
            sol.objective,
            100.0 * err,
            100.0 * ORACLE_REL_TOL,
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

fn criterion_2() -> Outcome {
    let r = 0.01;
    let mu = 0.5;
    let mesh = cylinder(r, 0.02, 256);
    let oracle = 2.0 / 3.0 * mu * r;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for grid in [32, 64] {
        let jaw = JawConfig {
            pad_width: 2.4 * r,
            pad_height: 2.4 * r,
            grid_resolution: grid,
            ..JawConfig::default()
        };
        let down = -Vec3::z();
        let pad = frame_from_axis(&Pt3::new(0.0, 0.0, 0.03), &down);
        let patch = extract_patch(&mesh, &pad, &down, &jaw).unwrap();
        let rho = 1.0;
        let w = friction_wrench(
            &patch,
            mu,
            &Twist {
                linear: Vec3::zeros(),
                angular: Vec3::z(),
            },
            rho,
        );
        let torque = w.torque().norm() * rho;
        let err = (torque - oracle) / oracle;
        worst = worst.max(err.abs());
        parts.push(format!(
            "grid {grid}: {:.4e} N m ({:+.2}%)",
            torque,
            100.0 * err
        ));
    }
    outcome(
        worst <= TORSION_REL_TOL,
        format!(
            "pure torsion vs (2/3) mu r = {oracle:.4e} N m: {} (tol {:.0}%)",
            parts.join(", "),
            100.0 * TORSION_REL_TOL
        ),
    )
}

fn criterion_3() -> Outcome {
    let meshes = [test_box(), test_cylinder(), test_sphere()];
    let mut rng = seeded(3);
    let mut cases = 0;
    let mut fits = 0;
    let mut samples = 0usize;
    let mut worst: f64 = 0.0;
    let mut attempts = 0;
    while cases < 50 {
        attempts += 1;
        assert!(attempts < 500, "could not build 50 contact cases");
        let mesh = &meshes[cases % meshes.len()];
        let jaw = JawConfig {
            friction_coefficient: rng.gen_range(0.2..1.2),
            ..JawConfig::default()
        };
        let cands = candidates(mesh, &jaw, 10, rng.gen());
        let grasp = cands[rng.gen_range(0..cands.len())];
        let delta = PerturbationSpec {
            rng_seed: rng.gen(),
            ..Default::default()
        }
        .delta(0);
        let Some(model) = model_grasp(
            mesh,
            &grasp.perturbed(&delta),
            &LimitSurfaceParams::default(),
            rng.gen(),
        )
        .unwrap() else {
            continue;
        };
        cases += 1;
        for s in &model.surfaces {
            fits += 1;
            for f in &s.samples {
                samples += 1;
                worst = worst.max(s.ellipsoid.quad_form(f.as_vector()));
            }
        }
    }
    outcome(
        worst <= 1.0 + CONTAINMENT_TOL,
        format!("MVEE containment: {cases} cases, {fits} fits, {samples} samples, max f'Af = 1 + {:.2e} (tol {CONTAINMENT_TOL:e})", worst - 1.0),
    )
}

fn criterion_4() -> Outcome {
    let meshes = [test_box(), test_cylinder(), test_sphere()];
    let mut rng = seeded(4);
    let mut systems = 0;
    let mut worst: f64 = 0.0;
    let mut attempts = 0;
    while systems < 20 {
        attempts += 1;
        assert!(attempts < 400, "could not build 20 feasible systems");
        let mesh = &meshes[attempts % meshes.len()];
        let cands = candidates(mesh, &JawConfig::default(), 10, rng.gen());
        let grasp = cands[rng.gen_range(0..cands.len())];
        let Some(model) =
            model_grasp(mesh, &grasp, &LimitSurfaceParams::default(), rng.gen()).unwrap()
        else {
            continue;
        };
        let dir = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let force = dir.normalize() * rng.gen_range(2.0..10.0);
        let lever = Vec3::new(
            rng.gen_range(-0.02..0.02),
            rng.gen_range(-0.02..0.02),
            rng.gen_range(-0.02..0.02),
        );
        let t = minwork::limitsurface::Wrench::new(force, lever.cross(&force));
        let base = min_force(&model.system, &t).unwrap();
        if !base.feasible || base.objective <= 0.0 {
            continue;
        }
        systems += 1;
        for c in [0.5, 2.0, 10.0] {
            let scaled = min_force(&model.system, &(t * c)).unwrap();
            let rel = if scaled.feasible {
                (scaled.objective - c * base.objective).abs() / (c * base.objective)
            } else {
                f64::INFINITY
            };
            worst = worst.max(rel);
        }
    }
    outcome(
        worst <= HOMOGENEITY_REL_TOL,
        format!("LP homogeneity: {systems} systems x c in {{0.5, 2, 10}}, max relative deviation {worst:.2e} (tol {HOMOGENEITY_REL_TOL:e})"),
    )
}

fn criterion_5() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, mesh) in [("box", test_box()), ("cylinder", test_cylinder())] {
        let jaw = JawConfig::default();
        let cands = candidates(&mesh, &jaw, 30, 5);
        let map = StiffnessMap::constant(mesh.clone(), DEFAULT_RIGID_STIFFNESS);
        let n = Normalizers::new(jaw.max_force, 1e-4, &map);
        let perturb = PerturbationSpec {
            k: 4,
            rng_seed: 5,
            ..Default::default()
        };
        let reports: Vec<_> = cands
            .iter()
            .map(|g| {
                evaluate_grasp(
                    &mesh,
                    &map,
                    g,
                    &Task::default(),
                    &perturb,
                    &n,
                    &sequential(),
                )
                .unwrap()
            })
            .collect();
        let qw: Vec<f64> = reports.iter().map(|r| r.q_w).collect();
        let qf: Vec<f64> = reports.iter().map(|r| r.q_f).collect();
        let same = rank_descending(&qw) == rank_descending(&qf);
        let gap = qw
            .iter()
            .zip(&qf)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        pass &= same && cands.len() >= 30;
        parts.push(format!(
            "{name}: {} candidates, argsort equal {same}, max |q_w - q_f| {gap:.1e}",
            cands.len()
        ));
    }
    outcome(
        pass,
        format!(
            "rigid limit: {} (ties quantized at 1e-12, broken by index)",
            parts.join("; ")
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = seeded(6);
    let meshes = [test_box(), test_cylinder()];
    let mut cases = 0;
    let mut failures = 0;
    let mut skipped = 0;
    let mut attempts = 0;
    while cases < 20 {
        attempts += 1;
        assert!(attempts < 400, "could not build 20 grasps with q_w > 0");
        let mesh = &meshes[attempts % meshes.len()];
        let jaw = JawConfig::default();
        let cands = candidates(mesh, &jaw, 10, rng.gen());
        let grasp = cands[rng.gen_range(0..cands.len())];
        let s = rng.gen_range(500.0..5000.0);
        let stiff = StiffnessMap::constant(mesh.clone(), s);
        let soft = stiff.scaled(0.5);
        // one normalizer for both maps so only W changes
        let n = Normalizers::new(jaw.max_force, 1e-4, &soft);
        let task = Task {
            mass: 0.5,
            ..Task::default()
        };
        let perturb = PerturbationSpec {
            k: 2,
            rng_seed: rng.gen(),
            ..Default::default()
        };
        let a = evaluate_grasp(mesh, &stiff, &grasp, &task, &perturb, &n, &sequential()).unwrap();
        // q_w already at its floor of 0 cannot decrease
        if a.q_w <= 0.0 {
            skipped += 1;
            continue;
        }
        let b = evaluate_grasp(mesh, &soft, &grasp, &task, &perturb, &n, &sequential()).unwrap();
        cases += 1;
        let work_up = a
            .samples
            .iter()
            .zip(&b.samples)
            .filter(|(x, _)| x.status == SampleStatus::Feasible && x.force > 0.0)
            .all(|(x, y)| y.work > x.work);
        if !(work_up && b.q_w < a.q_w) {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!(
            "stiffness monotonicity: {cases} grasps with q_w > 0 ({skipped} at q_w = 0 skipped), {failures} without strictly larger W and smaller q_w after halving s"
        ),
    )
}

fn criterion_7() -> Outcome {
    // stored breakdown, K = 4, two poses; dyadic values keep the arithmetic exact
    let n = Normalizers {
        f_max: 20.0,
        w_max: 1.0,
        epsilon: 1e-4,
    };
    let rows: [(usize, usize, bool, f64, f64); 8] = [
        (0, 0, true, 5.0, 0.25),
        (0, 1, true, 10.0, 0.5),
        (0, 2, false, 30.0, 1.5),
        (0, 3, true, 15.0, 0.125),
        (1, 0, true, 10.0, 0.25),
        (1, 1, false, 20.0, 1.0),
        (1, 2, false, 20.0, 1.0),
        (1, 3, true, 5.0, 0.75),
    ];
    let samples: Vec<SampleResult> = rows
        .iter()
        .map(|&(pose, k, reliable, force, work)| SampleResult {
            pose,
            perturbation: k,
            status: SampleStatus::Feasible,
            reliable,
            force,
            work,
        })
        .collect();
    // pose 0: q_r 3/4, q_f (0.75+0.5+0+0.25)/4, q_w (0.75+0.5+0+0.875)/4
    // pose 1: q_r 2/4, q_f (0.5+0+0+0.75)/4,   q_w (0.75+0+0+0.25)/4
    let expected = (0.5, 0.3125, 0.25);
    let (q, _) = aggregate(&samples, 2, &n);
    let stored_ok = (q.q_r, q.q_f, q.q_w) == expected;

    // recount a live evaluation from its own raw breakdown
    let mesh = test_box();
    let map = StiffnessMap::constant(mesh.clone(), 2000.0);
    let jaw = JawConfig::default();
    let norm = Normalizers::new(jaw.max_force, 1e-4, &map);
    let task = Task {
        kind: TaskKind::LiftRotate90,
        ..Task::default()
    };
    let perturb = PerturbationSpec {
        k: 4,
        rng_seed: 7,
        ..Default::default()
    };
    let report = evaluate_grasp(
        &mesh,
        &map,
        &box_grasp(jaw),
        &task,
        &perturb,
        &norm,
        &sequential(),
    )
    .unwrap();
    let mut hand = [f64::INFINITY; 3];
    for pose in 0..report.pose_count {
        let ps: Vec<&SampleResult> = report.samples.iter().filter(|s| s.pose == pose).collect();
        let k = ps.len() as f64;
        let r = ps
            .iter()
            .map(|s| if s.reliable { 1.0 } else { 0.0 })
            .sum::<f64>()
            / k;
        let f = ps
            .iter()
            .map(|s| (1.0 - s.force / norm.f_max).max(0.0))
            .sum::<f64>()
            / k;
        let w = ps
            .iter()
            .map(|s| (1.0 - s.work / norm.w_max).max(0.0))
            .sum::<f64>()
            / k;
        hand = [hand[0].min(r), hand[1].min(f), hand[2].min(w)];
    }
    let live_ok = hand == [report.q_r, report.q_f, report.q_w] && report.samples.len() == 12;
    outcome(
        stored_ok && live_ok,
        format!(
            "aggregation: stored K=4 x 2 poses gives ({}, {}, {}) expected {expected:?}; live K=4 x 3 poses recount exact: {live_ok}",
            q.q_r, q.q_f, q.q_w
        ),
    )
}

fn criterion_8() -> Outcome {
    let ba = balanced_accuracy(&[true, false, false, false], &[true, true, false, false]).unwrap();
    let mut rng = seeded(8);
    let values: Vec<f64> = (0..200).map(|_| rng.gen::<f64>()).collect();
    let labels: Vec<bool> = values.iter().map(|&v| v > 0.37).collect();
    let (threshold, best) = threshold_sweep(&values, &labels).unwrap();
    outcome(
        ba == 0.75 && best == 1.0,
        format!("balanced accuracy: example {ba}, self-consistent sweep {best} at threshold {threshold:.4}"),
    )
}

fn plan_config(dir: &Path, candidates: usize, k: usize) -> RunArgs {
    let mesh_path = dir.join("box.obj");
    write_obj(&test_box(), &mesh_path).unwrap();
    let config = serde_json::json!({
        "mesh": "box.obj",
        "constant_stiffness": 2000.0,
        "sampler": { "max_candidates": candidates },
        "perturbation": { "k": k },
        "out": "out",
        "rng_seed": 9,
    });
    let config_path = dir.join("config.json");
    std::fs::write(&config_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    RunArgs {
        config: Some(config_path),
        ..Default::default()
    }
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let args = plan_config(dir.path(), 12, 4);
    let ranking = dir.path().join("out").join("ranking.json");
    cmd_plan(&args).unwrap();
    let first = std::fs::read(&ranking).unwrap();
    std::fs::remove_file(&ranking).unwrap();
    cmd_plan(&RunArgs {
        jobs: Some(1),
        ..args
    })
    .unwrap();
    let second = std::fs::read(&ranking).unwrap();
    // the config echo differs in `jobs` only, so compare everything else
    let strip = |bytes: &[u8]| {
        let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
        v["config"]["jobs"] = serde_json::Value::Null;
        v
    };
    let same = strip(&first) == strip(&second);
    outcome(
        same,
        format!("determinism: two plan runs (parallel and --jobs 1), ranking.json content identical: {same} ({} bytes)", first.len()),
    )
}

fn criterion_10() -> Outcome {
    let mesh: Arc<TriMesh> = test_box();
    let map = StiffnessMap::constant(mesh.clone(), 2000.0);
    let jaw = JawConfig::default();
    let n = Normalizers::new(jaw.max_force, 1e-4, &map);
    let grasp: GraspCandidate = box_grasp(jaw);
    let start = Instant::now();
    let report = evaluate_grasp(
        &mesh,
        &map,
        &grasp,
        &Task::default(),
        &PerturbationSpec::default(),
        &n,
        &sequential(),
    )
    .unwrap();
    let eval = start.elapsed();

    let dir = tempfile::tempdir().unwrap();
    let args = RunArgs {
        jobs: Some(1),
        ..plan_config(dir.path(), 100, 20)
    };
    let start = Instant::now();
    let ranking = cmd_plan(&args).unwrap();
    let plan = start.elapsed();
    outcome(
        report.samples.len() == 20 && eval < EVAL_BUDGET && ranking.grasps.len() == 100 && plan < PLAN_BUDGET,
        format!(
            "performance (single thread): evaluate_grasp K=20 M=100 grid 16x16 in {:.0} ms (budget {} ms); {}-candidate plan in {:.1} s (budget {} s)",
            eval.as_secs_f64() * 1e3,
            EVAL_BUDGET.as_millis(),
            ranking.grasps.len(),
            plan.as_secs_f64(),
            PLAN_BUDGET.as_secs()
        ),
    )
}

fn main() {
    let criteria: [fn() -> Outcome; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(c)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {:>2}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
