//! Solver and discretization oracles: the extremal solver against a
//! dense linear solve assembled independently, second-order convergence
//! of on-shell quantities in dt, and O(dt²) energy drift.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use dynloc_core::action::{ActionSpec, EdgeStiffness, Path, Potential};
use dynloc_core::field::FieldConfig;
use dynloc_core::mesh::Mesh;
use dynloc_core::metric::SuperMetric;
use dynloc_core::solve::solve;

/// Assemble the full interior Euler–Lagrange system of a quadratic spec
/// by probing the residual map — it is affine, so unit probes recover
/// the matrix exactly. Completely independent of the block-tridiagonal
/// machinery.
fn dense_extremal(
    spec: &ActionSpec,
    phi_i: &FieldConfig,
    phi_f: &FieldConfig,
    steps: usize,
    total_time: f64,
) -> Path {
    let mesh = spec.mesh().clone();
    let free = mesh.free_sites();
    let m = free.len();
    let unknowns = m * (steps - 1);
    let base = Path::linear(phi_i, phi_f, steps, total_time).unwrap();

    let residual_of = |path: &Path| -> DVector<f64> {
        let r = spec.eom_residual(path).unwrap();
        let mut out = DVector::zeros(unknowns);
        for k in 1..steps {
            for (i, &x) in free.iter().enumerate() {
                out[(k - 1) * m + i] = r.slice(k).value(x);
            }
        }
        out
    };
    let with_offset = |idx: usize, delta: f64| -> Path {
        let mut p = base.clone();
        let k = idx / m + 1;
        let x = free[idx % m];
        let v = p.slice(k).value(x) + delta;
        p.slice_mut(k).set(x, v);
        p
    };

    let b = residual_of(&base);
    let mut a = DMatrix::zeros(unknowns, unknowns);
    for j in 0..unknowns {
        let col = residual_of(&with_offset(j, 1.0)) - &b;
        a.set_column(j, &col);
    }
    let correction = a.lu().solve(&(-b)).expect("dense system solvable");
    let mut out = base;
    for k in 1..steps {
        for (i, &x) in free.iter().enumerate() {
            let v = out.slice(k).value(x) + correction[(k - 1) * m + i];
            out.slice_mut(k).set(x, v);
        }
    }
    out
}

#[test]
fn newton_matches_dense_solve_on_quadratic_field() {
    let mesh = Arc::new(Mesh::circle(12, 2.0 * PI).unwrap());
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::EdgeQuadratic(EdgeStiffness::uniform(&mesh, 1.0)),
        10,
        0.8,
    )
    .unwrap();
    let a = FieldConfig::from_fn(mesh.clone(), |_, p| 0.5 * p[0].sin());
    let b = FieldConfig::from_fn(mesh, |_, p| 0.3 * (2.0 * p[0]).cos());
    let guess = Path::linear(&a, &b, 10, 0.8).unwrap();
    let ex = solve(&spec, &a, &b, &guess, 1e-12).unwrap();
    let dense = dense_extremal(&spec, &a, &b, 10, 0.8);
    let scale = dense
        .slices()
        .iter()
        .flat_map(|s| s.values())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for k in 0..=10 {
        for x in 0..12 {
            let d = (ex.path.slice(k).value(x) - dense.slice(k).value(x)).abs();
            assert!(
                d <= 1e-10 * scale.max(1.0),
                "slice {k} site {x}: deviation {d}"
            );
        }
    }
}

#[test]
fn newton_matches_dense_solve_with_nonlocal_source() {
    let mesh = Arc::new(Mesh::circle(8, 2.0 * PI).unwrap());
    let kernel = Potential::inverse_laplacian_kernel(&mesh);
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::Nonlocal(kernel),
        8,
        1.5,
    )
    .unwrap()
    .with_source((0..8).map(|x| if x >= 5 { 1.0 } else { 0.0 }).collect())
    .unwrap();
    let z = FieldConfig::zeros(mesh);
    let guess = Path::linear(&z, &z, 8, 1.5).unwrap();
    let ex = solve(&spec, &z, &z, &guess, 1e-12).unwrap();
    let dense = dense_extremal(&spec, &z, &z, 8, 1.5);
    for k in 0..=8 {
        for x in 0..8 {
            let d = (ex.path.slice(k).value(x) - dense.slice(k).value(x)).abs();
            assert!(d <= 1e-10, "slice {k} site {x}: deviation {d}");
        }
    }
}

fn oscillator_action_error(steps: usize) -> f64 {
    let mesh = Arc::new(Mesh::degrees_of_freedom(1).unwrap());
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::site_quadratic(vec![1.0]),
        steps,
        1.0,
    )
    .unwrap();
    let a = FieldConfig::constant(mesh.clone(), 0.0);
    let b = FieldConfig::constant(mesh, 1.0);
    let guess = Path::linear(&a, &b, steps, 1.0).unwrap();
    let ex = solve(&spec, &a, &b, &guess, 1e-13).unwrap();
    let exact = 1.0f64.cos() / (2.0 * 1.0f64.sin());
    (ex.on_shell_action - exact).abs()
}

#[test]
fn on_shell_action_converges_at_second_order() {
    let errs: Vec<f64> = [25, 50, 100, 200]
        .iter()
        .map(|&k| oscillator_action_error(k))
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(
            (order - 2.0).abs() < 0.2,
            "observed order {order} from errors {w:?}"
        );
    }
}

fn wave_action_error(steps: usize) -> f64 {
    // Quadratic field fixture: compare against a fine-grid reference.
    let mesh = Arc::new(Mesh::circle(16, 2.0 * PI).unwrap());
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::EdgeQuadratic(EdgeStiffness::uniform(&mesh, 1.0)),
        steps,
        1.0,
    )
    .unwrap();
    let a = FieldConfig::from_fn(mesh.clone(), |_, p| p[0].sin());
    let b = FieldConfig::zeros(mesh.clone());
    let guess = Path::linear(&a, &b, steps, 1.0).unwrap();
    let ex = solve(&spec, &a, &b, &guess, 1e-13).unwrap();
    // Reference: 1024-step solve.
    let fine_spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::EdgeQuadratic(EdgeStiffness::uniform(&mesh, 1.0)),
        1024,
        1.0,
    )
    .unwrap();
    let fine_guess = Path::linear(&a, &b, 1024, 1.0).unwrap();
    let fine = solve(&fine_spec, &a, &b, &fine_guess, 1e-13).unwrap();
    (ex.on_shell_action - fine.on_shell_action).abs()
}

#[test]
fn field_action_converges_at_second_order() {
    let errs: Vec<f64> = [16, 32, 64].iter().map(|&k| wave_action_error(k)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(
            (order - 2.0).abs() < 0.25,
            "observed order {order} from errors {errs:?}"
        );
    }
}

fn oscillator_energy_drift(steps: usize) -> f64 {
    let mesh = Arc::new(Mesh::degrees_of_freedom(1).unwrap());
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::site_quadratic(vec![1.0]),
        steps,
        1.0,
    )
    .unwrap();
    let a = FieldConfig::constant(mesh.clone(), 0.2);
    let b = FieldConfig::constant(mesh, 1.0);
    let guess = Path::linear(&a, &b, steps, 1.0).unwrap();
    let ex = solve(&spec, &a, &b, &guess, 1e-13).unwrap();
    let profile = spec.energy_profile(&ex.path).unwrap();
    let max = profile.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = profile.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

#[test]
fn energy_drift_scales_as_dt_squared() {
    let drifts: Vec<f64> = [32, 64, 128, 256]
        .iter()
        .map(|&k| oscillator_energy_drift(k))
        .collect();
    for w in drifts.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(
            (order - 2.0).abs() < 0.3,
            "observed order {order} from drifts {drifts:?}"
        );
    }
}
