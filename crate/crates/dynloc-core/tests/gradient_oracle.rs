//! Finite-difference oracles for the discrete action derivatives.
//!
//! The Euler–Lagrange residual and the Newton Hessian blocks are checked
//! against central differences of the action itself, on random paths, for
//! every potential kind and for the conformal (Jacobi) mass form. These
//! checks are independent of the derivative code paths: they only call
//! `action()`.
#![allow(clippy::needless_range_loop)]

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use dynloc_core::action::{ActionSpec, EdgeStiffness, End, Path, Potential};
use dynloc_core::field::FieldConfig;
use dynloc_core::mesh::Mesh;
use dynloc_core::metric::{ConformalWeight, SuperMetric};
use dynloc_core::region::{RegionDecomposition, Side};

const FD_STEP: f64 = 1e-5;
const REL_TOL: f64 = 1e-6;

fn random_path(mesh: &Arc<Mesh>, steps: usize, total_time: f64, rng: &mut StdRng) -> Path {
    let slices = (0..=steps)
        .map(|_| {
            let values = (0..mesh.n_sites())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            FieldConfig::new(mesh.clone(), values).unwrap()
        })
        .collect();
    Path::new(slices, total_time).unwrap()
}

/// Central finite difference of the action with respect to one value.
fn fd_action_derivative(spec: &ActionSpec, path: &Path, k: usize, x: usize) -> f64 {
    let mut plus = path.clone();
    plus.slice_mut(k).set(x, path.slice(k).value(x) + FD_STEP);
    let mut minus = path.clone();
    minus.slice_mut(k).set(x, path.slice(k).value(x) - FD_STEP);
    (spec.action(&plus).unwrap() - spec.action(&minus).unwrap()) / (2.0 * FD_STEP)
}

fn check_gradients(spec: &ActionSpec, path: &Path) {
    let res = spec.eom_residual(path).unwrap();
    let mesh = spec.mesh();
    let scale: f64 = res
        .slices()
        .iter()
        .flat_map(|s| s.values().iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-3);
    for k in 1..path.n_steps() {
        for x in 0..mesh.n_sites() {
            if mesh.is_dirichlet(x) {
                continue;
            }
            let fd = fd_action_derivative(spec, path, k, x);
            let an = res.slice(k).value(x);
            assert!(
                (fd - an).abs() <= REL_TOL * scale.max(fd.abs()),
                "slice {k} site {x}: analytic {an}, fd {fd}"
            );
        }
    }
    // Endpoint gradients feed the on-shell momenta and the Van Vleck
    // finite-difference route; check them the same way.
    for (end, k) in [(End::Initial, 0), (End::Final, path.n_steps())] {
        let g = spec.endpoint_gradient(path, end).unwrap();
        for x in 0..mesh.n_sites() {
            if mesh.is_dirichlet(x) {
                continue;
            }
            let fd = fd_action_derivative(spec, path, k, x);
            assert!(
                (fd - g[x]).abs() <= REL_TOL * scale.max(fd.abs()),
                "endpoint {k} site {x}: analytic {}, fd {fd}",
                g[x]
            );
        }
    }
}

fn check_hessian_blocks(spec: &ActionSpec, path: &Path) {
    let mesh = spec.mesh();
    let free = mesh.free_sites();
    let h = FD_STEP;
    let grad_of = |p: &Path, k: usize| -> Vec<f64> {
        let r = spec.eom_residual(p).unwrap();
        free.iter().map(|&x| r.slice(k).value(x)).collect()
    };
    for k in 1..path.n_steps() {
        let diag = spec_hessian_diag(spec, path, k);
        let mut fd = DMatrix::zeros(free.len(), free.len());
        for (col, &y) in free.iter().enumerate() {
            let mut plus = path.clone();
            plus.slice_mut(k).set(y, path.slice(k).value(y) + h);
            let mut minus = path.clone();
            minus.slice_mut(k).set(y, path.slice(k).value(y) - h);
            let gp = grad_of(&plus, k);
            let gm = grad_of(&minus, k);
            for row in 0..free.len() {
                fd[(row, col)] = (gp[row] - gm[row]) / (2.0 * h);
            }
        }
        let scale = diag.amax().max(1.0);
        assert!(
            (&diag - &fd).amax() <= 1e-5 * scale,
            "diag block {k}: max dev {}",
            (&diag - &fd).amax()
        );
        if k + 1 < path.n_steps() {
            let off = spec_hessian_off(spec, path, k);
            let mut fd = DMatrix::zeros(free.len(), free.len());
            for (col, &y) in free.iter().enumerate() {
                let mut plus = path.clone();
                plus.slice_mut(k + 1).set(y, path.slice(k + 1).value(y) + h);
                let mut minus = path.clone();
                minus
                    .slice_mut(k + 1)
                    .set(y, path.slice(k + 1).value(y) - h);
                let gp = grad_of(&plus, k);
                let gm = grad_of(&minus, k);
                for row in 0..free.len() {
                    fd[(row, col)] = (gp[row] - gm[row]) / (2.0 * h);
                }
            }
            let scale = off.amax().max(1.0);
            assert!(
                (&off - &fd).amax() <= 1e-5 * scale,
                "off block {k}: max dev {}",
                (&off - &fd).amax()
            );
        }
    }
}

// The Hessian blocks are crate-internal; the solver exposes them for
// testing through `dynloc_core::solve::hessian_blocks_for_test`.
fn spec_hessian_diag(spec: &ActionSpec, path: &Path, k: usize) -> DMatrix<f64> {
    dynloc_core::solve::hessian_blocks_for_test(spec, path, k).0
}

fn spec_hessian_off(spec: &ActionSpec, path: &Path, k: usize) -> DMatrix<f64> {
    dynloc_core::solve::hessian_blocks_for_test(spec, path, k).1
}

#[test]
fn edge_quadratic_gradients_match_fd() {
    let mut rng = StdRng::seed_from_u64(7);
    let mesh = Arc::new(Mesh::circle(10, 2.0 * std::f64::consts::PI).unwrap());
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::EdgeQuadratic(EdgeStiffness::uniform(&mesh, 1.0)),
        6,
        0.9,
    )
    .unwrap();
    let path = random_path(&mesh, 6, 0.9, &mut rng);
    check_gradients(&spec, &path);
    check_hessian_blocks(&spec, &path);
}

#[test]
fn site_poly_gradients_match_fd() {
    let mut rng = StdRng::seed_from_u64(11);
    let mesh = Arc::new(Mesh::degrees_of_freedom(3).unwrap());
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::SitePoly {
            quadratic: vec![1.0, 4.0, 2.5],
            quartic: vec![0.3, 0.0, 1.2],
        },
        5,
        1.1,
    )
    .unwrap();
    let path = random_path(&mesh, 5, 1.1, &mut rng);
    check_gradients(&spec, &path);
    check_hessian_blocks(&spec, &path);
}

#[test]
fn nonlocal_with_source_gradients_match_fd() {
    let mut rng = StdRng::seed_from_u64(13);
    let mesh = Arc::new(Mesh::circle(8, 2.0 * std::f64::consts::PI).unwrap());
    let kernel = Potential::inverse_laplacian_kernel(&mesh);
    let source = (0..8).map(|x| if x >= 5 { 1.0 } else { 0.0 }).collect();
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::Nonlocal(kernel),
        5,
        0.8,
    )
    .unwrap()
    .with_source(source)
    .unwrap();
    let path = random_path(&mesh, 5, 0.8, &mut rng);
    check_gradients(&spec, &path);
    check_hessian_blocks(&spec, &path);
}

#[test]
fn intrinsic_spec_gradients_match_fd_with_dirichlet_sites() {
    let mut rng = StdRng::seed_from_u64(17);
    let mesh = Arc::new(Mesh::circle(12, 2.0 * std::f64::consts::PI).unwrap());
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::EdgeQuadratic(EdgeStiffness::uniform(&mesh, 1.0)),
        6,
        1.0,
    )
    .unwrap();
    let dec = RegionDecomposition::decompose(mesh, |p| p[0] < std::f64::consts::PI).unwrap();
    let intrinsic = spec.intrinsic(&dec, Side::O).unwrap();
    let sub = dec.subregion(Side::O).mesh().clone();
    let path = random_path(&sub, 6, 1.0, &mut rng);
    check_gradients(&intrinsic, &path);
    check_hessian_blocks(&intrinsic, &path);
}

#[test]
fn jacobi_mass_gradients_match_fd() {
    // Geodesic energy functional of h = 2(E − V) g over a 2-dof
    // anisotropic oscillator, with E high enough that random paths in
    // [-1, 1]² stay classically allowed.
    let mut rng = StdRng::seed_from_u64(23);
    let mesh = Arc::new(Mesh::degrees_of_freedom(2).unwrap());
    let system = Arc::new(
        ActionSpec::new(
            mesh.clone(),
            SuperMetric::FlatL2,
            Potential::site_quadratic(vec![1.0, 4.0]),
            6,
            1.0,
        )
        .unwrap(),
    );
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::Conformal(ConformalWeight::Jacobi {
            energy: 10.0,
            system,
        }),
        Potential::None,
        6,
        1.0,
    )
    .unwrap();
    let path = random_path(&mesh, 6, 1.0, &mut rng);
    check_gradients(&spec, &path);
    check_hessian_blocks(&spec, &path);
}
