//! Maupertuis equivalence on the 2-D anisotropic oscillator: the image
//! of the Jacobi geodesic must coincide with the action extremal when the
//! metric carries the extremal's own on-shell energy, and must visibly
//! deviate under a wrong energy.

use std::sync::Arc;

use dynloc_core::action::{ActionSpec, Path, Potential};
use dynloc_core::field::FieldConfig;
use dynloc_core::jacobi::{verify_equivalence, JacobiMetric};
use dynloc_core::mesh::Mesh;
use dynloc_core::metric::SuperMetric;
use dynloc_core::solve::solve;

fn anisotropic_fixture(steps: usize) -> (ActionSpec, dynloc_core::solve::ExtremalPath) {
    let mesh = Arc::new(Mesh::degrees_of_freedom(2).unwrap());
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::site_quadratic(vec![1.0, 4.0]),
        steps,
        1.0,
    )
    .unwrap();
    let a = FieldConfig::new(mesh.clone(), vec![1.0, 0.0]).unwrap();
    let b = FieldConfig::new(mesh, vec![0.0, 1.0]).unwrap();
    let guess = Path::linear(&a, &b, steps, 1.0).unwrap();
    let ex = solve(&spec, &a, &b, &guess, 1e-11).unwrap();
    (spec, ex)
}

#[test]
fn geodesic_matches_extremal_at_on_shell_energy() {
    let (spec, ex) = anisotropic_fixture(400);
    let energy = spec.on_shell_energy(&ex.path).unwrap();
    let metric = JacobiMetric::build(&spec, energy);
    let report = verify_equivalence(&spec, &ex, &metric, 1e-3).unwrap();
    assert!(
        report.pass,
        "deviation {} at on-shell energy {energy}",
        report.max_deviation
    );
}

#[test]
fn wrong_energy_breaks_the_equivalence() {
    let (spec, ex) = anisotropic_fixture(400);
    let energy = spec.on_shell_energy(&ex.path).unwrap();
    let metric = JacobiMetric::build(&spec, energy + 0.5);
    let report = verify_equivalence(&spec, &ex, &metric, 1e-3).unwrap();
    assert!(
        report.max_deviation > 1e-2,
        "wrong-energy deviation only {}",
        report.max_deviation
    );
}

#[test]
fn equivalence_holds_at_ten_times_discretization_error() {
    // Estimate the discretization error of the comparison by step
    // doubling each side independently: the image self-convergence of
    // the extremal plus that of the geodesic bounds what the coarse
    // comparison can resolve. The equivalence must hold within 10x that.
    let (spec, ex) = anisotropic_fixture(200);
    let (_, ex_fine) = anisotropic_fixture(400);
    let energy = spec.on_shell_energy(&ex.path).unwrap();
    let metric = JacobiMetric::build(&spec, energy);
    let report = verify_equivalence(&spec, &ex, &metric, 1.0).unwrap();
    let report_fine = verify_equivalence(&spec, &ex_fine, &metric, 1.0).unwrap();
    let est = dynloc_core::jacobi::image_deviation(&ex.path, &ex_fine.path).unwrap()
        + dynloc_core::jacobi::image_deviation(&report.geodesic.path, &report_fine.geodesic.path)
            .unwrap();
    let tol = (10.0 * est).max(1e-8);
    assert!(
        report.max_deviation < tol,
        "deviation {} vs 10x discretization error {tol}",
        report.max_deviation
    );
}
