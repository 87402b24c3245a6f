//! End-to-end tests of the `dynloc` binary: exit codes, registry
//! listing, config handling, and artifact emission.

use std::path::Path;
use std::process::Command;

fn dynloc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dynloc"))
}

fn write(path: &Path, body: &str) {
    std::fs::write(path, body).expect("writable temp file");
}

#[test]
fn list_prints_the_registry() {
    let out = dynloc().arg("--list").output().expect("binary runs");
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "annulus",
        "circle_wave_quarter",
        "nonlocal_source",
        "van_vleck_oracles",
        "jacobi_equivalence",
    ] {
        assert!(text.contains(name), "registry listing misses {name}");
    }
    // `run --list` prints the same registry.
    let out2 = dynloc()
        .args(["run", "--list"])
        .output()
        .expect("binary runs");
    assert!(out2.status.success());
    assert_eq!(out.stdout, out2.stdout);
}

#[test]
fn run_annulus_config_happy_path() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = dir.path().join("annulus.toml");
    write(
        &cfg,
        "kind = \"annulus\"\n[annulus]\nn_r = 33\nn_theta = 128\n",
    );
    let out_dir = dir.path().join("out");
    let out = dynloc()
        .args([
            "run",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out_dir.join("annulus_result.json").exists());
    assert!(out_dir.join("annulus_field.csv").exists());
    assert!(out_dir.join("annulus_solution.svg").exists());
}

#[test]
fn unknown_key_exits_2_and_names_the_key() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = dir.path().join("bad.toml");
    write(
        &cfg,
        "kind = \"annulus\"\n[annulus]\nn_r = 33\nn_theta = 128\npotential_kind = \"warp\"\n",
    );
    let out = dynloc()
        .args(["run", cfg.to_str().unwrap()])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("potential_kind"), "stderr: {err}");
    assert!(err.contains("line"), "parse errors carry a location: {err}");
}

#[test]
fn unknown_potential_kind_exits_2() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = dir.path().join("bad.toml");
    write(
        &cfg,
        "kind = \"localization\"\n[localization]\npotential = \"warp_drive\"\n",
    );
    let out = dynloc()
        .args(["run", cfg.to_str().unwrap()])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("warp_drive") || err.contains("potential"),
        "stderr: {err}"
    );
}

#[test]
fn missing_kernel_file_exits_2() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = dir.path().join("k.toml");
    write(
        &cfg,
        "kind = \"localization\"\n[localization]\npotential = \"kernel_csv\"\nkernel_csv = \"nope.csv\"\n",
    );
    let out = dynloc()
        .args(["run", cfg.to_str().unwrap()])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn env_var_sets_the_output_directory() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = dir.path().join("wave.toml");
    write(
        &cfg,
        "kind = \"circle_wave\"\n[circle_wave]\nratio = [1, 4]\n",
    );
    let out_dir = dir.path().join("from-env");
    let out = dynloc()
        .args(["run", cfg.to_str().unwrap()])
        .env("DYNLOC_OUT", out_dir.to_str().unwrap())
        .output()
        .expect("runs");
    assert!(out.status.success());
    assert!(out_dir.join("circle_wave_1_4_result.json").exists());
}

#[test]
fn localization_config_round_trip() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = dir.path().join("loc.toml");
    write(
        &cfg,
        r#"kind = "localization"
name = "cut"
[localization]
n_sites = 32
arc_fraction = 0.25
time_steps = 24
total_time = 1.0
potential = "edge_quadratic"
cut_at_boundary = true
[localization.initial]
kind = "sine"
amplitude = 0.3
wavenumber = 4.0
[localization.final]
kind = "zero"
"#,
    );
    let out_dir = dir.path().join("out");
    let out = dynloc()
        .args([
            "run",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .expect("runs");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = std::fs::read_to_string(out_dir.join("locality_report.json")).expect("report");
    assert!(report.contains("\"verdict\": \"localized\""), "{report}");
}

#[test]
fn kernel_csv_potential_loads() {
    let dir = tempfile::tempdir().expect("tempdir");
    // 8-site identity-ish kernel (a site-diagonal quadratic coupling).
    let mut csv = String::new();
    for i in 0..8 {
        let row: Vec<String> = (0..8)
            .map(|j| {
                if i == j {
                    "1.0".to_string()
                } else {
                    "0.0".to_string()
                }
            })
            .collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    std::fs::write(dir.path().join("kernel.csv"), csv).expect("kernel file");
    let cfg = dir.path().join("loc.toml");
    write(
        &cfg,
        r#"kind = "localization"
[localization]
n_sites = 8
time_steps = 16
total_time = 0.5
potential = "kernel_csv"
kernel_csv = "kernel.csv"
epsilon = 1e-6
"#,
    );
    let out_dir = dir.path().join("out");
    let out = dynloc()
        .args([
            "run",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .expect("runs");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn empty_registry_reports_no_experiments() {
    // Build misconfiguration guard: verify_all on an empty registry is
    // an error, which the CLI maps to a nonzero exit.
    let dir = tempfile::tempdir().expect("tempdir");
    match dynloc_lab::registry::verify_all(&[], dir.path(), 1) {
        Err(err) => assert!(err.to_string().contains("no experiments")),
        Ok(_) => panic!("empty registry must be rejected"),
    }
}

#[test]
fn failing_experiment_is_reported_with_metric_values() {
    // Sabotage path: a registry entry whose tolerance cannot be met must
    // surface in the summary with its metric values, and verify_all must
    // report the failure.
    fn hopeless(
        _out: Option<&std::path::Path>,
    ) -> Result<dynloc_core::exemplars::ExperimentResult, dynloc_lab::LabError> {
        let mut metrics = std::collections::BTreeMap::new();
        metrics.insert(
            "impossible_residual".to_string(),
            dynloc_core::exemplars::Metric::upper(0.1, 1e-10),
        );
        Ok(dynloc_core::exemplars::ExperimentResult::from_metrics(
            "sabotaged",
            metrics,
        ))
    }
    let dir = tempfile::tempdir().expect("tempdir");
    let experiments = vec![dynloc_lab::registry::Experiment {
        name: "sabotaged",
        about: "deliberately failing entry",
        run: hopeless,
    }];
    let summary = dynloc_lab::registry::verify_all(&experiments, dir.path(), 1).expect("runs");
    assert!(!summary.all_pass);
    let body = std::fs::read_to_string(dir.path().join("summary.json")).expect("summary");
    assert!(body.contains("\"all_pass\": false"));
    assert!(body.contains("impossible_residual"));
    assert!(body.contains("0.1"));
}

#[test]
fn mesh_json_round_trips() {
    let mesh = dynloc_core::mesh::Mesh::annulus(5, 12, 1.0, 2.0).expect("mesh");
    let doc = dynloc_lab::report::MeshDoc::from_mesh(&mesh);
    let body = serde_json::to_string(&doc).expect("serializes");
    let back: dynloc_lab::report::MeshDoc = serde_json::from_str(&body).expect("parses");
    let rebuilt = back.into_mesh().expect("valid mesh");
    assert_eq!(rebuilt.n_sites(), mesh.n_sites());
    assert_eq!(rebuilt.weights(), mesh.weights());
    assert_eq!(rebuilt.edges(), mesh.edges());
    assert_eq!(rebuilt.dirichlet_sites(), mesh.dirichlet_sites());
}

#[test]
fn region_json_round_trips() {
    let mesh = std::sync::Arc::new(dynloc_core::mesh::Mesh::circle(16, 1.0).expect("mesh"));
    let dec = dynloc_core::region::RegionDecomposition::from_selected(mesh.clone(), &[2, 3, 4])
        .expect("decomposition");
    let doc = dynloc_lab::report::RegionDoc::from_decomposition(&dec);
    let body = serde_json::to_string(&doc).expect("serializes");
    let back: dynloc_lab::report::RegionDoc = serde_json::from_str(&body).expect("parses");
    let rebuilt = back.into_decomposition(mesh).expect("consistent");
    assert_eq!(rebuilt.interior_o(), dec.interior_o());
    assert_eq!(rebuilt.boundary(), dec.boundary());
}

#[test]
fn field_csv_round_trips() {
    let dir = tempfile::tempdir().expect("tempdir");
    let mesh = std::sync::Arc::new(dynloc_core::mesh::Mesh::circle(8, 1.0).expect("mesh"));
    let field = dynloc_core::field::FieldConfig::from_fn(mesh.clone(), |s, _| s as f64 * 0.5);
    let path = dir.path().join("field.csv");
    dynloc_lab::report::write_field_csv(&path, &field).expect("writes");
    let back = dynloc_lab::report::read_field_csv(&path, mesh).expect("reads");
    assert_eq!(back.values(), field.values());
}
