//! The verification suites behind `verify-all` and the acceptance tests:
//! every tolerance is pinned here, next to the computation it gates.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path as FsPath;
use std::sync::Arc;

use dynloc_core::action::{ActionSpec, EdgeStiffness, End, Path, Potential};
use dynloc_core::exemplars::{
    run_annulus, run_circle_wave, run_nonlocal_source, CircleWaveRatio, ExperimentResult, Metric,
};
use dynloc_core::field::FieldConfig;
use dynloc_core::jacobi::{verify_equivalence, JacobiMetric};
use dynloc_core::locality::{recommended_epsilon, test_localization, Verdict};
use dynloc_core::mesh::Mesh;
use dynloc_core::metric::SuperMetric;
use dynloc_core::modes::{eigenmodes, mode_sector_kernel, BoundaryKind};
use dynloc_core::region::RegionDecomposition;
use dynloc_core::semiclassical::{cluster_check, van_vleck, VanVleckMethod};
use dynloc_core::solve::{dof_config, on_shell_momentum, seeds, solve};

use crate::report::{self, write_json, LocalityDoc, ModeMatchDoc, ResultDoc};
use crate::svg;
use crate::LabError;

type CheckResult = Result<ExperimentResult, LabError>;

fn emit_result(
    out: Option<&FsPath>,
    mut result: ExperimentResult,
    extra_artifacts: Vec<String>,
) -> CheckResult {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        result.artifacts = extra_artifacts;
        let json_name = format!("{}_result.json", result.name);
        result.artifacts.push(json_name.clone());
        write_json(&dir.join(&json_name), &ResultDoc::from_result(&result))?;
    }
    Ok(result)
}

/// Annulus reproduction (separation-of-variables oracle).
pub fn check_annulus(out: Option<&FsPath>) -> CheckResult {
    let output = run_annulus(33, 128)?;
    let mut artifacts = Vec::new();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let mesh = &output.mesh;
        let field = FieldConfig::new(mesh.clone(), output.numeric.clone())?;
        report::write_field_csv(&dir.join("annulus_field.csv"), &field)?;
        artifacts.push("annulus_field.csv".into());
        let err: Vec<f64> = output
            .numeric
            .iter()
            .zip(&output.exact)
            .map(|(a, b)| a - b)
            .collect();
        svg::write_polar_heatmap(
            &dir.join("annulus_solution.svg"),
            "Laplace solution on the annulus",
            33,
            128,
            2.0,
            4.0,
            &output.numeric,
        )?;
        svg::write_polar_heatmap(
            &dir.join("annulus_error.svg"),
            "Error against separation of variables",
            33,
            128,
            2.0,
            4.0,
            &err,
        )?;
        artifacts.push("annulus_solution.svg".into());
        artifacts.push("annulus_error.svg".into());
        write_json(
            &dir.join("annulus_mesh.json"),
            &report::MeshDoc::from_mesh(mesh),
        )?;
        artifacts.push("annulus_mesh.json".into());
    }
    emit_result(out, output.result, artifacts)
}

/// S¹ commensurability at the quarter split (exact rational arithmetic).
pub fn check_circle_wave_quarter(out: Option<&FsPath>) -> CheckResult {
    let output = run_circle_wave(CircleWaveRatio::Rational(1, 4))?;
    let mut artifacts = Vec::new();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        if let Some(indep) = &output.independence {
            let o = ModeMatchDoc::from_report(&indep.o_report);
            let n = ModeMatchDoc::from_report(&indep.n_report);
            write_json(&dir.join("modes_o.json"), &o)?;
            write_json(&dir.join("modes_n.json"), &n)?;
            std::fs::write(
                dir.join("mode_table.txt"),
                format!("O side:\n{}\nN side:\n{}", o.table(), n.table()),
            )?;
            artifacts.extend([
                "modes_o.json".into(),
                "modes_n.json".into(),
                "mode_table.txt".into(),
            ]);
        }
        let mut csv = String::from("intrinsic_mode,residual\n");
        for (n, r) in &output.residuals {
            csv.push_str(&format!("{n},{r}\n"));
        }
        std::fs::write(dir.join("standing_wave_residuals.csv"), csv)?;
        artifacts.push("standing_wave_residuals.csv".into());
        let pts: Vec<(f64, f64)> = output
            .residuals
            .iter()
            .map(|(n, r)| (*n as f64, r.max(1e-18).log10()))
            .collect();
        svg::LinePlot::new("log10 standing-wave residual per intrinsic mode")
            .series("residual", pts)
            .write(&dir.join("standing_wave_residuals.svg"))?;
        artifacts.push("standing_wave_residuals.svg".into());
    }
    emit_result(out, output.result, artifacts)
}

/// The symbolically irrational ratio: only the constant field survives.
pub fn check_circle_wave_irrational(out: Option<&FsPath>) -> CheckResult {
    let output = run_circle_wave(CircleWaveRatio::Irrational)?;
    let mut artifacts = Vec::new();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        if let Some(report) = &output.irrational_report {
            write_json(
                &dir.join("modes_irrational.json"),
                &ModeMatchDoc::from_report(report),
            )?;
            artifacts.push("modes_irrational.json".into());
        }
    }
    emit_result(out, output.result, artifacts)
}

/// The ∇⁻² kernel with an exterior source.
pub fn check_nonlocal_source(out: Option<&FsPath>) -> CheckResult {
    let output = run_nonlocal_source(&[0.0, 0.5, 1.0])?;
    let mut artifacts = Vec::new();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let mut csv = String::from("amplitude,deviation,verdict\n");
        for (a, d, v) in &output.deviations {
            csv.push_str(&format!("{a},{d},{}\n", report::verdict_str(*v)));
        }
        std::fs::write(dir.join("nonlocal_deviation.csv"), csv)?;
        artifacts.push("nonlocal_deviation.csv".into());
        let pts: Vec<(f64, f64)> = output.deviations.iter().map(|(a, d, _)| (*a, *d)).collect();
        svg::LinePlot::new("condition (i) deviation vs source amplitude")
            .series("deviation", pts)
            .write(&dir.join("nonlocal_deviation.svg"))?;
        artifacts.push("nonlocal_deviation.svg".into());
    }
    emit_result(out, output.result, artifacts)
}

fn solved_oscillator(
    freq_sq: Vec<f64>,
    steps: usize,
    total_time: f64,
    x_i: &[f64],
    x_f: &[f64],
) -> Result<(ActionSpec, dynloc_core::solve::ExtremalPath), LabError> {
    let mesh = Arc::new(Mesh::degrees_of_freedom(freq_sq.len())?);
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        if freq_sq.iter().all(|f| *f == 0.0) {
            Potential::None
        } else {
            Potential::site_quadratic(freq_sq)
        },
        steps,
        total_time,
    )?;
    let a = dof_config(&mesh, x_i)?;
    let b = dof_config(&mesh, x_f)?;
    let guess = Path::linear(&a, &b, steps, total_time)?;
    let ex = solve(&spec, &a, &b, &guess, 1e-12)?;
    Ok((spec, ex))
}

/// Van Vleck determinants against closed forms, both routes.
pub fn check_van_vleck(out: Option<&FsPath>) -> CheckResult {
    let mut metrics = BTreeMap::new();

    // Free particle: Δ = m/T = 1.
    let (spec, ex) = solved_oscillator(vec![0.0], 100, 1.0, &[0.0], &[1.0])?;
    for (tag, method) in [
        ("fd", VanVleckMethod::FiniteDifference),
        ("schur", VanVleckMethod::HessianBlock),
    ] {
        let vv = van_vleck(&spec, &ex, method)?;
        metrics.insert(
            format!("free_det_err_{tag}"),
            Metric::upper((vv.determinant - 1.0).abs(), 1e-6),
        );
    }
    // Momentum oracle: p = mv = 1 at both ends.
    let pf = on_shell_momentum(&spec, &ex, End::Final)?;
    metrics.insert(
        "free_final_momentum_err".into(),
        Metric::upper((pf.value(0) - 1.0).abs(), 1e-10),
    );

    // Harmonic oscillator m = ω = T = 1: Δ = 1/sin(1).
    let (spec, ex) = solved_oscillator(vec![1.0], 400, 1.0, &[0.0], &[1.0])?;
    let expect = 1.0 / 1.0f64.sin();
    let mut dets = Vec::new();
    for (tag, method) in [
        ("fd", VanVleckMethod::FiniteDifference),
        ("schur", VanVleckMethod::HessianBlock),
    ] {
        let vv = van_vleck(&spec, &ex, method)?;
        dets.push(vv.determinant);
        metrics.insert(
            format!("oscillator_det_err_{tag}"),
            Metric::upper((vv.determinant - expect).abs(), 1e-4),
        );
    }
    metrics.insert(
        "oscillator_methods_rel_gap".into(),
        Metric::upper((dets[0] - dets[1]).abs() / dets[1].abs(), 1e-4),
    );

    // Method agreement across the non-caustic fixture family.
    let fixtures: Vec<(ActionSpec, dynloc_core::solve::ExtremalPath)> = vec![
        solved_oscillator(vec![0.0], 100, 0.7, &[0.2], &[-0.3])?,
        solved_oscillator(vec![2.5], 200, 0.8, &[0.3], &[-0.6])?,
        solved_oscillator(vec![1.0, 4.0], 200, 1.0, &[0.0, 0.2], &[1.0, -0.5])?,
    ];
    let mut worst_gap = 0.0f64;
    for (spec, ex) in &fixtures {
        let fd = van_vleck(spec, ex, VanVleckMethod::FiniteDifference)?;
        let hb = van_vleck(spec, ex, VanVleckMethod::HessianBlock)?;
        worst_gap = worst_gap.max((fd.determinant - hb.determinant).abs() / hb.determinant.abs());
    }
    metrics.insert(
        "fixtures_methods_rel_gap".into(),
        Metric::upper(worst_gap, 1e-4),
    );

    // Block-diagonal factorization at matched discretization: the joint
    // determinant of two uncoupled oscillators equals the product of the
    // per-oscillator determinants computed the same way.
    {
        let (spec2, ex2) = solved_oscillator(vec![1.0, 4.0], 200, 1.0, &[0.0, 0.2], &[1.0, -0.5])?;
        let joint = van_vleck(&spec2, &ex2, VanVleckMethod::HessianBlock)?;
        let (sa, ea) = solved_oscillator(vec![1.0], 200, 1.0, &[0.0], &[1.0])?;
        let (sb, eb) = solved_oscillator(vec![4.0], 200, 1.0, &[0.2], &[-0.5])?;
        let da = van_vleck(&sa, &ea, VanVleckMethod::HessianBlock)?.determinant;
        let db = van_vleck(&sb, &eb, VanVleckMethod::HessianBlock)?.determinant;
        let product = da * db;
        metrics.insert(
            "uncoupled_factorization_rel_err".into(),
            Metric::upper((joint.determinant - product).abs() / product.abs(), 1e-6),
        );
    }

    emit_result(
        out,
        ExperimentResult::from_metrics("van_vleck_oracles", metrics),
        Vec::new(),
    )
}

/// Cluster decomposition: decoupled, winding-sector, and Bell-style.
pub fn check_cluster(out: Option<&FsPath>) -> CheckResult {
    let mut metrics = BTreeMap::new();

    // Two exactly decoupled quadratic subsystems.
    {
        let mesh = Arc::new(Mesh::degrees_of_freedom(2)?);
        let spec = ActionSpec::new(
            mesh.clone(),
            SuperMetric::FlatL2,
            Potential::site_quadratic(vec![1.0, 4.0]),
            120,
            1.0,
        )?;
        let dec = RegionDecomposition::from_selected(mesh.clone(), &[0])?;
        let a = dof_config(&mesh, &[0.0, 0.3])?;
        let b = dof_config(&mesh, &[1.0, -0.4])?;
        let j = vec![Path::linear(&a, &b, 120, 1.0)?];
        let so = vec![Path::linear(
            &dec.project_o(&a)?,
            &dec.project_o(&b)?,
            120,
            1.0,
        )?];
        let sn = vec![Path::linear(
            &dec.project_n(&a)?,
            &dec.project_n(&b)?,
            120,
            1.0,
        )?];
        let r = cluster_check(&spec, &dec, &a, &b, &j, &so, &sn, 1.0)?;
        metrics.insert(
            "decoupled_defect".into(),
            Metric::upper(r.relative_defect.unwrap_or(f64::INFINITY), 1e-6),
        );
        metrics.insert(
            "decoupled_count_product".into(),
            Metric::holds(r.count_product_matches),
        );
    }

    // 3 x 2 winding sectors.
    {
        let mesh = Arc::new(Mesh::degrees_of_freedom(2)?);
        let spec = ActionSpec::new(mesh.clone(), SuperMetric::FlatL2, Potential::None, 60, 1.0)?;
        let dec = RegionDecomposition::from_selected(mesh.clone(), &[0])?;
        let a = dof_config(&mesh, &[0.0, 0.0])?;
        let b = dof_config(&mesh, &[PI / 2.0, PI / 3.0])?;
        let mut j = Vec::new();
        for wo in [-1i64, 0, 1] {
            for wn in [0i64, 1] {
                j.push(seeds::winding(&a, &b, 60, 1.0, &[wo, wn], 2.0 * PI)?);
            }
        }
        let (pa, pb) = (dec.project_o(&a)?, dec.project_o(&b)?);
        let so: Vec<Path> = [-1i64, 0, 1]
            .iter()
            .map(|&w| seeds::winding(&pa, &pb, 60, 1.0, &[w], 2.0 * PI))
            .collect::<Result<_, _>>()?;
        let (na, nb) = (dec.project_n(&a)?, dec.project_n(&b)?);
        let sn: Vec<Path> = [0i64, 1]
            .iter()
            .map(|&w| seeds::winding(&na, &nb, 60, 1.0, &[w], 2.0 * PI))
            .collect::<Result<_, _>>()?;
        let r = cluster_check(&spec, &dec, &a, &b, &j, &so, &sn, 1.0)?;
        metrics.insert(
            "winding_defect".into(),
            Metric::upper(r.relative_defect.unwrap_or(f64::INFINITY), 1e-6),
        );
        metrics.insert(
            "winding_joint_count".into(),
            Metric::holds(r.joint_count == 6 && r.intrinsic_counts == (3, 2)),
        );
        if let Some(dir) = out {
            std::fs::create_dir_all(dir)?;
            let joint_kernel = dynloc_core::semiclassical::kernel_between(&spec, &a, &b, &j, 1.0)?;
            write_json(
                &dir.join("winding_joint_kernel.json"),
                &report::KernelDoc::from_kernel(&joint_kernel),
            )?;
        }
    }

    // Bell-pair-style stiff coupling: factorization must fail.
    {
        let kappa = 30.0;
        let mesh = Arc::new(Mesh::degrees_of_freedom(2)?);
        let mut kernel = nalgebra::DMatrix::zeros(2, 2);
        kernel[(0, 0)] = kappa;
        kernel[(1, 1)] = kappa;
        kernel[(0, 1)] = -kappa;
        kernel[(1, 0)] = -kappa;
        let spec = ActionSpec::new(
            mesh.clone(),
            SuperMetric::FlatL2,
            Potential::Nonlocal(kernel),
            120,
            1.0,
        )?;
        let dec = RegionDecomposition::from_selected(mesh.clone(), &[0])?;
        let a = dof_config(&mesh, &[0.0, 0.0])?;
        let b = dof_config(&mesh, &[PI / 2.0, PI / 2.0])?;
        let j: Vec<Path> = [-1i64, 0, 1]
            .iter()
            .map(|&w| seeds::winding(&a, &b, 120, 1.0, &[w, w], 2.0 * PI))
            .collect::<Result<_, _>>()?;
        let (pa, pb) = (dec.project_o(&a)?, dec.project_o(&b)?);
        let so: Vec<Path> = [-1i64, 0, 1]
            .iter()
            .map(|&w| seeds::winding(&pa, &pb, 120, 1.0, &[w], 2.0 * PI))
            .collect::<Result<_, _>>()?;
        let (na, nb) = (dec.project_n(&a)?, dec.project_n(&b)?);
        let sn: Vec<Path> = [-1i64, 0, 1]
            .iter()
            .map(|&w| seeds::winding(&na, &nb, 120, 1.0, &[w], 2.0 * PI))
            .collect::<Result<_, _>>()?;
        let r = cluster_check(&spec, &dec, &a, &b, &j, &so, &sn, 1.0)?;
        metrics.insert(
            "bell_defect".into(),
            Metric::lower(r.relative_defect.unwrap_or(0.0), 0.1),
        );
        metrics.insert(
            "bell_counts_differ".into(),
            Metric::holds(!r.count_product_matches),
        );
    }

    let artifacts = if out.is_some() {
        vec!["winding_joint_kernel.json".into()]
    } else {
        Vec::new()
    };
    emit_result(
        out,
        ExperimentResult::from_metrics("cluster_decomposition", metrics),
        artifacts,
    )
}

/// The boundary-cut wave is localized at ε = 10x the calibrated
/// discretization error.
pub fn check_locality_cut_wave(out: Option<&FsPath>) -> CheckResult {
    let n = 64;
    let mesh = Arc::new(Mesh::circle(n, 2.0 * PI)?);
    let dec = RegionDecomposition::decompose(mesh.clone(), |p| p[0] < PI / 2.0)?;
    let stiffness = EdgeStiffness::uniform(&mesh, 1.0).cut_at_sites(&mesh, dec.boundary());
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::EdgeQuadratic(stiffness),
        48,
        1.0,
    )?;
    let bump = |p: &[f64]| {
        let d1 = (p[0] - PI / 4.0).abs();
        let d2 = (p[0] - PI).abs();
        (-8.0 * d1 * d1).exp() + 0.5 * (-4.0 * d2 * d2).exp()
    };
    let mut phi_i = FieldConfig::from_fn(mesh.clone(), |_, p| bump(p));
    let mut phi_f = FieldConfig::from_fn(mesh.clone(), |_, p| 0.8 * bump(p));
    for &b in dec.boundary() {
        phi_i.set(b, 0.1);
        phi_f.set(b, 0.1);
    }
    let g_seed = vec![Path::linear(&phi_i, &phi_f, 48, 1.0)?];
    let epsilon = recommended_epsilon(&spec, &g_seed[0])?;
    let (pi, pf) = (dec.project_o(&phi_i)?, dec.project_o(&phi_f)?);
    let i_seed = vec![Path::linear(&pi, &pf, 48, 1.0)?];
    let report = test_localization(&spec, &dec, &phi_i, &phi_f, &g_seed, &i_seed, epsilon)?;

    let mut metrics = BTreeMap::new();
    metrics.insert(
        "verdict_localized".into(),
        Metric::holds(report.verdict == Verdict::Localized),
    );
    metrics.insert(
        "deviation_i".into(),
        Metric::upper(report.max_deviation_i, epsilon),
    );
    metrics.insert("epsilon".into(), Metric::lower(epsilon, 0.0));
    let mut artifacts = Vec::new();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_json(
            &dir.join("cut_wave_locality.json"),
            &LocalityDoc::from_report(&report),
        )?;
        artifacts.push("cut_wave_locality.json".into());
    }
    emit_result(
        out,
        ExperimentResult::from_metrics("locality_cut_wave", metrics),
        artifacts,
    )
}

/// Jacobi/Maupertuis equivalence on the anisotropic oscillator.
pub fn check_jacobi_equivalence(out: Option<&FsPath>) -> CheckResult {
    let (spec, ex) = solved_oscillator(vec![1.0, 4.0], 400, 1.0, &[1.0, 0.0], &[0.0, 1.0])?;
    let energy = spec.on_shell_energy(&ex.path)?;
    let metric = JacobiMetric::build(&spec, energy);
    let good = verify_equivalence(&spec, &ex, &metric, 1e-3)?;
    let wrong = verify_equivalence(&spec, &ex, &JacobiMetric::build(&spec, energy + 0.5), 1e-3)?;

    let mut metrics = BTreeMap::new();
    metrics.insert(
        "on_shell_deviation".into(),
        Metric::upper(good.max_deviation, 1e-3),
    );
    metrics.insert(
        "wrong_energy_deviation".into(),
        Metric::lower(wrong.max_deviation, 1e-2),
    );
    let mut artifacts = Vec::new();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        // Plot both curves in the (x, y) plane.
        let curve = |p: &Path| -> Vec<(f64, f64)> {
            p.slices()
                .iter()
                .map(|s| (s.value(0), s.value(1)))
                .collect()
        };
        svg::LinePlot::new("action extremal vs Jacobi geodesic (configuration plane)")
            .series("extremal", curve(&ex.path))
            .series("geodesic", curve(&good.geodesic.path))
            .series("wrong-energy geodesic", curve(&wrong.geodesic.path))
            .write(&dir.join("jacobi_equivalence.svg"))?;
        artifacts.push("jacobi_equivalence.svg".into());
        report::write_path_csv(&dir.join("extremal_path.csv"), &ex.path)?;
        artifacts.push("extremal_path.csv".into());
    }
    emit_result(
        out,
        ExperimentResult::from_metrics("jacobi_equivalence", metrics),
        artifacts,
    )
}

/// Small deterministic generator for the random-path gradient checks.
struct XorShift(u64);

impl XorShift {
    fn next_f64(&mut self) -> f64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        // Map to [-1, 1).
        (x >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

/// Solver and discretization properties: residual-vs-gradient agreement,
/// dt² convergence of the on-shell action, dt² energy drift.
pub fn check_solver_properties(out: Option<&FsPath>) -> CheckResult {
    let mut metrics = BTreeMap::new();

    // Finite-difference gradient agreement on random paths.
    let mesh = Arc::new(Mesh::circle(10, 2.0 * PI)?);
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::EdgeQuadratic(EdgeStiffness::uniform(&mesh, 1.0)),
        6,
        0.9,
    )?;
    let mut rng = XorShift(0x9E3779B97F4A7C15);
    let slices: Vec<FieldConfig> = (0..=6)
        .map(|_| {
            FieldConfig::new(mesh.clone(), (0..10).map(|_| rng.next_f64()).collect())
                .expect("finite values")
        })
        .collect();
    let path = Path::new(slices, 0.9)?;
    let res = spec.eom_residual(&path)?;
    let h = 1e-5;
    let mut worst_rel = 0.0f64;
    let scale = res
        .slices()
        .iter()
        .flat_map(|s| s.values().iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for k in 1..6 {
        for x in 0..10 {
            let mut plus = path.clone();
            plus.slice_mut(k).set(x, path.slice(k).value(x) + h);
            let mut minus = path.clone();
            minus.slice_mut(k).set(x, path.slice(k).value(x) - h);
            let fd = (spec.action(&plus)? - spec.action(&minus)?) / (2.0 * h);
            worst_rel = worst_rel.max((fd - res.slice(k).value(x)).abs() / scale);
        }
    }
    metrics.insert("gradient_rel_err".into(), Metric::upper(worst_rel, 1e-6));

    // Second-order convergence of the oscillator on-shell action.
    let exact = 1.0f64.cos() / (2.0 * 1.0f64.sin());
    let action_err = |steps: usize| -> Result<f64, LabError> {
        let (_, ex) = solved_oscillator(vec![1.0], steps, 1.0, &[0.0], &[1.0])?;
        Ok((ex.on_shell_action - exact).abs())
    };
    let e1 = action_err(50)?;
    let e2 = action_err(100)?;
    let e3 = action_err(200)?;
    let order_a = (e1 / e2).log2();
    let order_b = (e2 / e3).log2();
    metrics.insert(
        "action_convergence_order_dev".into(),
        Metric::upper((order_a - 2.0).abs().max((order_b - 2.0).abs()), 0.2),
    );

    // Energy drift O(dt²) on extremals.
    let drift = |steps: usize| -> Result<f64, LabError> {
        let (spec, ex) = solved_oscillator(vec![1.0], steps, 1.0, &[0.2], &[1.0])?;
        let prof = spec.energy_profile(&ex.path)?;
        let max = prof.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = prof.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(max - min)
    };
    let d1 = drift(64)?;
    let d2 = drift(128)?;
    let d3 = drift(256)?;
    let order_c = (d1 / d2).log2();
    let order_d = (d2 / d3).log2();
    metrics.insert(
        "energy_drift_order_dev".into(),
        Metric::upper((order_c - 2.0).abs().max((order_d - 2.0).abs()), 0.3),
    );

    emit_result(
        out,
        ExperimentResult::from_metrics("solver_properties", metrics),
        Vec::new(),
    )
}

/// Mode-sector kernel factorization ties the mode picture back to
/// cluster decomposition.
pub fn check_mode_sectors(out: Option<&FsPath>) -> CheckResult {
    let mesh = Arc::new(Mesh::circle(32, 2.0 * PI)?);
    let spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::EdgeQuadratic(EdgeStiffness::uniform(&mesh, 1.0)),
        32,
        0.3,
    )?;
    let basis = eigenmodes(&mesh, BoundaryKind::Periodic, 8)?;
    let sectors = vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]];
    let a_i = [0.3, -0.2, 0.5, 0.1, -0.4, 0.2, 0.05, -0.1];
    let a_f = [0.0, 0.4, -0.3, 0.2, 0.1, -0.2, 0.3, 0.05];
    let split = mode_sector_kernel(&spec, &basis, &sectors, &a_i, &a_f, 1.0)?;

    let mut metrics = BTreeMap::new();
    metrics.insert(
        "decoupled_sector_defect".into(),
        Metric::upper(split.cluster.relative_defect.unwrap_or(f64::INFINITY), 1e-6),
    );
    metrics.insert(
        "off_sector_coupling".into(),
        Metric::upper(split.off_sector_coupling, 1e-10),
    );
    metrics.insert(
        "basis_residual".into(),
        Metric::upper(basis.max_residual(), 1e-8),
    );
    metrics.insert(
        "basis_orthonormality".into(),
        Metric::upper(basis.max_orthonormality_defect(), 1e-10),
    );
    emit_result(
        out,
        ExperimentResult::from_metrics("mode_sectors", metrics),
        Vec::new(),
    )
}
