//! The experiment registry and the `verify-all` driver.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use dynloc_core::exemplars::ExperimentResult;

use crate::checks;
use crate::config::{build_localization, ExperimentConfig, ExperimentKind};
use crate::report::{self, write_json, ResultDoc};
use crate::LabError;

pub type CheckFn = fn(Option<&Path>) -> Result<ExperimentResult, LabError>;

pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    pub run: CheckFn,
}

/// Every registered experiment, in the order `verify-all` reports them.
pub fn registry() -> Vec<Experiment> {
    vec![
        Experiment {
            name: "annulus",
            about: "Laplace equation on the annulus vs separation of variables",
            run: checks::check_annulus,
        },
        Experiment {
            name: "circle_wave_quarter",
            about: "S1 standing-wave commensurability at [O]/[M] = 1/4",
            run: checks::check_circle_wave_quarter,
        },
        Experiment {
            name: "circle_wave_irrational",
            about: "Irrational length ratio leaves only the constant field",
            run: checks::check_circle_wave_irrational,
        },
        Experiment {
            name: "nonlocal_source",
            about: "Inverse-Laplacian kernel with an exterior source breaks locality",
            run: checks::check_nonlocal_source,
        },
        Experiment {
            name: "van_vleck_oracles",
            about: "Van Vleck determinants vs closed forms, both methods",
            run: checks::check_van_vleck,
        },
        Experiment {
            name: "cluster_decomposition",
            about: "Kernel factorization for independent regions; Bell-pair failure",
            run: checks::check_cluster,
        },
        Experiment {
            name: "locality_cut_wave",
            about: "Boundary-cut wave action is localized at calibrated epsilon",
            run: checks::check_locality_cut_wave,
        },
        Experiment {
            name: "jacobi_equivalence",
            about: "Action extremals coincide with Jacobi-metric geodesics",
            run: checks::check_jacobi_equivalence,
        },
        Experiment {
            name: "solver_properties",
            about: "Gradient oracle, dt^2 action convergence, dt^2 energy drift",
            run: checks::check_solver_properties,
        },
        Experiment {
            name: "mode_sectors",
            about: "Per-mode-sector kernel factorization",
            run: checks::check_mode_sectors,
        },
    ]
}

#[derive(Serialize)]
struct SummaryDoc {
    all_pass: bool,
    experiments: Vec<ResultDoc>,
}

#[derive(Serialize)]
struct MetaDoc {
    /// Seconds since the Unix epoch at the start of the run; kept out of
    /// the result documents so those stay byte-stable.
    started_unix_secs: u64,
    total_seconds: f64,
    per_experiment_seconds: Vec<(String, f64)>,
    jobs: usize,
}

pub struct VerifySummary {
    pub results: Vec<ExperimentResult>,
    pub all_pass: bool,
    pub total_seconds: f64,
}

/// Run every experiment (up to `jobs` concurrently), each into its own
/// subdirectory, then write a machine-readable summary plus a separate
/// metadata file carrying the timings.
pub fn verify_all(
    experiments: &[Experiment],
    out_dir: &Path,
    jobs: usize,
) -> Result<VerifySummary, LabError> {
    if experiments.is_empty() {
        return Err(LabError::Config("no experiments registered".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let started = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let t0 = Instant::now();
    let jobs = jobs.max(1).min(experiments.len());
    let next = AtomicUsize::new(0);
    type Slot = Option<(Result<ExperimentResult, LabError>, f64)>;
    let results: Mutex<Vec<Slot>> = Mutex::new((0..experiments.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= experiments.len() {
                    break;
                }
                let exp = &experiments[idx];
                let dir = out_dir.join(exp.name);
                let t = Instant::now();
                let outcome = (exp.run)(Some(&dir));
                let secs = t.elapsed().as_secs_f64();
                results.lock().expect("no poisoned lock")[idx] = Some((outcome, secs));
            });
        }
    });
    let collected = results.into_inner().expect("no poisoned lock");
    let mut out = Vec::with_capacity(experiments.len());
    let mut timings = Vec::with_capacity(experiments.len());
    for (exp, slot) in experiments.iter().zip(collected) {
        let (outcome, secs) = slot.expect("every experiment ran");
        timings.push((exp.name.to_string(), secs));
        out.push(outcome?);
    }
    let all_pass = out.iter().all(|r| r.pass);
    let total_seconds = t0.elapsed().as_secs_f64();
    write_json(
        &out_dir.join("summary.json"),
        &SummaryDoc {
            all_pass,
            experiments: out.iter().map(ResultDoc::from_result).collect(),
        },
    )?;
    write_json(
        &out_dir.join("run_meta.json"),
        &MetaDoc {
            started_unix_secs: started,
            total_seconds,
            per_experiment_seconds: timings,
            jobs,
        },
    )?;
    Ok(VerifySummary {
        results: out,
        all_pass,
        total_seconds,
    })
}

/// Execute one configured experiment, writing its artifacts to
/// `out_dir`.
pub fn run_config(
    cfg: &ExperimentConfig,
    config_dir: &Path,
    out_dir: &Path,
) -> Result<ExperimentResult, LabError> {
    std::fs::create_dir_all(out_dir)?;
    match cfg.kind {
        ExperimentKind::Annulus => {
            let s = cfg.annulus.as_ref().expect("validated");
            let output = dynloc_core::exemplars::run_annulus(s.n_r, s.n_theta)?;
            let mut result = output.result;
            let field =
                dynloc_core::field::FieldConfig::new(output.mesh.clone(), output.numeric.clone())?;
            report::write_field_csv(&out_dir.join("annulus_field.csv"), &field)?;
            crate::svg::write_polar_heatmap(
                &out_dir.join("annulus_solution.svg"),
                "Laplace solution on the annulus",
                s.n_r,
                s.n_theta,
                2.0,
                4.0,
                &output.numeric,
            )?;
            result.artifacts = vec!["annulus_field.csv".into(), "annulus_solution.svg".into()];
            let json = format!("{}_result.json", result.name);
            write_json(&out_dir.join(&json), &ResultDoc::from_result(&result))?;
            result.artifacts.push(json);
            Ok(result)
        }
        ExperimentKind::CircleWave => {
            let s = cfg.circle_wave.as_ref().expect("validated");
            let ratio = if s.irrational {
                dynloc_core::exemplars::CircleWaveRatio::Irrational
            } else {
                let [num, den] = s.ratio.expect("validated");
                dynloc_core::exemplars::CircleWaveRatio::Rational(num, den)
            };
            let output = dynloc_core::exemplars::run_circle_wave(ratio)?;
            let mut result = output.result;
            if let Some(indep) = &output.independence {
                write_json(
                    &out_dir.join("modes_o.json"),
                    &report::ModeMatchDoc::from_report(&indep.o_report),
                )?;
                result.artifacts.push("modes_o.json".into());
            }
            let json = format!("{}_result.json", result.name);
            write_json(&out_dir.join(&json), &ResultDoc::from_result(&result))?;
            result.artifacts.push(json);
            Ok(result)
        }
        ExperimentKind::NonlocalSource => {
            let s = cfg.nonlocal_source.as_ref().expect("validated");
            let output = dynloc_core::exemplars::run_nonlocal_source(&s.amplitudes)?;
            let mut result = output.result;
            let mut csv = String::from("amplitude,deviation,verdict\n");
            for (a, d, v) in &output.deviations {
                csv.push_str(&format!("{a},{d},{}\n", report::verdict_str(*v)));
            }
            std::fs::write(out_dir.join("nonlocal_deviation.csv"), csv)?;
            result.artifacts.push("nonlocal_deviation.csv".into());
            let json = format!("{}_result.json", result.name);
            write_json(&out_dir.join(&json), &ResultDoc::from_result(&result))?;
            result.artifacts.push(json);
            Ok(result)
        }
        ExperimentKind::Localization => {
            let s = cfg.localization.as_ref().expect("validated");
            let setup = build_localization(s, config_dir)?;
            let epsilon = match setup.epsilon {
                Some(e) => e,
                None => {
                    dynloc_core::locality::recommended_epsilon(&setup.spec, &setup.seeds_global[0])?
                }
            };
            let report_out = dynloc_core::locality::test_localization(
                &setup.spec,
                &setup.dec,
                &setup.phi_i,
                &setup.phi_f,
                &setup.seeds_global,
                &setup.seeds_intrinsic,
                epsilon,
            )?;
            write_json(
                &out_dir.join("locality_report.json"),
                &crate::report::LocalityDoc::from_report(&report_out),
            )?;
            write_json(
                &out_dir.join("mesh.json"),
                &crate::report::MeshDoc::from_mesh(setup.spec.mesh()),
            )?;
            write_json(
                &out_dir.join("region.json"),
                &crate::report::RegionDoc::from_decomposition(&setup.dec),
            )?;
            // Global extremal set with momenta, plus the first extremal's
            // full field history.
            let global_set = dynloc_core::solve::enumerate(
                &setup.spec,
                &setup.phi_i,
                &setup.phi_f,
                &setup.seeds_global,
                setup.solver_tol,
            )?;
            write_json(
                &out_dir.join("global_extremals.json"),
                &crate::report::ExtremalSetDoc::from_set(&setup.spec, &global_set)?,
            )?;
            if let Some(first) = global_set.extremals.first() {
                report::write_path_csv(&out_dir.join("global_extremal_0.csv"), &first.path)?;
            }
            let mut metrics = std::collections::BTreeMap::new();
            metrics.insert(
                "condition_i".to_string(),
                dynloc_core::exemplars::Metric::holds(report_out.condition_i),
            );
            metrics.insert(
                "condition_ii".to_string(),
                dynloc_core::exemplars::Metric::holds(report_out.condition_ii),
            );
            let mut result = ExperimentResult::from_metrics(
                cfg.name.as_deref().unwrap_or("localization"),
                metrics,
            );
            result.artifacts = vec![
                "locality_report.json".into(),
                "mesh.json".into(),
                "region.json".into(),
                "global_extremals.json".into(),
                "global_extremal_0.csv".into(),
            ];
            let json = format!("{}_result.json", result.name);
            write_json(&out_dir.join(&json), &ResultDoc::from_result(&result))?;
            result.artifacts.push(json);
            Ok(result)
        }
    }
}

/// Output directory resolution: CLI flag, then the `DYNLOC_OUT`
/// environment variable, then the config's own `[output] dir`, then
/// `./dynloc-out`.
pub fn resolve_out_dir(
    cli: Option<&Path>,
    config_dir: Option<&Path>,
    config: Option<&ExperimentConfig>,
) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var("DYNLOC_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    if let (Some(cfg), Some(dir)) = (config, config_dir) {
        if let Some(p) = &cfg.output.dir {
            return if p.is_absolute() {
                p.clone()
            } else {
                dir.join(p)
            };
        }
    }
    PathBuf::from("dynloc-out")
}
