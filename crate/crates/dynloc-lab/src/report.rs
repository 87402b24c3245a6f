//! File formats: deterministic JSON documents and plain CSV tables for
//! the core types. All maps are ordered, floats go through serde_json's
//! shortest-roundtrip formatting, and nothing here embeds a timestamp —
//! identical inputs produce byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use dynloc_core::action::Path;
use dynloc_core::error::Error as CoreError;
use dynloc_core::exemplars::{BoundKind, ExperimentResult, Metric};
use dynloc_core::field::FieldConfig;
use dynloc_core::locality::{LocalityReport, Verdict};
use dynloc_core::mesh::{Edge, Mesh, Topology};
use dynloc_core::modes::ModeMatchReport;
use dynloc_core::region::RegionDecomposition;
use dynloc_core::semiclassical::KernelValue;
use dynloc_core::solve::ExtremalSet;

use crate::LabError;

#[derive(Debug, Serialize, Deserialize)]
pub struct MeshDoc {
    pub topology: String,
    pub sites: usize,
    pub positions: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// `(a, b, length)` undirected edges.
    pub adjacency: Vec<(usize, usize, f64)>,
    pub dirichlet: Vec<usize>,
}

impl MeshDoc {
    pub fn from_mesh(mesh: &Mesh) -> MeshDoc {
        MeshDoc {
            topology: mesh.topology().as_str().to_string(),
            sites: mesh.n_sites(),
            positions: mesh.positions().to_vec(),
            weights: mesh.weights().to_vec(),
            adjacency: mesh.edges().iter().map(|e| (e.a, e.b, e.length)).collect(),
            dirichlet: mesh.dirichlet_sites(),
        }
    }

    pub fn into_mesh(self) -> Result<Mesh, LabError> {
        let topology = Topology::parse(&self.topology)
            .ok_or_else(|| LabError::Config(format!("unknown topology '{}'", self.topology)))?;
        let edges = self
            .adjacency
            .into_iter()
            .map(|(a, b, length)| Edge { a, b, length })
            .collect();
        Mesh::from_parts(
            topology,
            self.positions,
            self.weights,
            edges,
            self.dirichlet,
        )
        .map_err(LabError::Core)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RegionDoc {
    pub interior_o: Vec<usize>,
    pub interior_n: Vec<usize>,
    pub boundary: Vec<usize>,
}

impl RegionDoc {
    pub fn from_decomposition(dec: &RegionDecomposition) -> RegionDoc {
        RegionDoc {
            interior_o: dec.interior_o().to_vec(),
            interior_n: dec.interior_n().to_vec(),
            boundary: dec.boundary().to_vec(),
        }
    }

    /// Rebuild the decomposition over a parent mesh. The boundary is
    /// recomputed from the interior selection and must agree with the
    /// stored one.
    pub fn into_decomposition(
        self,
        parent: std::sync::Arc<Mesh>,
    ) -> Result<RegionDecomposition, LabError> {
        let dec = RegionDecomposition::from_selected(parent, &self.interior_o)?;
        if dec.boundary() != self.boundary.as_slice()
            || dec.interior_n() != self.interior_n.as_slice()
        {
            return Err(LabError::Config(
                "stored region labels are inconsistent with the mesh adjacency".into(),
            ));
        }
        Ok(dec)
    }
}

#[derive(Debug, Serialize)]
pub struct MetricDoc {
    pub value: f64,
    pub bound: f64,
    pub kind: &'static str,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct ResultDoc {
    pub name: String,
    pub pass: bool,
    pub metrics: BTreeMap<String, MetricDoc>,
    pub artifacts: Vec<String>,
}

impl ResultDoc {
    pub fn from_result(result: &ExperimentResult) -> ResultDoc {
        let metrics = result
            .metrics
            .iter()
            .map(|(k, m)| (k.clone(), metric_doc(m)))
            .collect();
        ResultDoc {
            name: result.name.clone(),
            pass: result.pass,
            metrics,
            artifacts: result.artifacts.clone(),
        }
    }
}

fn metric_doc(m: &Metric) -> MetricDoc {
    MetricDoc {
        value: m.value,
        bound: m.bound,
        kind: match m.kind {
            BoundKind::UpperBound => "upper_bound",
            BoundKind::LowerBound => "lower_bound",
            BoundKind::MustHold => "must_hold",
        },
        pass: m.passes(),
    }
}

#[derive(Debug, Serialize)]
pub struct ExtremalDoc {
    pub seed_label: String,
    pub on_shell_action: f64,
    pub residual_norm: f64,
    pub initial_momentum: Vec<f64>,
    pub final_momentum: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct ExtremalSetDoc {
    pub extremals: Vec<ExtremalDoc>,
    pub dedup_threshold: f64,
    pub failures: Vec<(String, String)>,
}

impl ExtremalSetDoc {
    pub fn from_set(
        spec: &dynloc_core::action::ActionSpec,
        set: &ExtremalSet,
    ) -> Result<ExtremalSetDoc, CoreError> {
        let mut extremals = Vec::new();
        for ex in &set.extremals {
            let pi =
                dynloc_core::solve::on_shell_momentum(spec, ex, dynloc_core::action::End::Initial)?;
            let pf =
                dynloc_core::solve::on_shell_momentum(spec, ex, dynloc_core::action::End::Final)?;
            extremals.push(ExtremalDoc {
                seed_label: ex.seed_label.clone(),
                on_shell_action: ex.on_shell_action,
                residual_norm: ex.residual_norm,
                initial_momentum: pi.values().to_vec(),
                final_momentum: pf.values().to_vec(),
            });
        }
        Ok(ExtremalSetDoc {
            extremals,
            dedup_threshold: set.dedup_threshold,
            failures: set
                .failures
                .iter()
                .map(|(l, e)| (l.clone(), e.to_string()))
                .collect(),
        })
    }
}

#[derive(Debug, Serialize)]
pub struct LocalityDoc {
    pub epsilon: f64,
    pub condition_i: bool,
    pub condition_ii: bool,
    pub verdict: &'static str,
    pub boundary_drift: f64,
    pub max_deviation_i: f64,
    pub max_deviation_ii: f64,
    pub matched_pairs: Vec<(usize, usize, f64)>,
    pub unmatched_global: Vec<usize>,
    pub unmatched_intrinsic: Vec<usize>,
    pub global_coverage: (usize, usize),
    pub intrinsic_coverage: (usize, usize),
}

pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Localized => "localized",
        Verdict::InjectiveOnly => "injective_only",
        Verdict::NotLocalized => "not_localized",
    }
}

impl LocalityDoc {
    pub fn from_report(r: &LocalityReport) -> LocalityDoc {
        LocalityDoc {
            epsilon: r.epsilon,
            condition_i: r.condition_i,
            condition_ii: r.condition_ii,
            verdict: verdict_str(r.verdict),
            boundary_drift: r.boundary_drift,
            max_deviation_i: r.max_deviation_i,
            max_deviation_ii: r.max_deviation_ii,
            matched_pairs: r.matching.pairs.clone(),
            unmatched_global: r.matching.unmatched_global.clone(),
            unmatched_intrinsic: r.matching.unmatched_intrinsic.clone(),
            global_coverage: r.global_coverage,
            intrinsic_coverage: r.intrinsic_coverage,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct KernelDoc {
    /// `(re, im)` of the coherent sum.
    pub amplitude: (f64, f64),
    pub hbar: f64,
    pub per_extremal: Vec<KernelTermDoc>,
}

#[derive(Debug, Serialize)]
pub struct KernelTermDoc {
    pub seed_label: String,
    pub action: f64,
    pub van_vleck: f64,
    pub phase: (f64, f64),
    pub s_over_hbar: f64,
}

impl KernelDoc {
    pub fn from_kernel(k: &KernelValue) -> KernelDoc {
        KernelDoc {
            amplitude: (k.amplitude.re, k.amplitude.im),
            hbar: k.hbar,
            per_extremal: k
                .per_extremal
                .iter()
                .map(|t| KernelTermDoc {
                    seed_label: t.seed_label.clone(),
                    action: t.action,
                    van_vleck: t.van_vleck,
                    phase: (t.phase.re, t.phase.im),
                    s_over_hbar: t.s_over_hbar,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ModeMatchDoc {
    pub region_lengths: (String, String, String),
    pub matched: Vec<(u64, u64)>,
    pub unmatched_intrinsic: Vec<u64>,
    pub ratio_class: &'static str,
    pub trivial_only: bool,
}

impl ModeMatchDoc {
    pub fn from_report(r: &ModeMatchReport) -> ModeMatchDoc {
        ModeMatchDoc {
            region_lengths: (
                r.region_lengths.0.to_string(),
                r.region_lengths.1.to_string(),
                r.region_lengths.2.to_string(),
            ),
            matched: r.matched.clone(),
            unmatched_intrinsic: r.unmatched_intrinsic.clone(),
            ratio_class: match r.ratio_class {
                dynloc_core::modes::RatioClass::Commensurate => "commensurate",
                dynloc_core::modes::RatioClass::Incommensurate => "incommensurate",
            },
            trivial_only: r.trivial_only,
        }
    }

    /// Plain-text table mirroring the mode-matching narrative.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str("intrinsic n | global n'\n");
        out.push_str("-----------+----------\n");
        for (n, np) in &self.matched {
            out.push_str(&format!("{n:>11} | {np}\n"));
        }
        for n in &self.unmatched_intrinsic {
            out.push_str(&format!("{n:>11} | (unmatched)\n"));
        }
        out
    }
}

pub fn write_json<T: Serialize>(path: &FsPath, doc: &T) -> Result<(), LabError> {
    let mut body = serde_json::to_string_pretty(doc)?;
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

/// `site_id,value` per line.
pub fn write_field_csv(path: &FsPath, field: &FieldConfig) -> Result<(), LabError> {
    let mut body = String::from("site_id,value\n");
    for (i, v) in field.values().iter().enumerate() {
        body.push_str(&format!("{i},{v}\n"));
    }
    fs::write(path, body)?;
    Ok(())
}

pub fn read_field_csv(path: &FsPath, mesh: std::sync::Arc<Mesh>) -> Result<FieldConfig, LabError> {
    let body = fs::read_to_string(path)?;
    let mut values = vec![0.0; mesh.n_sites()];
    for (lineno, line) in body.lines().enumerate() {
        if lineno == 0 && line.starts_with("site_id") {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let site: usize = parse_field(parts.next(), path, lineno)?;
        let value: f64 = parse_field(parts.next(), path, lineno)?;
        if site >= values.len() {
            return Err(LabError::Config(format!(
                "{}:{}: site {site} out of range",
                path.display(),
                lineno + 1
            )));
        }
        values[site] = value;
    }
    FieldConfig::new(mesh, values).map_err(LabError::Core)
}

/// `time,site,value` per line, slice-major.
pub fn write_path_csv(path: &FsPath, p: &Path) -> Result<(), LabError> {
    let mut body = String::from("time,site,value\n");
    for (k, slice) in p.slices().iter().enumerate() {
        let t = p.dt() * k as f64;
        for (x, v) in slice.values().iter().enumerate() {
            body.push_str(&format!("{t},{x},{v}\n"));
        }
    }
    fs::write(path, body)?;
    Ok(())
}

/// Square numeric matrix, one row per line, comma separated.
pub fn read_matrix_csv(path: &FsPath) -> Result<nalgebra_rows::Matrix, LabError> {
    let body = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in body.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|_| {
                    LabError::Config(format!(
                        "{}:{}: not a number: '{cell}'",
                        path.display(),
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>, LabError>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(LabError::Config(format!(
            "{}: kernel matrix must be square",
            path.display()
        )));
    }
    Ok(nalgebra_rows::Matrix { rows })
}

/// Tiny matrix carrier so callers can build what they need without this
/// module depending on a particular linear-algebra type.
pub mod nalgebra_rows {
    pub struct Matrix {
        pub rows: Vec<Vec<f64>>,
    }
}

fn parse_field<T: std::str::FromStr>(
    cell: Option<&str>,
    path: &FsPath,
    lineno: usize,
) -> Result<T, LabError> {
    cell.and_then(|c| c.trim().parse().ok()).ok_or_else(|| {
        LabError::Config(format!(
            "{}:{}: malformed CSV line",
            path.display(),
            lineno + 1
        ))
    })
}

/// One pass/fail line per metric, for the CLI summary table.
pub fn summary_lines(result: &ExperimentResult) -> Vec<String> {
    let mut lines = Vec::new();
    lines.push(format!(
        "{} {}",
        if result.pass { "PASS" } else { "FAIL" },
        result.name
    ));
    for (name, m) in &result.metrics {
        let op = match m.kind {
            BoundKind::UpperBound => "<",
            BoundKind::LowerBound => ">",
            BoundKind::MustHold => "==",
        };
        lines.push(format!(
            "  [{}] {name}: {:.6e} {op} {:.6e}",
            if m.passes() { "ok" } else { "FAIL" },
            m.value,
            m.bound
        ));
    }
    lines
}
