//! Emergent-locality tests: is the dynamics of a region `O` independent
//! of its complement between given endpoint data?
//!
//! The detector enumerates global extremals between the endpoints and
//! intrinsic extremals of the restricted (Dirichlet) action between the
//! projected endpoints, then compares the two families slice-wise:
//!
//! * condition (i): every projected global extremal lies within ε of
//!   some intrinsic extremal — local observers can explain everything
//!   they see with local laws;
//! * condition (ii): every intrinsic extremal is approximated by some
//!   projected global extremal — no intrinsic dynamics is censored.
//!
//! The region is ε-localized when both hold. The quantification runs
//! over the *enumerated* sets, so seed coverage is part of the report;
//! boundary drift of the global extremals is reported separately and
//! never enforced.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math via the trait in no_std builds
use num_traits::Float;

use crate::action::{ActionSpec, Path};
use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::metric::SuperMetric;
use crate::region::{RegionDecomposition, Side};
use crate::solve::{enumerate, solve_seeded, SolverOptions};

/// Greedy nearest-neighbor pairing between projected global and
/// intrinsic extremals; diagnostic, not part of the criterion.
#[derive(Debug, Clone)]
pub struct Matching {
    /// `(global index, intrinsic index, distance)`, only pairs within ε.
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_global: Vec<usize>,
    pub unmatched_intrinsic: Vec<usize>,
}

/// The verdict of a localization test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Conditions (i) and (ii) both hold.
    Localized,
    /// Only condition (i): projections are intrinsically explainable,
    /// but some intrinsic dynamics is unreachable from global extremals.
    InjectiveOnly,
    NotLocalized,
}

/// Full outcome of one localization test.
#[derive(Debug, Clone)]
pub struct LocalityReport {
    pub epsilon: f64,
    pub condition_i: bool,
    pub condition_ii: bool,
    pub matching: Matching,
    /// Max over global extremals, times, and `∂O` sites of the drift of
    /// the boundary values away from the initial data.
    pub boundary_drift: f64,
    pub verdict: Verdict,
    /// Largest distance from a projected global extremal to its nearest
    /// intrinsic extremal: the deviation driving condition (i).
    pub max_deviation_i: f64,
    /// Largest distance from an intrinsic extremal to its nearest
    /// projected global extremal: the deviation driving condition (ii).
    pub max_deviation_ii: f64,
    /// `(converged, seeded)` for the global enumeration.
    pub global_coverage: (usize, usize),
    /// `(converged, seeded)` for the intrinsic enumeration.
    pub intrinsic_coverage: (usize, usize),
}

/// Slice-wise restriction of a field history to one side of the
/// decomposition. Linear; commutes with the time discretization.
pub fn project_path(path: &Path, dec: &RegionDecomposition, side: Side) -> Result<Path> {
    let slices = path
        .slices()
        .iter()
        .map(|s| dec.project(side, s))
        .collect::<Result<Vec<_>>>()?;
    Path::new(slices, path.total_time())
}

/// `sup_t ‖p(t) − q(t)‖` in the given supermetric. For conformal metrics
/// the factor is evaluated at the slice midpoint `(p+q)/2`, keeping the
/// distance symmetric in its arguments.
pub fn epsilon_distance(p: &Path, q: &Path, metric: &SuperMetric) -> Result<f64> {
    if p.slices().len() != q.slices().len() {
        return Err(Error::MeshMismatch(format!(
            "paths have {} and {} slices",
            p.slices().len(),
            q.slices().len()
        )));
    }
    let mut worst = 0.0f64;
    for (a, b) in p.slices().iter().zip(q.slices()) {
        let diff = a.add_scaled(b, -1.0)?;
        let base = a.scaled(0.5).add_scaled(b, 0.5)?;
        worst = worst.max(metric.norm(&diff, &base)?);
    }
    Ok(worst)
}

/// Options for [`test_localization`].
#[derive(Debug, Clone)]
pub struct LocalityOptions {
    /// Metric for the ε comparison; flat by default (deduplication and
    /// bookkeeping always use the flat metric).
    pub metric: SuperMetric,
    pub solver: SolverOptions,
}

impl Default for LocalityOptions {
    fn default() -> Self {
        LocalityOptions {
            metric: SuperMetric::FlatL2,
            solver: SolverOptions::default(),
        }
    }
}

/// Test semi-classical ε-localization of region `O` between the given
/// endpoint configurations.
///
/// The intrinsic problem uses `pr_O(φ_i)`, `pr_O(φ_f)` as endpoints and
/// the boundary values of `φ_i` as (time-independent) Dirichlet data;
/// intrinsic seeds are coerced to that data on their interior slices.
#[allow(clippy::too_many_arguments)]
pub fn test_localization(
    spec: &ActionSpec,
    dec: &RegionDecomposition,
    phi_i: &FieldConfig,
    phi_f: &FieldConfig,
    seeds_global: &[Path],
    seeds_intrinsic: &[Path],
    epsilon: f64,
) -> Result<LocalityReport> {
    test_localization_on(
        spec,
        dec,
        Side::O,
        phi_i,
        phi_f,
        seeds_global,
        seeds_intrinsic,
        epsilon,
        &LocalityOptions::default(),
    )
}

/// [`test_localization`] for either side with explicit options.
#[allow(clippy::too_many_arguments)]
pub fn test_localization_on(
    spec: &ActionSpec,
    dec: &RegionDecomposition,
    side: Side,
    phi_i: &FieldConfig,
    phi_f: &FieldConfig,
    seeds_global: &[Path],
    seeds_intrinsic: &[Path],
    epsilon: f64,
    opts: &LocalityOptions,
) -> Result<LocalityReport> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidThreshold(epsilon));
    }
    let global = enumerate(spec, phi_i, phi_f, seeds_global, opts.solver.tol)?;
    if global.is_empty() {
        return Err(Error::Inconclusive(format!(
            "no global extremal converged ({} seed failures)",
            global.failures.len()
        )));
    }
    let intrinsic_spec = spec.intrinsic(dec, side)?;
    let pi = dec.project(side, phi_i)?;
    let pf = dec.project(side, phi_f)?;
    // Interior slices of intrinsic seeds carry the Dirichlet data of the
    // initial configuration.
    let coerced: Vec<Path> = seeds_intrinsic
        .iter()
        .map(|s| crate::solve::seeds::hold_dirichlet(s, &pi))
        .collect::<Result<Vec<_>>>()?;
    let intrinsic = enumerate(&intrinsic_spec, &pi, &pf, &coerced, opts.solver.tol)?;

    let projected: Vec<Path> = global
        .extremals
        .iter()
        .map(|ex| project_path(&ex.path, dec, side))
        .collect::<Result<Vec<_>>>()?;
    let intrinsic_paths: Vec<&Path> = intrinsic.extremals.iter().map(|e| &e.path).collect();

    let mut dist = Vec::with_capacity(projected.len());
    for p in &projected {
        let row = intrinsic_paths
            .iter()
            .map(|q| epsilon_distance(p, q, &opts.metric))
            .collect::<Result<Vec<f64>>>()?;
        dist.push(row);
    }

    // Condition (i): every projected global extremal is within ε of some
    // intrinsic extremal.
    let mut max_deviation_i = 0.0f64;
    let mut condition_i = true;
    for row in &dist {
        let best = row.iter().copied().fold(f64::INFINITY, f64::min);
        let best = if best.is_finite() {
            best
        } else {
            f64::INFINITY
        };
        max_deviation_i = max_deviation_i.max(best);
        if !(best <= epsilon) {
            condition_i = false;
        }
    }
    // Condition (ii): every intrinsic extremal is approximated by some
    // projected global extremal.
    let mut max_deviation_ii = 0.0f64;
    let mut condition_ii = true;
    for j in 0..intrinsic_paths.len() {
        let best = dist.iter().map(|row| row[j]).fold(f64::INFINITY, f64::min);
        max_deviation_ii = max_deviation_ii.max(best);
        if !(best <= epsilon) {
            condition_ii = false;
        }
    }

    // Greedy nearest-neighbor matching in global index order, ties to
    // the lower intrinsic index; a partial injection.
    let mut taken = alloc::vec![false; intrinsic_paths.len()];
    let mut pairs = Vec::new();
    let mut unmatched_global = Vec::new();
    for (g, row) in dist.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (j, &d) in row.iter().enumerate() {
            if taken[j] {
                continue;
            }
            let better = match best {
                None => true,
                Some((_, bd)) => d < bd,
            };
            if better {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, d)) if d <= epsilon => {
                taken[j] = true;
                pairs.push((g, j, d));
            }
            _ => unmatched_global.push(g),
        }
    }
    let unmatched_intrinsic = (0..intrinsic_paths.len()).filter(|&j| !taken[j]).collect();

    // Boundary drift of the global extremals relative to φ_i on ∂O.
    let mut boundary_drift = 0.0f64;
    for ex in &global.extremals {
        for s in ex.path.slices() {
            for &b in dec.boundary() {
                boundary_drift = boundary_drift.max((s.value(b) - phi_i.value(b)).abs());
            }
        }
    }

    let verdict = match (condition_i, condition_ii) {
        (true, true) => Verdict::Localized,
        (true, false) => Verdict::InjectiveOnly,
        _ => Verdict::NotLocalized,
    };
    Ok(LocalityReport {
        epsilon,
        condition_i,
        condition_ii,
        matching: Matching {
            pairs,
            unmatched_global,
            unmatched_intrinsic,
        },
        boundary_drift,
        verdict,
        max_deviation_i,
        max_deviation_ii,
        global_coverage: (global.len(), seeds_global.len()),
        intrinsic_coverage: (intrinsic.len(), seeds_intrinsic.len()),
    })
}

/// Both directions of the localization test.
#[derive(Debug, Clone)]
pub struct MutualIndependence {
    pub o_independent_of_n: LocalityReport,
    pub n_independent_of_o: LocalityReport,
    /// True iff both verdicts are `Localized`.
    pub mutual: bool,
}

/// Run [`test_localization_on`] for both sides; the regions are mutually
/// independent only when each is localized. The asymmetric case (one
/// side surjective, the other not) is a legitimate outcome.
#[allow(clippy::too_many_arguments)]
pub fn test_mutual_independence(
    spec: &ActionSpec,
    dec: &RegionDecomposition,
    phi_i: &FieldConfig,
    phi_f: &FieldConfig,
    seeds_global: &[Path],
    seeds_o: &[Path],
    seeds_n: &[Path],
    epsilon: f64,
) -> Result<MutualIndependence> {
    let opts = LocalityOptions::default();
    let o = test_localization_on(
        spec,
        dec,
        Side::O,
        phi_i,
        phi_f,
        seeds_global,
        seeds_o,
        epsilon,
        &opts,
    )?;
    let n = test_localization_on(
        spec,
        dec,
        Side::N,
        phi_i,
        phi_f,
        seeds_global,
        seeds_n,
        epsilon,
        &opts,
    )?;
    let mutual = o.verdict == Verdict::Localized && n.verdict == Verdict::Localized;
    Ok(MutualIndependence {
        o_independent_of_n: o,
        n_independent_of_o: n,
        mutual,
    })
}

/// Additivity defect of the action over a decomposition.
#[derive(Debug, Clone)]
pub struct AdditivityReport {
    /// `max |S_M(path) − S_O(pr_O path) − S_N(pr_N path)|` over samples.
    pub max_defect: f64,
    pub defects: Vec<f64>,
}

/// Measure `S_M − S_O − S_N` on sample paths using the intrinsic
/// actions. For local potentials whose stencil never crosses `∂O` (and
/// fixed boundary values) the defect vanishes to roundoff.
pub fn check_additivity(
    spec: &ActionSpec,
    dec: &RegionDecomposition,
    sample_paths: &[Path],
) -> Result<AdditivityReport> {
    let spec_o = spec.intrinsic(dec, Side::O)?;
    let spec_n = spec.intrinsic(dec, Side::N)?;
    let mut defects = Vec::with_capacity(sample_paths.len());
    let mut max_defect = 0.0f64;
    for path in sample_paths {
        let s_m = spec.action(path)?;
        let s_o = spec_o.action(&project_path(path, dec, Side::O)?)?;
        let s_n = spec_n.action(&project_path(path, dec, Side::N)?)?;
        let defect = (s_m - s_o - s_n).abs();
        max_defect = max_defect.max(defect);
        defects.push(defect);
    }
    Ok(AdditivityReport {
        max_defect,
        defects,
    })
}

/// Block structure of a supermetric over a decomposition.
#[derive(Debug, Clone)]
pub struct ProductMetricReport {
    /// Relative variation of the O-block entries as only N-interior
    /// values vary: zero for a genuine product metric, nonzero for a
    /// warped one.
    pub warp_factor_variation: f64,
    /// Largest |⟨e_x, e_y⟩| between the two sides, normalized by the
    /// diagonal scale.
    pub cross_block_norm: f64,
    pub is_product: bool,
}

/// Probe whether the metric splits as a product over the decomposition:
/// evaluate the bilinear form on coordinate directions, then vary the
/// N-interior values of the base configuration and watch the O-block.
pub fn check_product_metric(
    metric: &SuperMetric,
    dec: &RegionDecomposition,
    base: &FieldConfig,
) -> Result<ProductMetricReport> {
    if !base.mesh().compatible(dec.parent()) {
        return Err(Error::MeshMismatch(String::from(
            "base configuration does not live on the decomposition parent",
        )));
    }
    let mesh = base.mesh().clone();
    let factors0 = metric.factor_at(base)?;
    let w = mesh.weights();
    let diag_scale = dec
        .interior_o()
        .iter()
        .chain(dec.interior_n())
        .map(|&x| (w[x] * factors0[x]).abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);

    // Cross blocks of the bilinear form on coordinate directions. Our
    // metrics are diagonal so this vanishes identically, but the probe
    // is generic.
    let mut cross = 0.0f64;
    for &x in dec.interior_o() {
        let ex = unit_config(&mesh, x);
        for &y in dec.interior_n() {
            let ey = unit_config(&mesh, y);
            cross = cross.max(metric.inner_product(&ex, &ey, base)?.abs());
        }
    }

    // Vary only the N factor and watch the O-block diagonal.
    let mut variation = 0.0f64;
    let probes: Vec<usize> = dec.interior_n().iter().copied().take(4).collect();
    for &y in &probes {
        for amp in [0.7, -1.3] {
            let mut probe = base.clone();
            probe.set(y, base.value(y) + amp);
            let factors = metric.factor_at(&probe)?;
            for &x in dec.interior_o() {
                let f0 = w[x] * factors0[x];
                let f1 = w[x] * factors[x];
                variation = variation.max((f1 - f0).abs() / f0.abs().max(1e-300));
            }
        }
    }
    let cross_block_norm = cross / diag_scale;
    Ok(ProductMetricReport {
        warp_factor_variation: variation,
        cross_block_norm,
        is_product: variation < 1e-10 && cross_block_norm < 1e-10,
    })
}

fn unit_config(mesh: &alloc::sync::Arc<crate::mesh::Mesh>, site: usize) -> FieldConfig {
    let mut f = FieldConfig::zeros(mesh.clone());
    f.set(site, 1.0);
    f
}

/// Measured discretization error of the solver on a given problem: solve
/// at the seed's resolution and at twice the resolution, and return the
/// sup-slice flat distance on the shared time grid.
pub fn discretization_error(spec: &ActionSpec, seed: &Path) -> Result<f64> {
    let opts = SolverOptions::default();
    let coarse = solve_seeded(spec, seed, &opts, "calibration")?;
    let fine_spec = ActionSpec::new(
        spec.mesh().clone(),
        spec.mass_form().clone(),
        spec.potential().clone(),
        2 * seed.n_steps(),
        seed.total_time(),
    )?;
    let fine_spec = match spec.source() {
        Some(j) => fine_spec.with_source(j.to_vec())?,
        None => fine_spec,
    };
    let fine = solve_seeded(&fine_spec, &seed.refined(), &opts, "calibration-fine")?;
    let w = spec.mesh().weights();
    let mut err = 0.0f64;
    for k in 0..=seed.n_steps() {
        err = err.max(crate::metric::flat_distance(
            w,
            coarse.path.slice(k).values(),
            fine.path.slice(2 * k).values(),
        ));
    }
    Ok(err)
}

/// The recommended ε: ten times the measured discretization error, with
/// a floor that keeps exactly-solvable fixtures testable.
pub fn recommended_epsilon(spec: &ActionSpec, seed: &Path) -> Result<f64> {
    Ok((10.0 * discretization_error(spec, seed)?).max(1e-8))
}
