//! Two-point boundary-value solver for extremal paths.
//!
//! The discrete Euler–Lagrange condition `∂S/∂φ_k = 0` at every interior
//! slice, with both endpoint slices (and all Dirichlet sites) held fixed,
//! is solved by a damped Newton iteration. The Jacobian is symmetric
//! block-tridiagonal — slices couple only to their neighbors — and is
//! factored by block elimination. At convergence the factorization's
//! reciprocal-condition estimate is checked: a (near-)singular Hessian
//! at the solution means the endpoints sit at a conjugate point, which
//! is reported instead of returned as a degenerate "solution". The tiny
//! diagonal regularization sits far below that threshold, so it never
//! masks a genuine singularity.
//!
//! For quadratic actions the residual is affine in the path, so the first
//! Newton step lands on the extremal exactly (up to roundoff).

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // f64 math via the trait in no_std builds
use num_traits::Float;

use crate::action::{ActionSpec, End, Path};
use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::linalg::BlockTridiag;

/// Knobs for the Newton iteration. The defaults implement the documented
/// contract: 200 iterations, diagonal regularization `1e-10`, conjugate
/// points flagged at a reciprocal-condition estimate of `1e-8`.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Max-norm residual target.
    pub tol: f64,
    pub max_iters: usize,
    /// Added to the Jacobian diagonal; strictly below the caustic
    /// detection threshold so genuine singularities still surface.
    pub regularization: f64,
    /// Conjugate-point flag: reciprocal-condition estimate of the
    /// converged Jacobian below this value.
    pub caustic_threshold: f64,
    /// Backtracking halvings per Newton step.
    pub max_backtracks: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iters: 200,
            regularization: 1e-10,
            caustic_threshold: 1e-8,
            max_backtracks: 30,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> SolverOptions {
        SolverOptions {
            tol,
            ..SolverOptions::default()
        }
    }
}

/// A converged solution of the discrete boundary-value problem.
#[derive(Debug, Clone)]
pub struct ExtremalPath {
    pub path: Path,
    pub on_shell_action: f64,
    pub residual_norm: f64,
    pub seed_label: String,
}

/// The outcome of running the solver from a family of seeds, after
/// deduplication. An empty set (all seeds failed) is a flagged result,
/// not an error.
#[derive(Debug, Clone)]
pub struct ExtremalSet {
    pub extremals: Vec<ExtremalPath>,
    pub endpoints: (FieldConfig, FieldConfig),
    pub dedup_threshold: f64,
    /// Seeds that failed to converge, with their errors.
    pub failures: Vec<(String, Error)>,
}

impl ExtremalSet {
    pub fn len(&self) -> usize {
        self.extremals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.extremals.is_empty()
    }

    pub fn all_failed(&self) -> bool {
        self.extremals.is_empty() && !self.failures.is_empty()
    }
}

/// Default path-space distance below which two extremals are identified.
pub const DEDUP_THRESHOLD: f64 = 1e-4;

/// Solve the boundary-value problem between explicit endpoints. The guess
/// must already match the endpoints (use [`enumerate`] for winding-lifted
/// seeds).
pub fn solve(
    spec: &ActionSpec,
    phi_i: &FieldConfig,
    phi_f: &FieldConfig,
    initial_guess: &Path,
    tol: f64,
) -> Result<ExtremalPath> {
    spec.check_path(initial_guess)?;
    if !phi_i.mesh().compatible(spec.mesh()) || !phi_f.mesh().compatible(spec.mesh()) {
        return Err(Error::MeshMismatch(String::from(
            "endpoints do not live on the spec mesh",
        )));
    }
    let gap = |a: &FieldConfig, b: &FieldConfig| -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    };
    if gap(initial_guess.initial(), phi_i) > 1e-12
        || gap(initial_guess.final_slice(), phi_f) > 1e-12
    {
        return Err(Error::InvalidSpec(String::from(
            "initial guess does not match the endpoint configurations",
        )));
    }
    solve_seeded(spec, initial_guess, &SolverOptions::with_tol(tol), "seed")
}

/// Run the solver from a seed path, holding the seed's own endpoint
/// slices fixed. Used by [`enumerate`], where seeds may lift the nominal
/// endpoints (winding sectors on circle-valued degrees of freedom).
pub fn solve_seeded(
    spec: &ActionSpec,
    seed: &Path,
    opts: &SolverOptions,
    label: &str,
) -> Result<ExtremalPath> {
    spec.check_path(seed)?;
    if seed.n_steps() < 2 {
        return Err(Error::InvalidSpec(String::from(
            "boundary-value solve needs at least 2 time steps",
        )));
    }
    let mesh = spec.mesh();
    let free = mesh.free_sites();
    if free.is_empty() {
        return Err(Error::InvalidSpec(String::from(
            "no free degrees of freedom to solve for",
        )));
    }
    let kk = seed.n_steps();
    let interior = kk - 1;
    let mut path = seed.clone();

    let residual = |p: &Path| -> Result<(Vec<DVector<f64>>, f64)> {
        let mut blocks = Vec::with_capacity(interior);
        let mut norm = 0.0f64;
        for k in 1..kk {
            let g = spec.slice_gradient(p, k)?;
            let v = DVector::from_iterator(free.len(), free.iter().map(|&x| g[x]));
            norm = norm.max(v.amax());
            blocks.push(v);
        }
        Ok((blocks, norm))
    };

    let (mut res, mut res_norm) = residual(&path)?;
    let mut iters = 0;
    // Levenberg-style shift, raised only when a plain Newton step fails
    // its line search (indefinite Hessian away from the solution) and
    // decayed back to the base regularization afterwards.
    let mut shift = opts.regularization;
    loop {
        // Assemble and factor the Jacobian even when already converged:
        // a singular Hessian at the solution is a conjugate point and
        // must be reported rather than silently accepted.
        let mut diag = Vec::with_capacity(interior);
        let mut upper = Vec::with_capacity(interior.saturating_sub(1));
        for k in 1..kk {
            let mut d = spec.hessian_diag_block(&path, k)?;
            for i in 0..d.nrows() {
                d[(i, i)] += shift;
            }
            diag.push(d);
            if k + 1 < kk {
                upper.push(spec.hessian_off_block(&path, k)?);
            }
        }
        let factor = BlockTridiag::factor(diag, upper)?;
        if res_norm <= opts.tol {
            // A (near-)singular Hessian at the solution means the
            // endpoints sit at a conjugate point; report it instead of
            // returning a degenerate "solution". Mid-iteration
            // near-singularity is not flagged: an indefinite Hessian can
            // cross zero on the way without the solution being caustic.
            if factor.rcond_estimate < opts.caustic_threshold {
                return Err(Error::ConjugatePoint {
                    rcond: factor.rcond_estimate,
                });
            }
            let on_shell_action = spec.action(&path)?;
            return Ok(ExtremalPath {
                path,
                on_shell_action,
                residual_norm: res_norm,
                seed_label: String::from(label),
            });
        }
        if iters >= opts.max_iters {
            return Err(Error::NonConvergence {
                iters,
                residual: res_norm,
            });
        }
        let neg = res.iter().map(|r| -r).collect::<Vec<_>>();
        let step = factor.solve_vec(&neg)?;

        // Backtracking line search on the residual max-norm.
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let mut trial = path.clone();
            for k in 1..kk {
                let s = trial.slice_mut(k);
                for (i, &x) in free.iter().enumerate() {
                    let v = s.value(x) + t * step[k - 1][i];
                    s.set(x, v);
                }
            }
            match residual(&trial) {
                Ok((r, n)) if n < res_norm * (1.0 - 1e-4 * t) || n <= opts.tol => {
                    accepted = Some((trial, r, n));
                    break;
                }
                _ => t *= 0.5,
            }
        }
        match accepted {
            Some((p, r, n)) => {
                path = p;
                res = r;
                res_norm = n;
                shift = (shift * 0.1).max(opts.regularization);
            }
            None => {
                // Raise the shift and retry from the same iterate; give
                // up once the shift dominates the Hessian scale.
                shift = (shift * 1e4).max(1e-8);
                if shift > 1e12 * opts.regularization.max(1e-12) {
                    return Err(Error::NonConvergence {
                        iters,
                        residual: res_norm,
                    });
                }
            }
        }
        iters += 1;
    }
}

/// Run [`solve_seeded`] from every seed and deduplicate the survivors by
/// sup-slice flat distance. Results are merged in seed order, so the
/// outcome is deterministic; failed seeds are recorded, and an all-failed
/// set is flagged rather than treated as an error.
pub fn enumerate(
    spec: &ActionSpec,
    phi_i: &FieldConfig,
    phi_f: &FieldConfig,
    seeds: &[Path],
    tol: f64,
) -> Result<ExtremalSet> {
    if seeds.is_empty() {
        return Err(Error::InvalidSpec(String::from(
            "enumerate needs at least one seed",
        )));
    }
    let opts = SolverOptions::with_tol(tol);
    let mut extremals: Vec<ExtremalPath> = Vec::new();
    let mut failures = Vec::new();
    for (idx, seed) in seeds.iter().enumerate() {
        let label = format!("seed-{idx}");
        match solve_seeded(spec, seed, &opts, &label) {
            Ok(ex) => {
                let duplicate =
                    extremals
                        .iter()
                        .any(|kept| match kept.path.sup_distance(&ex.path) {
                            Ok(d) => d < DEDUP_THRESHOLD,
                            Err(_) => false,
                        });
                if !duplicate {
                    extremals.push(ex);
                }
            }
            Err(e) => failures.push((label, e)),
        }
    }
    Ok(ExtremalSet {
        extremals,
        endpoints: (phi_i.clone(), phi_f.clone()),
        dedup_threshold: DEDUP_THRESHOLD,
        failures,
    })
}

/// On-shell momentum conjugate to an endpoint configuration:
/// `π_i = −∂S/∂φ_0`, `π_f = +∂S/∂φ_K`. For the midpoint scheme this is
/// the mass form applied to the one-sided discrete velocity plus the
/// half-weight boundary potential term. Dirichlet sites carry zero.
pub fn on_shell_momentum(spec: &ActionSpec, ex: &ExtremalPath, end: End) -> Result<FieldConfig> {
    let mut g = spec.endpoint_gradient(&ex.path, end)?;
    if end == End::Initial {
        for v in g.iter_mut() {
            *v = -*v;
        }
    }
    FieldConfig::new(spec.mesh().clone(), g)
}

/// Seed-path builders for [`enumerate`].
pub mod seeds {
    use super::*;

    /// Straight-line interpolation between the endpoints.
    pub fn straight_line(
        phi_i: &FieldConfig,
        phi_f: &FieldConfig,
        time_steps: usize,
        total_time: f64,
    ) -> Result<Path> {
        Path::linear(phi_i, phi_f, time_steps, total_time)
    }

    /// Straight line to the winding-lifted final endpoint
    /// `φ_f + period · w` (per-site winding numbers), for circle-valued
    /// degrees of freedom.
    pub fn winding(
        phi_i: &FieldConfig,
        phi_f: &FieldConfig,
        time_steps: usize,
        total_time: f64,
        winding: &[i64],
        period: f64,
    ) -> Result<Path> {
        if winding.len() != phi_f.len() {
            return Err(Error::InvalidSpec(String::from(
                "winding vector length does not match the mesh",
            )));
        }
        let lifted = FieldConfig::new(
            phi_f.mesh().clone(),
            phi_f
                .values()
                .iter()
                .zip(winding)
                .map(|(v, w)| v + period * *w as f64)
                .collect(),
        )?;
        Path::linear(phi_i, &lifted, time_steps, total_time)
    }

    /// Add a half-sine bump `a · sin(π k/K) · mode(x)` to a base seed;
    /// vanishes at both endpoints. Used with low Laplacian eigenmodes to
    /// reach standing-wave extremals.
    pub fn mode_perturbed(base: &Path, mode: &FieldConfig, amplitude: f64) -> Result<Path> {
        base.slices()[0].check_compatible(mode)?;
        let kk = base.n_steps();
        let slices = base
            .slices()
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let bump = amplitude * (core::f64::consts::PI * k as f64 / kk as f64).sin();
                s.add_scaled(mode, bump).expect("same mesh")
            })
            .collect();
        Path::new(slices, base.total_time())
    }

    /// Overwrite the Dirichlet-site values of every interior slice with
    /// fixed boundary data; endpoint slices are left untouched. Intrinsic
    /// boundary-value problems hold `∂O` at the data of the initial
    /// configuration.
    pub fn hold_dirichlet(path: &Path, data: &FieldConfig) -> Result<Path> {
        path.slices()[0].check_compatible(data)?;
        let mesh = path.mesh().clone();
        let kk = path.n_steps();
        let slices = path
            .slices()
            .iter()
            .enumerate()
            .map(|(k, s)| {
                if k == 0 || k == kk {
                    return s.clone();
                }
                let mut out = s.clone();
                for x in 0..mesh.n_sites() {
                    if mesh.is_dirichlet(x) {
                        out.set(x, data.value(x));
                    }
                }
                out
            })
            .collect();
        Path::new(slices, path.total_time())
    }
}

/// Test hook: expose the (crate-internal) Hessian blocks so integration
/// tests can check them against finite differences.
#[doc(hidden)]
pub fn hessian_blocks_for_test(
    spec: &ActionSpec,
    path: &Path,
    k: usize,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = spec.hessian_diag_block(path, k).expect("diag block");
    let e = if k < path.n_steps() - 1 {
        spec.hessian_off_block(path, k).expect("off block")
    } else {
        DMatrix::zeros(d.nrows(), d.ncols())
    };
    (d, e)
}

/// Convenience: dof-mesh configuration from plain coordinates.
pub fn dof_config(mesh: &Arc<crate::mesh::Mesh>, coords: &[f64]) -> Result<FieldConfig> {
    FieldConfig::new(mesh.clone(), coords.to_vec())
}
