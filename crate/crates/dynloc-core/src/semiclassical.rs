//! Semi-classical kernels and Van Vleck determinants.
//!
//! The saddle-point propagator between fixed endpoint configurations is
//! `K = A Σ_γ √|Δ_γ| exp(i S_γ / ħ)` summed over extremals, with the
//! normalization `A` fixed to 1 (only ratios and defects are ever
//! asserted). The Van Vleck matrix is the endpoint sensitivity
//! `δπ_f/δφ_i = −∂²S/∂φ_i∂φ_f` of the on-shell action, evaluated over
//! the free (non-Dirichlet) degrees of freedom, and `Δ` its determinant.
//!
//! Two independent routes compute the matrix: re-solving the boundary
//! value problem under perturbed initial data and differencing the final
//! momenta, or eliminating the interior slices of the discrete Hessian
//! (a Schur complement, using the block-tridiagonal structure). They
//! must agree away from caustics; near a caustic the determinant blows
//! up and the result is flagged instead of trusted.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // f64 math via the trait in no_std builds
use num_traits::Float;

use crate::action::{ActionSpec, End, Path};
use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::linalg::BlockTridiag;
use crate::region::{RegionDecomposition, Side};
use crate::solve::{enumerate, solve_seeded, ExtremalPath, ExtremalSet, SolverOptions};

/// Method for assembling the endpoint sensitivity matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VanVleckMethod {
    /// Perturb each initial free degree of freedom by ±h, re-solve, and
    /// difference the final on-shell momenta.
    FiniteDifference,
    /// Mixed second derivative of the on-shell action via the interior
    /// Schur complement of the discrete Hessian.
    HessianBlock,
}

/// Finite-difference step per site for [`VanVleckMethod::FiniteDifference`].
pub const VAN_VLECK_FD_STEP: f64 = 1e-5;

/// Flag threshold: determinants beyond `1e8` times (or below `1e-8`
/// times) the free-system reference are treated as near-caustic.
pub const CAUSTIC_MAGNIFICATION: f64 = 1e8;

/// Endpoint sensitivity matrix with its determinant.
#[derive(Debug, Clone)]
pub struct VanVleckResult {
    /// `δπ_f/δφ_i` over free degrees of freedom, in `free_sites` order.
    pub matrix: DMatrix<f64>,
    pub determinant: f64,
    pub near_caustic: bool,
}

/// One extremal's contribution to the semi-classical kernel.
#[derive(Debug, Clone)]
pub struct KernelTerm {
    pub action: f64,
    pub van_vleck: f64,
    pub phase: Complex64,
    /// Validity diagnostic: the expansion is accurate for `1 ≪ S/ħ`.
    pub s_over_hbar: f64,
    pub seed_label: String,
}

/// The semi-classical kernel value with its per-extremal breakdown.
#[derive(Debug, Clone)]
pub struct KernelValue {
    /// `Σ √|Δ| exp(iS/ħ)` with normalization `A = 1`.
    pub amplitude: Complex64,
    pub per_extremal: Vec<KernelTerm>,
    pub hbar: f64,
}

/// Reference determinant of the free system on the same mesh: the mass
/// form applied to the one-step velocity map, `det(W_free / T)`. Used to
/// normalize the caustic flag.
fn free_reference_determinant(spec: &ActionSpec, total_time: f64) -> f64 {
    spec.mesh()
        .free_sites()
        .iter()
        .map(|&x| spec.mesh().weight(x) / total_time)
        .product()
}

/// Compute the Van Vleck endpoint-sensitivity matrix and determinant of
/// a converged extremal.
pub fn van_vleck(
    spec: &ActionSpec,
    ex: &ExtremalPath,
    method: VanVleckMethod,
) -> Result<VanVleckResult> {
    spec.check_path(&ex.path)?;
    let matrix = match method {
        VanVleckMethod::FiniteDifference => van_vleck_fd(spec, ex)?,
        VanVleckMethod::HessianBlock => van_vleck_schur(spec, &ex.path)?,
    };
    let determinant = matrix.clone().lu().determinant();
    let reference = free_reference_determinant(spec, ex.path.total_time()).abs();
    let near_caustic = !determinant.is_finite()
        || determinant.abs() > CAUSTIC_MAGNIFICATION * reference
        || determinant.abs() < reference / CAUSTIC_MAGNIFICATION;
    Ok(VanVleckResult {
        matrix,
        determinant,
        near_caustic,
    })
}

fn van_vleck_fd(spec: &ActionSpec, ex: &ExtremalPath) -> Result<DMatrix<f64>> {
    let mesh = spec.mesh();
    let free = mesh.free_sites();
    let m = free.len();
    let opts = SolverOptions::default();
    let mut matrix = DMatrix::zeros(m, m);
    for (col, &y) in free.iter().enumerate() {
        let mut momenta = [Vec::new(), Vec::new()];
        for (side, sgn) in [(0usize, 1.0), (1, -1.0)] {
            let mut seed = ex.path.clone();
            let v = seed.slice(0).value(y) + sgn * VAN_VLECK_FD_STEP;
            seed.slice_mut(0).set(y, v);
            let solved = solve_seeded(spec, &seed, &opts, "vv-perturb")
                .map_err(|e| Error::Propagation(format!("{e}")))?;
            momenta[side] = spec.endpoint_gradient(&solved.path, End::Final)?;
        }
        for (row, &x) in free.iter().enumerate() {
            // The sensitivity matrix takes π_f = −∂S/∂φ_f, so each column
            // is the negative difference of the standard final gradient.
            matrix[(row, col)] = -(momenta[0][x] - momenta[1][x]) / (2.0 * VAN_VLECK_FD_STEP);
        }
    }
    Ok(matrix)
}

/// `−∂²S_cl/∂φ_i∂φ_f = C_0 · (S_II)⁻¹_{first,last} · C_{K−1}` where
/// `C_k = ∂²S/∂φ_k∂φ_{k+1}` and `S_II` is the interior Hessian. The
/// direct `∂²S/∂φ_0∂φ_K` coupling vanishes for two or more time steps.
fn van_vleck_schur(spec: &ActionSpec, path: &Path) -> Result<DMatrix<f64>> {
    let kk = path.n_steps();
    if kk < 2 {
        return Err(Error::InvalidSpec(String::from(
            "Van Vleck needs at least 2 time steps",
        )));
    }
    let mut diag = Vec::with_capacity(kk - 1);
    let mut upper = Vec::with_capacity(kk.saturating_sub(2));
    for k in 1..kk {
        diag.push(spec.hessian_diag_block(path, k)?);
        if k + 1 < kk {
            upper.push(spec.hessian_off_block(path, k)?);
        }
    }
    let factor = BlockTridiag::factor(diag, upper)?;
    let c0 = spec.hessian_off_block(path, 0)?;
    let clast = spec.hessian_off_block(path, kk - 1)?;
    let corner = factor.first_block_of_inverse_last_column()?;
    Ok(c0 * corner * clast)
}

/// The coherent sum over an extremal set. Near-caustic extremals abort
/// with a caustic error unless `allow_caustic` is set.
pub fn kernel_with_options(
    spec: &ActionSpec,
    exset: &ExtremalSet,
    hbar: f64,
    allow_caustic: bool,
) -> Result<KernelValue> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "hbar must be positive, got {hbar}"
        )));
    }
    let mut amplitude = Complex64::new(0.0, 0.0);
    let mut per_extremal = Vec::with_capacity(exset.extremals.len());
    for ex in &exset.extremals {
        let vv = van_vleck(spec, ex, VanVleckMethod::HessianBlock)?;
        if vv.near_caustic && !allow_caustic {
            return Err(Error::Caustic {
                label: ex.seed_label.clone(),
                determinant: vv.determinant,
            });
        }
        let phase_angle = ex.on_shell_action / hbar;
        let phase = Complex64::new(phase_angle.cos(), phase_angle.sin());
        let weight = vv.determinant.abs().sqrt();
        amplitude += weight * phase;
        per_extremal.push(KernelTerm {
            action: ex.on_shell_action,
            van_vleck: vv.determinant,
            phase,
            s_over_hbar: phase_angle.abs(),
            seed_label: ex.seed_label.clone(),
        });
    }
    Ok(KernelValue {
        amplitude,
        per_extremal,
        hbar,
    })
}

/// [`kernel_with_options`] with caustics disallowed.
pub fn kernel(spec: &ActionSpec, exset: &ExtremalSet, hbar: f64) -> Result<KernelValue> {
    kernel_with_options(spec, exset, hbar, false)
}

/// Off-diagonal sensitivity between two regions.
#[derive(Debug, Clone)]
pub struct CrossSensitivity {
    /// `‖M_ON, M_NO‖_F / ‖M_OO, M_NN‖_F` of the endpoint sensitivity
    /// matrix, interior degrees of freedom only (`∂O` excluded).
    pub offdiag_norm: f64,
    pub diag_norm: f64,
}

/// How strongly the final momenta in one region respond to initial data
/// in the other: the normalized off-diagonal block of `δπ_f/δφ_i`.
pub fn cross_sensitivity(
    spec: &ActionSpec,
    dec: &RegionDecomposition,
    ex: &ExtremalPath,
) -> Result<CrossSensitivity> {
    if !dec.parent().compatible(spec.mesh()) {
        return Err(Error::MeshMismatch(String::from(
            "decomposition parent differs from the spec mesh",
        )));
    }
    let vv = van_vleck(spec, ex, VanVleckMethod::HessianBlock)?;
    let free = spec.mesh().free_sites();
    let side_of = |parent_site: usize| -> Option<Side> {
        if dec.interior_o().contains(&parent_site) {
            Some(Side::O)
        } else if dec.interior_n().contains(&parent_site) {
            Some(Side::N)
        } else {
            None
        }
    };
    let mut off = 0.0;
    let mut diag = 0.0;
    for (r, &x) in free.iter().enumerate() {
        for (c, &y) in free.iter().enumerate() {
            let (sx, sy) = match (side_of(x), side_of(y)) {
                (Some(a), Some(b)) => (a, b),
                _ => continue, // boundary rows/columns are the interface
            };
            let v = vv.matrix[(r, c)] * vv.matrix[(r, c)];
            if sx == sy {
                diag += v;
            } else {
                off += v;
            }
        }
    }
    let diag_norm = diag.sqrt();
    Ok(CrossSensitivity {
        offdiag_norm: if diag_norm > 0.0 {
            off.sqrt() / diag_norm
        } else {
            f64::INFINITY
        },
        diag_norm,
    })
}

/// Joint-versus-product comparison of semi-classical kernels.
#[derive(Debug, Clone)]
pub struct ClusterReport {
    pub k_joint: Complex64,
    pub k_product: Complex64,
    /// `|K_joint − K_product| / |K_joint|`; `None` when the joint kernel
    /// vanishes and the defect is undefined.
    pub relative_defect: Option<f64>,
    pub joint_count: usize,
    pub intrinsic_counts: (usize, usize),
    /// Extremal count of the boundary sector (1 when the separating set
    /// is empty).
    pub boundary_count: usize,
    /// Reindexing check: joint extremal count equals the product of the
    /// per-sector counts (the bijection behind cluster decomposition).
    pub count_product_matches: bool,
}

/// Compare the joint kernel against the product of the two regions'
/// intrinsic kernels between projected endpoints. Mutual independence of
/// the regions is the caller's to test or assert.
///
/// When the decomposition separates through a nonempty site set, those
/// sites carry their own degrees of freedom (free in the joint problem,
/// Dirichlet in both intrinsic ones); their sector's kernel enters the
/// product as a third factor, solved from a straight-line seed.
#[allow(clippy::too_many_arguments)]
pub fn cluster_check(
    spec: &ActionSpec,
    dec: &RegionDecomposition,
    phi_i: &FieldConfig,
    phi_f: &FieldConfig,
    seeds_joint: &[Path],
    seeds_o: &[Path],
    seeds_n: &[Path],
    hbar: f64,
) -> Result<ClusterReport> {
    let tol = SolverOptions::default().tol;
    let joint = enumerate(spec, phi_i, phi_f, seeds_joint, tol)?;
    if joint.is_empty() {
        return Err(Error::Inconclusive(String::from(
            "no joint extremal converged",
        )));
    }
    let k_joint = kernel(spec, &joint, hbar)?.amplitude;

    let mut k_product = Complex64::new(1.0, 0.0);
    let mut counts = [0usize; 2];
    for (idx, (side, seeds)) in [(Side::O, seeds_o), (Side::N, seeds_n)].iter().enumerate() {
        let intrinsic = spec.intrinsic(dec, *side)?;
        let pi = dec.project(*side, phi_i)?;
        let pf = dec.project(*side, phi_f)?;
        let set = enumerate(&intrinsic, &pi, &pf, seeds, tol)?;
        if set.is_empty() {
            return Err(Error::Inconclusive(format!(
                "no intrinsic extremal converged on side {side:?}"
            )));
        }
        counts[idx] = set.len();
        k_product *= kernel(&intrinsic, &set, hbar)?.amplitude;
    }
    let mut boundary_count = 1usize;
    if let Some(bspec) = spec.boundary_sector(dec)? {
        let bi = dec.project_boundary(phi_i)?.expect("boundary exists");
        let bf = dec.project_boundary(phi_f)?.expect("boundary exists");
        let seed = Path::linear(&bi, &bf, spec.time_steps(), spec.total_time())?;
        let set = enumerate(&bspec, &bi, &bf, &[seed], tol)?;
        if set.is_empty() {
            return Err(Error::Inconclusive(String::from(
                "no boundary-sector extremal converged",
            )));
        }
        boundary_count = set.len();
        k_product *= kernel(&bspec, &set, hbar)?.amplitude;
    }

    let denom = k_joint.norm();
    let relative_defect = if denom > 0.0 {
        Some((k_joint - k_product).norm() / denom)
    } else {
        None
    };
    Ok(ClusterReport {
        k_joint,
        k_product,
        relative_defect,
        joint_count: joint.len(),
        intrinsic_counts: (counts[0], counts[1]),
        boundary_count,
        count_product_matches: joint.len() == counts[0] * counts[1] * boundary_count,
    })
}

/// Convenience wrapper bundling a spec with endpoints for kernel
/// evaluation between explicit configurations.
pub fn kernel_between(
    spec: &ActionSpec,
    phi_i: &FieldConfig,
    phi_f: &FieldConfig,
    seeds: &[Path],
    hbar: f64,
) -> Result<KernelValue> {
    let set = enumerate(spec, phi_i, phi_f, seeds, SolverOptions::default().tol)?;
    if set.is_empty() {
        return Err(Error::Inconclusive(String::from("no extremal converged")));
    }
    kernel(spec, &set, hbar)
}

/// Shared fixture helper: the spec of `n` mutually uncoupled harmonic
/// oscillators with the given frequencies squared.
pub fn uncoupled_oscillators(
    freq_sq: Vec<f64>,
    time_steps: usize,
    total_time: f64,
) -> Result<ActionSpec> {
    let mesh = Arc::new(crate::mesh::Mesh::degrees_of_freedom(freq_sq.len())?);
    ActionSpec::new(
        mesh,
        crate::metric::SuperMetric::FlatL2,
        crate::action::Potential::site_quadratic(freq_sq),
        time_steps,
        total_time,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Potential;
    use crate::mesh::Mesh;
    use crate::metric::SuperMetric;
    use crate::solve::{seeds, solve};
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn solved_particle(
        potential: Potential,
        steps: usize,
        total_time: f64,
        x_i: f64,
        x_f: f64,
    ) -> (ActionSpec, ExtremalPath) {
        let mesh = Arc::new(Mesh::degrees_of_freedom(1).unwrap());
        let spec = ActionSpec::new(
            mesh.clone(),
            SuperMetric::FlatL2,
            potential,
            steps,
            total_time,
        )
        .unwrap();
        let a = FieldConfig::constant(mesh.clone(), x_i);
        let b = FieldConfig::constant(mesh, x_f);
        let guess = Path::linear(&a, &b, steps, total_time).unwrap();
        let ex = solve(&spec, &a, &b, &guess, 1e-12).unwrap();
        (spec, ex)
    }

    #[test]
    fn free_particle_determinant_is_inverse_time() {
        let (spec, ex) = solved_particle(Potential::None, 100, 1.0, 0.0, 1.0);
        for method in [
            VanVleckMethod::FiniteDifference,
            VanVleckMethod::HessianBlock,
        ] {
            let vv = van_vleck(&spec, &ex, method).unwrap();
            assert_relative_eq!(vv.determinant, 1.0, epsilon = 1e-6);
            assert!(!vv.near_caustic);
        }
    }

    #[test]
    fn harmonic_oscillator_determinant_closed_form() {
        // Δ = mω / sin(ωT) = 1/sin(1) ≈ 1.1884 at m = ω = T = 1.
        let (spec, ex) = solved_particle(Potential::site_quadratic(vec![1.0]), 400, 1.0, 0.0, 1.0);
        let expect = 1.0 / 1.0f64.sin();
        for method in [
            VanVleckMethod::FiniteDifference,
            VanVleckMethod::HessianBlock,
        ] {
            let vv = van_vleck(&spec, &ex, method).unwrap();
            assert!(
                (vv.determinant - expect).abs() < 1e-4,
                "{method:?}: {} vs {expect}",
                vv.determinant
            );
        }
    }

    #[test]
    fn methods_agree_to_relative_1e4() {
        let (spec, ex) = solved_particle(Potential::site_quadratic(vec![2.5]), 200, 0.8, 0.3, -0.6);
        let fd = van_vleck(&spec, &ex, VanVleckMethod::FiniteDifference).unwrap();
        let hb = van_vleck(&spec, &ex, VanVleckMethod::HessianBlock).unwrap();
        assert_relative_eq!(fd.determinant, hb.determinant, max_relative = 1e-4);
    }

    #[test]
    fn uncoupled_determinant_factorizes() {
        let spec = uncoupled_oscillators(vec![1.0, 4.0], 200, 1.0).unwrap();
        let mesh = spec.mesh().clone();
        let a = FieldConfig::new(mesh.clone(), vec![0.0, 0.2]).unwrap();
        let b = FieldConfig::new(mesh, vec![1.0, -0.5]).unwrap();
        let guess = Path::linear(&a, &b, 200, 1.0).unwrap();
        let ex = solve(&spec, &a, &b, &guess, 1e-12).unwrap();
        let vv = van_vleck(&spec, &ex, VanVleckMethod::HessianBlock).unwrap();
        // Block-diagonal sensitivity: det = product of 1-D determinants
        // 1/sin(1) · 2/sin(2).
        let expect = (1.0 / 1.0f64.sin()) * (2.0 / 2.0f64.sin());
        assert_relative_eq!(vv.determinant, expect, max_relative = 1e-4);
        // And the finite-difference route agrees.
        let fd = van_vleck(&spec, &ex, VanVleckMethod::FiniteDifference).unwrap();
        assert_relative_eq!(fd.determinant, vv.determinant, max_relative = 1e-4);
    }

    #[test]
    fn single_trivial_extremal_gives_unit_amplitude() {
        // S = 0, Δ = 1: amplitude is exactly 1 + 0i up to solver noise.
        let (spec, ex) = solved_particle(Potential::None, 50, 1.0, 0.0, 0.0);
        let set = ExtremalSet {
            extremals: alloc::vec![ex],
            endpoints: (
                FieldConfig::constant(spec.mesh().clone(), 0.0),
                FieldConfig::constant(spec.mesh().clone(), 0.0),
            ),
            dedup_threshold: 1e-4,
            failures: alloc::vec![],
        };
        let k = kernel(&spec, &set, 1.0).unwrap();
        assert_relative_eq!(k.amplitude.re, 1.0, epsilon = 1e-8);
        assert!(k.amplitude.im.abs() < 1e-8);
    }

    #[test]
    fn free_particle_kernel_matches_exact_propagator() {
        // K = √(1/T) exp(i (x_f − x_i)²/(2T)) for m = ħ = 1.
        let (spec, ex) = solved_particle(Potential::None, 100, 0.7, 0.0, 1.3);
        let set = ExtremalSet {
            extremals: alloc::vec![ex],
            endpoints: (
                FieldConfig::constant(spec.mesh().clone(), 0.0),
                FieldConfig::constant(spec.mesh().clone(), 1.3),
            ),
            dedup_threshold: 1e-4,
            failures: alloc::vec![],
        };
        let k = kernel(&spec, &set, 1.0).unwrap();
        let amp = (1.0f64 / 0.7).sqrt();
        let phase = 1.3 * 1.3 / (2.0 * 0.7);
        assert_relative_eq!(k.amplitude.re, amp * phase.cos(), epsilon = 1e-6);
        assert_relative_eq!(k.amplitude.im, amp * phase.sin(), epsilon = 1e-6);
    }

    #[test]
    fn opposite_phases_cancel() {
        // Two extremals with equal Δ and actions differing by πħ
        // interfere destructively; build the sum directly from terms.
        let (spec, ex) = solved_particle(Potential::None, 50, 1.0, 0.0, 1.0);
        let mut ex2 = ex.clone();
        ex2.on_shell_action += PI; // phase shift by π at ħ = 1
                                   // Shift one path far away so dedup keeps both.
        for k in 0..=50 {
            let v = ex2.path.slice(k).value(0) + 100.0;
            ex2.path.slice_mut(k).set(0, v);
        }
        let set = ExtremalSet {
            extremals: alloc::vec![ex, ex2],
            endpoints: (
                FieldConfig::constant(spec.mesh().clone(), 0.0),
                FieldConfig::constant(spec.mesh().clone(), 1.0),
            ),
            dedup_threshold: 1e-4,
            failures: alloc::vec![],
        };
        let k = kernel(&spec, &set, 1.0).unwrap();
        assert!(k.amplitude.norm() < 1e-12, "amplitude {}", k.amplitude);
    }

    #[test]
    fn caustic_refused_without_override() {
        // Sit 1e-9 away from the *discrete* focal time T* = 2K sin(π/2K)
        // of the lattice oscillator, where the determinant blows past the
        // magnification threshold. The solver's own conjugate-point guard
        // would veto such a solve, so it is disabled here on purpose: the
        // kernel's caustic check is an independent second gate.
        let steps = 50usize;
        let t_focal = 2.0 * steps as f64 * (PI / (2.0 * steps as f64)).sin() + 1e-9;
        let mesh = Arc::new(Mesh::degrees_of_freedom(1).unwrap());
        let spec = ActionSpec::new(
            mesh.clone(),
            SuperMetric::FlatL2,
            Potential::site_quadratic(vec![1.0]),
            steps,
            t_focal,
        )
        .unwrap();
        let a = FieldConfig::constant(mesh.clone(), 0.0);
        let b = FieldConfig::constant(mesh, 1e-6);
        let guess = Path::linear(&a, &b, steps, t_focal).unwrap();
        let opts = SolverOptions {
            tol: 1e-6,
            caustic_threshold: 0.0,
            ..SolverOptions::default()
        };
        let ex = solve_seeded(&spec, &guess, &opts, "focal").unwrap();
        let vv = van_vleck(&spec, &ex, VanVleckMethod::HessianBlock).unwrap();
        assert!(vv.near_caustic, "determinant {}", vv.determinant);
        let set = ExtremalSet {
            extremals: alloc::vec![ex],
            endpoints: (
                FieldConfig::constant(spec.mesh().clone(), 0.0),
                FieldConfig::constant(spec.mesh().clone(), 1e-6),
            ),
            dedup_threshold: 1e-4,
            failures: alloc::vec![],
        };
        match kernel(&spec, &set, 1.0) {
            Err(Error::Caustic { .. }) => {}
            other => panic!("expected caustic error, got {other:?}"),
        }
        assert!(kernel_with_options(&spec, &set, 1.0, true).is_ok());
    }

    #[test]
    fn global_potential_shift_only_rotates_phase() {
        // Shifting V by a constant adds c·T to every action: |K| is
        // unchanged.
        let mesh = Arc::new(Mesh::degrees_of_freedom(1).unwrap());
        let a = FieldConfig::constant(mesh.clone(), 0.0);
        let b = FieldConfig::constant(mesh.clone(), 1.0);
        let mut amplitudes = Vec::new();
        for shift in [0.0, 0.37] {
            // Constant shift realized as a quadratic potential around a
            // far-away center... simplest honest route: add the constant
            // to the action terms directly via a manual sum over two
            // winding-style extremals.
            let spec = ActionSpec::new(mesh.clone(), SuperMetric::FlatL2, Potential::None, 60, 1.0)
                .unwrap();
            let seeds_list: Vec<Path> = [0i64, 1]
                .iter()
                .map(|&w| seeds::winding(&a, &b, 60, 1.0, &[w], 2.0 * PI).unwrap())
                .collect();
            let mut set = enumerate(&spec, &a, &b, &seeds_list, 1e-11).unwrap();
            for ex in set.extremals.iter_mut() {
                ex.on_shell_action += shift * 1.0;
            }
            amplitudes.push(kernel(&spec, &set, 1.0).unwrap().amplitude.norm());
        }
        assert_relative_eq!(amplitudes[0], amplitudes[1], max_relative = 1e-10);
    }
}
