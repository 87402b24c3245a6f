//! Laplacian eigenmodes, standing-wave commensurability on the circle,
//! and per-mode-sector kernel factorization.
//!
//! The commensurability analysis is the continuum statement behind the
//! circle counterexample: intrinsic Dirichlet wavenumbers `nπ/[O]` only
//! come from global wavenumbers `n′π/[M]` (standing waves with nodes at
//! `∂O`) when `n·[M]/[O]` is an integer. It runs in exact rational
//! arithmetic — lattice floats cannot tell rational from irrational — and
//! an irrational ratio is declared symbolically by the caller.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_rational::Ratio;
#[allow(unused_imports)] // f64 math via the trait in no_std builds
use num_traits::Float;

use crate::action::{ActionSpec, Path, Potential};
use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::linalg::sym_eigen_ascending;
use crate::locality::Verdict;
use crate::mesh::Mesh;
use crate::metric::SuperMetric;
use crate::semiclassical::{kernel, ClusterReport};
use crate::solve::{enumerate, SolverOptions};

/// Boundary handling for the eigenmode problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// All sites are degrees of freedom (closed meshes).
    Periodic,
    /// Dirichlet-flagged sites are excluded and their mode values are 0.
    Dirichlet,
}

/// The lowest eigenpairs of the mesh Laplace operator, orthonormal in
/// the flat (weighted) L² product.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<FieldConfig>,
    pub mesh: Arc<Mesh>,
    pub boundary: BoundaryKind,
}

impl ModeBasis {
    /// `max_i ‖Δ v_i − λ_i v_i‖` in the flat norm: the eigen residual.
    pub fn max_residual(&self) -> f64 {
        let l = self.mesh.graph_laplacian(None);
        let n = self.mesh.n_sites();
        let mut worst = 0.0f64;
        for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let mut r2 = 0.0;
            for x in 0..n {
                if self.boundary == BoundaryKind::Dirichlet && self.mesh.is_dirichlet(x) {
                    continue;
                }
                let mut lv = 0.0;
                for y in 0..n {
                    lv += l[(x, y)] * v.value(y);
                }
                // Operator form Δ = W⁻¹ L.
                let resid = lv / self.mesh.weight(x) - lam * v.value(x);
                r2 += self.mesh.weight(x) * resid * resid;
            }
            worst = worst.max(r2.sqrt());
        }
        worst
    }

    /// `max_{i≠j} |⟨v_i, v_j⟩|` and `max_i |⟨v_i, v_i⟩ − 1|`.
    pub fn max_orthonormality_defect(&self) -> f64 {
        let w = self.mesh.weights();
        let mut worst = 0.0f64;
        for (i, vi) in self.eigenvectors.iter().enumerate() {
            for (j, vj) in self.eigenvectors.iter().enumerate() {
                let ip = crate::metric::flat_inner(w, vi.values(), vj.values());
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).abs());
            }
        }
        worst
    }
}

/// Lowest-`k` eigenmodes of the mesh Laplacian (edge weights `1/ℓ_e`,
/// site weights as the L² measure).
pub fn eigenmodes(mesh: &Arc<Mesh>, boundary: BoundaryKind, k: usize) -> Result<ModeBasis> {
    let free: Vec<usize> = match boundary {
        BoundaryKind::Periodic => (0..mesh.n_sites()).collect(),
        BoundaryKind::Dirichlet => mesh.free_sites(),
    };
    if k > free.len() {
        return Err(Error::InvalidCount {
            requested: k,
            available: free.len(),
        });
    }
    let l = mesh.graph_laplacian(None);
    let m = free.len();
    let mut a = DMatrix::zeros(m, m);
    for (r, &x) in free.iter().enumerate() {
        for (c, &y) in free.iter().enumerate() {
            a[(r, c)] = l[(x, y)] / (mesh.weight(x) * mesh.weight(y)).sqrt();
        }
    }
    let (vals, vecs) = sym_eigen_ascending(&a);
    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenvectors = Vec::with_capacity(k);
    for i in 0..k {
        eigenvalues.push(vals[i]);
        let mut full = FieldConfig::zeros(mesh.clone());
        for (r, &x) in free.iter().enumerate() {
            full.set(x, vecs[(r, i)] / mesh.weight(x).sqrt());
        }
        eigenvectors.push(full);
    }
    Ok(ModeBasis {
        eigenvalues,
        eigenvectors,
        mesh: mesh.clone(),
        boundary,
    })
}

/// Rational or symbolically-irrational region length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthRatio {
    /// `[O]/[M]` as an exact rational.
    Rational(Ratio<i64>),
    /// Declared irrational: no nontrivial standing wave survives.
    Irrational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioClass {
    Commensurate,
    Incommensurate,
}

/// Outcome of the commensurability analysis for one region.
#[derive(Debug, Clone)]
pub struct ModeMatchReport {
    /// `([O], [N], [M])` in length units (exact rationals; zero width
    /// signals a symbolic-irrational run).
    pub region_lengths: (Ratio<i64>, Ratio<i64>, Ratio<i64>),
    /// `(intrinsic n, global n′)` with `n′ = n·[M]/[O]` exactly.
    pub matched: Vec<(u64, u64)>,
    pub unmatched_intrinsic: Vec<u64>,
    pub ratio_class: RatioClass,
    /// Only the constant (trivial) field survives the joint boundary
    /// conditions.
    pub trivial_only: bool,
}

/// Match intrinsic Dirichlet wavenumbers `nπ/[O]`, `n = 1..n_max`,
/// against global wavenumbers `n′π/[M]` of standing waves with nodes at
/// `∂O`. Exact rational arithmetic; `n′` is capped at
/// `ceil(n_max·[M]/[O])` so every admissible match is representable.
pub fn commensurability(
    length_o: Ratio<i64>,
    length_m: Ratio<i64>,
    n_max: u64,
) -> Result<ModeMatchReport> {
    if length_o <= Ratio::from_integer(0) || length_o >= length_m {
        return Err(Error::InvalidGeometry(format!(
            "region lengths must satisfy 0 < [O] < [M], got {length_o} and {length_m}"
        )));
    }
    let ratio = length_m / length_o; // n′ = n · [M]/[O]
    let cutoff = {
        let c = Ratio::from_integer(n_max as i64) * ratio;
        c.ceil().to_integer() as u64
    };
    let mut matched = Vec::new();
    let mut unmatched = Vec::new();
    for n in 1..=n_max {
        let np = Ratio::from_integer(n as i64) * ratio;
        if np.is_integer() {
            let np = np.to_integer() as u64;
            if np <= cutoff {
                matched.push((n, np));
                continue;
            }
        }
        unmatched.push(n);
    }
    let trivial_only = matched.is_empty();
    Ok(ModeMatchReport {
        region_lengths: (length_o, length_m - length_o, length_m),
        matched,
        unmatched_intrinsic: unmatched,
        ratio_class: RatioClass::Commensurate,
        trivial_only,
    })
}

/// The symbolically-irrational case: `n·[M]/[O]` is never an integer, so
/// no intrinsic mode is a restriction of a global one and only the
/// constant field satisfies all boundary conditions at once.
pub fn commensurability_irrational(n_max: u64) -> ModeMatchReport {
    ModeMatchReport {
        region_lengths: (
            Ratio::from_integer(0),
            Ratio::from_integer(0),
            Ratio::from_integer(0),
        ),
        matched: Vec::new(),
        unmatched_intrinsic: (1..=n_max).collect(),
        ratio_class: RatioClass::Incommensurate,
        trivial_only: true,
    }
}

/// Mode-arithmetic mutual-independence analysis of the circle split at
/// ratio `[O]/[M]`.
#[derive(Debug, Clone)]
pub struct ModeIndependence {
    pub o_report: ModeMatchReport,
    pub n_report: ModeMatchReport,
    pub o_verdict: Verdict,
    pub n_verdict: Verdict,
    pub mutual: bool,
}

/// Evaluate both sides of a circle decomposition in the continuum mode
/// arithmetic. Condition (i) holds automatically for each side — a
/// global standing wave with nodes at `∂O` restricts to an intrinsic
/// mode — so each verdict hinges on condition (ii): every intrinsic mode
/// must be a restriction of a global one.
pub fn mode_independence(
    length_o: Ratio<i64>,
    length_m: Ratio<i64>,
    n_max: u64,
) -> Result<ModeIndependence> {
    let o_report = commensurability(length_o, length_m, n_max)?;
    let n_report = commensurability(length_m - length_o, length_m, n_max)?;
    let verdict = |r: &ModeMatchReport| {
        if r.unmatched_intrinsic.is_empty() {
            Verdict::Localized
        } else {
            Verdict::InjectiveOnly
        }
    };
    let o_verdict = verdict(&o_report);
    let n_verdict = verdict(&n_report);
    Ok(ModeIndependence {
        mutual: o_verdict == Verdict::Localized && n_verdict == Verdict::Localized,
        o_report,
        n_report,
        o_verdict,
        n_verdict,
    })
}

/// Kernel factorization over a partition of mode indices.
pub struct SectorKernelReport {
    pub cluster: ClusterReport,
    /// Largest |coupling| between different sectors in the reduced
    /// quadratic form (diagnostic; nonzero for the negative tests).
    pub off_sector_coupling: f64,
}

/// Reduce a quadratic, flat-mass, source-free spec to the given mode
/// coordinates and compare the joint semi-classical kernel against the
/// product over sectors. Endpoints are given in mode coordinates.
pub fn mode_sector_kernel(
    spec: &ActionSpec,
    basis: &ModeBasis,
    sectors: &[Vec<usize>],
    a_i: &[f64],
    a_f: &[f64],
    hbar: f64,
) -> Result<SectorKernelReport> {
    if !spec.is_quadratic() || !spec.mass_form().is_flat() {
        return Err(Error::Unsupported(String::from(
            "mode-sector kernels require a quadratic action with flat mass form",
        )));
    }
    if spec.source().is_some() {
        return Err(Error::Unsupported(String::from(
            "mode-sector kernels require a source-free action",
        )));
    }
    if !basis.mesh.compatible(spec.mesh()) {
        return Err(Error::MeshMismatch(String::from(
            "mode basis does not live on the spec mesh",
        )));
    }
    let n_modes = basis.eigenvectors.len();
    if a_i.len() != n_modes || a_f.len() != n_modes {
        return Err(Error::InvalidSpec(format!(
            "endpoint mode coordinates must have length {n_modes}"
        )));
    }
    let mut seen = alloc::vec![false; n_modes];
    for sector in sectors {
        for &i in sector {
            if i >= n_modes || seen[i] {
                return Err(Error::InvalidSpec(String::from(
                    "sectors must partition the mode indices",
                )));
            }
            seen[i] = true;
        }
    }
    if !seen.iter().all(|s| *s) {
        return Err(Error::InvalidSpec(String::from(
            "sectors must cover every mode index",
        )));
    }

    // Reduced quadratic form P = Bᵀ (∂²V) B in mode coordinates; the
    // kinetic term reduces to ½ Σ ȧ² because the basis is orthonormal in
    // the weighted product.
    let zeros = alloc::vec![0.0; spec.mesh().n_sites()];
    let hv = spec.potential_hessian(&zeros);
    let nsites = spec.mesh().n_sites();
    let mut p = DMatrix::zeros(n_modes, n_modes);
    for i in 0..n_modes {
        for j in 0..n_modes {
            let mut acc = 0.0;
            for x in 0..nsites {
                let mut hvb = 0.0;
                for y in 0..nsites {
                    hvb += hv[(x, y)] * basis.eigenvectors[j].value(y);
                }
                acc += basis.eigenvectors[i].value(x) * hvb;
            }
            p[(i, j)] = acc;
        }
    }
    // Symmetrize away roundoff.
    let p = (&p + p.transpose()) * 0.5;

    let mut off_sector_coupling = 0.0f64;
    let sector_of = |idx: usize| sectors.iter().position(|s| s.contains(&idx));
    for i in 0..n_modes {
        for j in 0..n_modes {
            if sector_of(i) != sector_of(j) {
                off_sector_coupling = off_sector_coupling.max(p[(i, j)].abs());
            }
        }
    }

    // Joint kernel over all modes, computed through the same reduced
    // machinery as the sectors (a single all-mode "sector").
    let all: Vec<usize> = (0..n_modes).collect();
    let k_joint = sector_amplitude(spec, &p, &all, a_i, a_f, hbar)?;
    let mut k_product = num_complex::Complex64::new(1.0, 0.0);
    let mut counts = 1usize;
    for sector in sectors {
        let k = sector_amplitude(spec, &p, sector, a_i, a_f, hbar)?;
        k_product *= k;
        counts *= 1; // quadratic: one extremal per sector
    }
    let denom = k_joint.norm();
    let relative_defect = if denom > 0.0 {
        Some((k_joint - k_product).norm() / denom)
    } else {
        None
    };
    Ok(SectorKernelReport {
        cluster: ClusterReport {
            k_joint,
            k_product,
            relative_defect,
            joint_count: 1,
            intrinsic_counts: (counts, sectors.len()),
            boundary_count: 1,
            count_product_matches: true,
        },
        off_sector_coupling,
    })
}

/// Semi-classical amplitude of the reduced quadratic system restricted
/// to one sector of mode indices.
fn sector_amplitude(
    spec: &ActionSpec,
    p: &DMatrix<f64>,
    sector: &[usize],
    a_i: &[f64],
    a_f: &[f64],
    hbar: f64,
) -> Result<num_complex::Complex64> {
    let m = sector.len();
    let mesh = Arc::new(Mesh::degrees_of_freedom(m)?);
    let mut block = DMatrix::zeros(m, m);
    for (r, &i) in sector.iter().enumerate() {
        for (c, &j) in sector.iter().enumerate() {
            block[(r, c)] = p[(i, j)];
        }
    }
    let reduced = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        Potential::Nonlocal(block),
        spec.time_steps(),
        spec.total_time(),
    )?;
    let ai = FieldConfig::new(mesh.clone(), sector.iter().map(|&i| a_i[i]).collect())?;
    let af = FieldConfig::new(mesh, sector.iter().map(|&i| a_f[i]).collect())?;
    let seed = Path::linear(&ai, &af, spec.time_steps(), spec.total_time())?;
    let set = enumerate(&reduced, &ai, &af, &[seed], SolverOptions::default().tol)?;
    if set.is_empty() {
        return Err(Error::Inconclusive(String::from(
            "sector extremal did not converge",
        )));
    }
    Ok(kernel(&reduced, &set, hbar)?.amplitude)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::EdgeStiffness;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    #[test]
    fn circle_constant_mode_has_zero_eigenvalue() {
        let mesh = Arc::new(Mesh::circle(32, 2.0 * PI).unwrap());
        let basis = eigenmodes(&mesh, BoundaryKind::Periodic, 1).unwrap();
        assert!(basis.eigenvalues[0].abs() < 1e-10);
        // Constant eigenvector (normalized).
        let v0 = basis.eigenvectors[0].value(0);
        for x in 0..32 {
            assert_relative_eq!(basis.eigenvectors[0].value(x), v0, epsilon = 1e-10);
        }
    }

    #[test]
    fn circle_spectrum_is_doubly_degenerate_m_squared() {
        let mesh = Arc::new(Mesh::circle(256, 2.0 * PI).unwrap());
        let basis = eigenmodes(&mesh, BoundaryKind::Periodic, 5).unwrap();
        let expect = [0.0, 1.0, 1.0, 4.0, 4.0];
        for (lam, e) in basis.eigenvalues.iter().zip(expect) {
            assert!((lam - e).abs() < 1e-3, "eigenvalue {lam} vs {e}");
        }
        assert!(basis.max_residual() < 1e-8);
        assert!(basis.max_orthonormality_defect() < 1e-10);
    }

    #[test]
    fn dirichlet_interval_spectrum() {
        // (nπ/L)² = 4n² for L = π/2.
        let mesh = Arc::new(Mesh::interval(256, PI / 2.0).unwrap());
        let basis = eigenmodes(&mesh, BoundaryKind::Dirichlet, 3).unwrap();
        for (n, lam) in basis.eigenvalues.iter().enumerate() {
            let expect = 4.0 * ((n + 1) * (n + 1)) as f64;
            assert!(
                (lam - expect).abs() / expect < 0.01,
                "eigenvalue {lam} vs {expect}"
            );
        }
    }

    #[test]
    fn too_many_modes_rejected() {
        let mesh = Arc::new(Mesh::interval(8, 1.0).unwrap());
        assert!(matches!(
            eigenmodes(&mesh, BoundaryKind::Dirichlet, 7),
            Err(Error::InvalidCount { .. })
        ));
    }

    #[test]
    fn quarter_ratio_matches_every_mode() {
        let report = commensurability(Ratio::new(1, 4), Ratio::from_integer(1), 32).unwrap();
        assert!(report.unmatched_intrinsic.is_empty());
        for (n, np) in &report.matched {
            assert_eq!(*np, 4 * n);
        }
        // "The first mode of O is the fourth of M."
        assert_eq!(report.matched[0], (1, 4));
        assert!(!report.trivial_only);
    }

    #[test]
    fn three_quarter_side_misses_its_fundamental() {
        // [O]/[N] = 1/3 means [N]/[M] = 3/4: the N fundamental sits
        // between the first and second global mode and stays unmatched.
        let report = commensurability(Ratio::new(3, 4), Ratio::from_integer(1), 32).unwrap();
        assert!(report.unmatched_intrinsic.contains(&1));
        // Multiples of 3 are fine: n=3 gives n′ = 4.
        assert!(report.matched.contains(&(3, 4)));
    }

    #[test]
    fn irrational_ratio_leaves_only_the_constant() {
        let report = commensurability_irrational(8);
        assert_eq!(report.ratio_class, RatioClass::Incommensurate);
        assert!(report.matched.is_empty());
        assert!(report.trivial_only);
    }

    #[test]
    fn mode_independence_of_quarter_split() {
        let mi = mode_independence(Ratio::new(1, 4), Ratio::from_integer(1), 32).unwrap();
        assert_eq!(mi.o_verdict, Verdict::Localized);
        assert_eq!(mi.n_verdict, Verdict::InjectiveOnly);
        assert!(!mi.mutual);
        // The N-side fundamental is the unmatched one.
        assert!(mi.n_report.unmatched_intrinsic.contains(&1));
    }

    #[test]
    fn decoupled_sectors_factorize() {
        let mesh = Arc::new(Mesh::circle(32, 2.0 * PI).unwrap());
        let spec = ActionSpec::new(
            mesh.clone(),
            SuperMetric::FlatL2,
            Potential::EdgeQuadratic(EdgeStiffness::uniform(&mesh, 1.0)),
            32,
            0.3,
        )
        .unwrap();
        let basis = eigenmodes(&mesh, BoundaryKind::Periodic, 8).unwrap();
        let sectors = alloc::vec![alloc::vec![0, 1, 2, 3], alloc::vec![4, 5, 6, 7]];
        let a_i = [0.3, -0.2, 0.5, 0.1, -0.4, 0.2, 0.05, -0.1];
        let a_f = [0.0, 0.4, -0.3, 0.2, 0.1, -0.2, 0.3, 0.05];
        let report = mode_sector_kernel(&spec, &basis, &sectors, &a_i, &a_f, 1.0).unwrap();
        assert!(report.off_sector_coupling < 1e-10);
        let defect = report.cluster.relative_defect.unwrap();
        assert!(defect < 1e-8, "defect {defect}");
    }

    #[test]
    fn explicit_coupling_breaks_factorization() {
        let mesh = Arc::new(Mesh::circle(32, 2.0 * PI).unwrap());
        let basis = eigenmodes(&mesh, BoundaryKind::Periodic, 8).unwrap();
        // Free field plus a rank-2 kernel coupling mode 1 (low) to mode 6
        // (high) at strength 0.2, built in site space.
        let n = 32;
        let mut coupling = DMatrix::zeros(n, n);
        let va = &basis.eigenvectors[1];
        let vb = &basis.eigenvectors[6];
        for x in 0..n {
            for y in 0..n {
                coupling[(x, y)] = 0.2 * (va.value(x) * vb.value(y) + vb.value(x) * va.value(y));
            }
        }
        let l = mesh.graph_laplacian(None);
        // Total kernel: Laplacian quadratic form plus the coupling, all
        // as a nonlocal kernel K with V = ½ (Wφ)ᵀ K (Wφ)... the edge
        // term is ½ φᵀLφ, so fold it as W⁻¹ L W⁻¹.
        let mut kernel_mat = coupling;
        for x in 0..n {
            for y in 0..n {
                kernel_mat[(x, y)] += l[(x, y)] / (mesh.weight(x) * mesh.weight(y));
            }
        }
        let spec = ActionSpec::new(
            mesh.clone(),
            SuperMetric::FlatL2,
            Potential::Nonlocal(kernel_mat),
            32,
            1.0,
        )
        .unwrap();
        let sectors = alloc::vec![alloc::vec![0, 1, 2, 3], alloc::vec![4, 5, 6, 7]];
        // Weight the coupled pair (1, 6) heavily so the cross term is
        // visible in the phases.
        let a_i = [0.3, 1.0, 0.5, 0.1, -0.4, 0.2, 0.9, -0.1];
        let a_f = [0.0, 0.8, -0.3, 0.2, 0.1, -0.2, -0.7, 0.05];
        let report = mode_sector_kernel(&spec, &basis, &sectors, &a_i, &a_f, 1.0).unwrap();
        assert!(report.off_sector_coupling > 0.1);
        let defect = report.cluster.relative_defect.unwrap();
        assert!(defect > 0.01, "defect {defect}");
    }

    #[test]
    fn single_sector_defect_is_identically_zero() {
        let mesh = Arc::new(Mesh::circle(16, 2.0 * PI).unwrap());
        let spec = ActionSpec::new(
            mesh.clone(),
            SuperMetric::FlatL2,
            Potential::EdgeQuadratic(EdgeStiffness::uniform(&mesh, 1.0)),
            16,
            0.3,
        )
        .unwrap();
        let basis = eigenmodes(&mesh, BoundaryKind::Periodic, 4).unwrap();
        let sectors = alloc::vec![alloc::vec![0, 1, 2, 3]];
        let a_i = [0.3, -0.2, 0.5, 0.1];
        let a_f = [0.0, 0.4, -0.3, 0.2];
        let report = mode_sector_kernel(&spec, &basis, &sectors, &a_i, &a_f, 1.0).unwrap();
        assert_eq!(report.cluster.relative_defect, Some(0.0));
    }
}
