//! Jacobi-type actions `S = ∫ dt (T − V)` and their discrete evaluation.
//!
//! Time discretization: midpoint velocities `(φ_{k+1} − φ_k)/dt` and a
//! trapezoidal potential rule,
//!
//! ```text
//! S = Σ_j  c(m_j)·‖φ_{j+1} − φ_j‖²_W / (2 dt)  −  Σ_k dt_k · U(φ_k)
//! ```
//!
//! with `m_j` the interval midpoint configuration, `c` the mass-form
//! conformal factor (1 for the flat metric), `dt_k = dt` at interior
//! slices and `dt/2` at the endpoints, and `U = V − ⟨j, φ⟩` the potential
//! energy including the optional static source `j`.
//!
//! Terms supported entirely on Dirichlet sites are field-independent
//! constants once the boundary data is fixed; the action omits them, so
//! that for local potentials whose stencil is cut at `∂O` the global
//! action is exactly the sum of the two intrinsic actions.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // f64 math via the trait in no_std builds
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::linalg::sym_eigen_ascending;
use crate::mesh::Mesh;
use crate::metric::{ConformalWeight, SuperMetric};
use crate::region::{RegionDecomposition, Side};

/// Per-edge stiffness coefficients for the spatial-gradient potential,
/// aligned with [`Mesh::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeStiffness {
    values: Vec<f64>,
}

impl EdgeStiffness {
    pub fn uniform(mesh: &Mesh, c: f64) -> EdgeStiffness {
        EdgeStiffness {
            values: vec![c; mesh.edges().len()],
        }
    }

    pub fn from_values(values: Vec<f64>) -> EdgeStiffness {
        EdgeStiffness { values }
    }

    /// Zero out every edge incident to one of the given sites. Cutting at
    /// the `∂O` sites decouples the two sides of a decomposition exactly.
    pub fn cut_at_sites(mut self, mesh: &Mesh, sites: &[usize]) -> EdgeStiffness {
        for (idx, e) in mesh.edges().iter().enumerate() {
            if sites.contains(&e.a) || sites.contains(&e.b) {
                self.values[idx] = 0.0;
            }
        }
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// The potential part of an action.
#[derive(Debug, Clone)]
pub enum Potential {
    /// `V = 0`.
    None,
    /// Lattice Dirichlet energy `½ Σ_e c_e (φ_a − φ_b)²/ℓ_e`: the discrete
    /// spatial-gradient term of a free scalar field.
    EdgeQuadratic(EdgeStiffness),
    /// Per-site polynomial `Σ_x w_x (½ c2_x φ_x² + ¼ c4_x φ_x⁴)`.
    /// `quartic` may be empty for a purely quadratic site potential.
    SitePoly {
        quadratic: Vec<f64>,
        quartic: Vec<f64>,
    },
    /// Dense symmetric coupling kernel:
    /// `V = ½ Σ_{x,y} w_x w_y K(x, y) φ_x φ_y`.
    Nonlocal(DMatrix<f64>),
}

impl Potential {
    pub fn site_quadratic(coeffs: Vec<f64>) -> Potential {
        Potential::SitePoly {
            quadratic: coeffs,
            quartic: Vec::new(),
        }
    }

    /// The `∇⁻²` kernel: pseudo-inverse of the mesh Laplace operator on
    /// the zero-mean subspace, returned as a dense site×site kernel for
    /// [`Potential::Nonlocal`].
    pub fn inverse_laplacian_kernel(mesh: &Mesh) -> DMatrix<f64> {
        let n = mesh.n_sites();
        let l = mesh.graph_laplacian(None);
        let sqrt_w: Vec<f64> = mesh.weights().iter().map(|w| w.sqrt()).collect();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = l[(i, j)] / (sqrt_w[i] * sqrt_w[j]);
            }
        }
        let (vals, vecs) = sym_eigen_ascending(&a);
        let lambda_max = vals.last().copied().unwrap_or(0.0).abs().max(1.0);
        let mut k = DMatrix::zeros(n, n);
        for (m, &lam) in vals.iter().enumerate() {
            if lam.abs() <= 1e-10 * lambda_max {
                continue;
            }
            let v = vecs.column(m);
            for i in 0..n {
                for j in 0..n {
                    k[(i, j)] += v[i] * v[j] / lam;
                }
            }
        }
        // Undo the symmetrizing similarity: K = W^{-1/2} pinv(A) W^{-1/2}.
        for i in 0..n {
            for j in 0..n {
                k[(i, j)] /= sqrt_w[i] * sqrt_w[j];
            }
        }
        k
    }

    /// Value over the counted terms (at least one non-Dirichlet site).
    fn value(&self, mesh: &Mesh, phi: &[f64]) -> f64 {
        match self {
            Potential::None => 0.0,
            Potential::EdgeQuadratic(st) => {
                let mut v = 0.0;
                for (idx, e) in mesh.edges().iter().enumerate() {
                    if mesh.is_dirichlet(e.a) && mesh.is_dirichlet(e.b) {
                        continue;
                    }
                    let d = phi[e.a] - phi[e.b];
                    v += 0.5 * st.values[idx] * d * d / e.length;
                }
                v
            }
            Potential::SitePoly { quadratic, quartic } => {
                let mut v = 0.0;
                for x in 0..mesh.n_sites() {
                    if mesh.is_dirichlet(x) {
                        continue;
                    }
                    let p = phi[x];
                    let mut site = 0.5 * quadratic[x] * p * p;
                    if !quartic.is_empty() {
                        site += 0.25 * quartic[x] * p * p * p * p;
                    }
                    v += mesh.weight(x) * site;
                }
                v
            }
            Potential::Nonlocal(kernel) => {
                let w = mesh.weights();
                let mut v = 0.0;
                for x in 0..mesh.n_sites() {
                    for y in 0..mesh.n_sites() {
                        if mesh.is_dirichlet(x) && mesh.is_dirichlet(y) {
                            continue;
                        }
                        v += 0.5 * w[x] * w[y] * kernel[(x, y)] * phi[x] * phi[y];
                    }
                }
                v
            }
        }
    }

    /// Gradient `∂V/∂φ_x`; entries at Dirichlet sites are not meaningful
    /// and are zeroed by the callers that expose them.
    fn add_grad(&self, mesh: &Mesh, phi: &[f64], out: &mut [f64], scale: f64) {
        match self {
            Potential::None => {}
            Potential::EdgeQuadratic(st) => {
                for (idx, e) in mesh.edges().iter().enumerate() {
                    let g = scale * st.values[idx] * (phi[e.a] - phi[e.b]) / e.length;
                    out[e.a] += g;
                    out[e.b] -= g;
                }
            }
            Potential::SitePoly { quadratic, quartic } => {
                for x in 0..mesh.n_sites() {
                    let p = phi[x];
                    let mut g = quadratic[x] * p;
                    if !quartic.is_empty() {
                        g += quartic[x] * p * p * p;
                    }
                    out[x] += scale * mesh.weight(x) * g;
                }
            }
            Potential::Nonlocal(kernel) => {
                let w = mesh.weights();
                for x in 0..mesh.n_sites() {
                    let mut acc = 0.0;
                    for y in 0..mesh.n_sites() {
                        acc += kernel[(x, y)] * w[y] * phi[y];
                    }
                    out[x] += scale * w[x] * acc;
                }
            }
        }
    }

    /// Dense Hessian `∂²V/∂φ_x∂φ_y` over all sites.
    fn hessian(&self, mesh: &Mesh, phi: &[f64]) -> DMatrix<f64> {
        let n = mesh.n_sites();
        match self {
            Potential::None => DMatrix::zeros(n, n),
            Potential::EdgeQuadratic(st) => mesh.graph_laplacian(Some(st.values())),
            Potential::SitePoly { quadratic, quartic } => {
                let mut h = DMatrix::zeros(n, n);
                for x in 0..n {
                    let mut d = quadratic[x];
                    if !quartic.is_empty() {
                        d += 3.0 * quartic[x] * phi[x] * phi[x];
                    }
                    h[(x, x)] = mesh.weight(x) * d;
                }
                h
            }
            Potential::Nonlocal(kernel) => {
                let w = mesh.weights();
                let mut h = DMatrix::zeros(n, n);
                for x in 0..n {
                    for y in 0..n {
                        h[(x, y)] = w[x] * kernel[(x, y)] * w[y];
                    }
                }
                h
            }
        }
    }

    fn is_quadratic(&self) -> bool {
        match self {
            Potential::None | Potential::EdgeQuadratic(_) | Potential::Nonlocal(_) => true,
            Potential::SitePoly { quartic, .. } => {
                quartic.is_empty() || quartic.iter().all(|c| *c == 0.0)
            }
        }
    }
}

/// A time-discretized field history: `time_steps + 1` slices, all on the
/// same mesh, a constant `dt` apart.
#[derive(Debug, Clone)]
pub struct Path {
    slices: Vec<FieldConfig>,
    dt: f64,
}

impl Path {
    pub fn new(slices: Vec<FieldConfig>, total_time: f64) -> Result<Path> {
        if slices.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "a path needs at least 2 slices, got {}",
                slices.len()
            )));
        }
        if !(total_time > 0.0) || !total_time.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "total time must be positive, got {total_time}"
            )));
        }
        let mesh = slices[0].mesh().clone();
        for s in &slices[1..] {
            if !s.mesh().compatible(&mesh) {
                return Err(Error::MeshMismatch(String::from(
                    "path slices live on different meshes",
                )));
            }
        }
        let dt = total_time / (slices.len() - 1) as f64;
        Ok(Path { slices, dt })
    }

    /// Straight-line interpolation between two configurations.
    pub fn linear(
        phi_i: &FieldConfig,
        phi_f: &FieldConfig,
        time_steps: usize,
        total_time: f64,
    ) -> Result<Path> {
        phi_i.check_compatible(phi_f)?;
        if time_steps < 1 {
            return Err(Error::InvalidSpec(String::from("time_steps must be >= 1")));
        }
        let slices = (0..=time_steps)
            .map(|k| {
                let t = k as f64 / time_steps as f64;
                phi_i
                    .scaled(1.0 - t)
                    .add_scaled(phi_f, t)
                    .expect("same mesh")
            })
            .collect();
        Path::new(slices, total_time)
    }

    pub fn slices(&self) -> &[FieldConfig] {
        &self.slices
    }

    pub fn slice(&self, k: usize) -> &FieldConfig {
        &self.slices[k]
    }

    pub fn set_slice(&mut self, k: usize, cfg: FieldConfig) {
        self.slices[k] = cfg;
    }

    pub fn slice_mut(&mut self, k: usize) -> &mut FieldConfig {
        &mut self.slices[k]
    }

    pub fn n_steps(&self) -> usize {
        self.slices.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.n_steps() as f64
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.slices[0].mesh()
    }

    pub fn initial(&self) -> &FieldConfig {
        &self.slices[0]
    }

    pub fn final_slice(&self) -> &FieldConfig {
        self.slices.last().expect("nonempty path")
    }

    /// Sup over slices of the flat weighted L² distance; the default
    /// path-space metric for deduplication and ε tests.
    pub fn sup_distance(&self, other: &Path) -> Result<f64> {
        if self.slices.len() != other.slices.len() {
            return Err(Error::MeshMismatch(format!(
                "paths have {} and {} slices",
                self.slices.len(),
                other.slices.len()
            )));
        }
        self.slices[0].check_compatible(&other.slices[0])?;
        let w = self.mesh().weights();
        let mut d = 0.0f64;
        for (a, b) in self.slices.iter().zip(&other.slices) {
            d = d.max(crate::metric::flat_distance(w, a.values(), b.values()));
        }
        Ok(d)
    }

    /// Refine by splitting every interval in two (linear interpolation).
    pub fn refined(&self) -> Path {
        let mut slices = Vec::with_capacity(2 * self.slices.len() - 1);
        for k in 0..self.slices.len() - 1 {
            let a = &self.slices[k];
            let b = &self.slices[k + 1];
            slices.push(a.clone());
            slices.push(a.scaled(0.5).add_scaled(b, 0.5).expect("same mesh"));
        }
        slices.push(self.slices.last().expect("nonempty").clone());
        Path::new(slices, self.total_time()).expect("refinement preserves validity")
    }
}

/// Which endpoint of a path an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Initial,
    Final,
}

/// Declarative specification of a Jacobi-type action over a mesh.
#[derive(Debug, Clone)]
pub struct ActionSpec {
    mesh: Arc<Mesh>,
    mass_form: SuperMetric,
    potential: Potential,
    source: Option<Vec<f64>>,
    time_steps: usize,
    total_time: f64,
}

impl ActionSpec {
    pub fn new(
        mesh: Arc<Mesh>,
        mass_form: SuperMetric,
        potential: Potential,
        time_steps: usize,
        total_time: f64,
    ) -> Result<ActionSpec> {
        if time_steps < 2 {
            return Err(Error::InvalidSpec(format!(
                "time_steps must be >= 2, got {time_steps}"
            )));
        }
        if !(total_time > 0.0) || !total_time.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "total_time must be positive, got {total_time}"
            )));
        }
        match &potential {
            Potential::None => {}
            Potential::EdgeQuadratic(st) => {
                if st.values().len() != mesh.edges().len() {
                    return Err(Error::InvalidSpec(format!(
                        "{} stiffness values for {} edges",
                        st.values().len(),
                        mesh.edges().len()
                    )));
                }
            }
            Potential::SitePoly { quadratic, quartic } => {
                if quadratic.len() != mesh.n_sites()
                    || (!quartic.is_empty() && quartic.len() != mesh.n_sites())
                {
                    return Err(Error::InvalidSpec(String::from(
                        "site-potential coefficient lengths do not match the mesh",
                    )));
                }
            }
            Potential::Nonlocal(kernel) => {
                let n = mesh.n_sites();
                if kernel.nrows() != n || kernel.ncols() != n {
                    return Err(Error::InvalidSpec(format!(
                        "kernel is {}x{} for a mesh with {n} sites",
                        kernel.nrows(),
                        kernel.ncols()
                    )));
                }
                for i in 0..n {
                    for j in (i + 1)..n {
                        if (kernel[(i, j)] - kernel[(j, i)]).abs() > 1e-12 {
                            return Err(Error::InvalidSpec(format!(
                                "kernel asymmetric at ({i}, {j})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(ActionSpec {
            mesh,
            mass_form,
            potential,
            source: None,
            time_steps,
            total_time,
        })
    }

    /// Attach a static per-site source `j(x)`; the Lagrangian gains
    /// `+⟨j, φ⟩`, i.e. the potential energy loses it.
    pub fn with_source(mut self, source: Vec<f64>) -> Result<ActionSpec> {
        if source.len() != self.mesh.n_sites() {
            return Err(Error::InvalidSpec(format!(
                "source has {} entries for {} sites",
                source.len(),
                self.mesh.n_sites()
            )));
        }
        self.source = Some(source);
        Ok(self)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn mass_form(&self) -> &SuperMetric {
        &self.mass_form
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn source(&self) -> Option<&[f64]> {
        self.source.as_deref()
    }

    pub fn time_steps(&self) -> usize {
        self.time_steps
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.time_steps as f64
    }

    /// True when the discrete Euler–Lagrange system is linear, so a single
    /// Newton step solves the boundary-value problem exactly.
    pub fn is_quadratic(&self) -> bool {
        self.mass_form.is_flat() && self.potential.is_quadratic()
    }

    /// Potential energy `U(φ) = V(φ) − ⟨j, φ⟩` over the counted terms.
    pub fn potential_energy(&self, phi: &[f64]) -> f64 {
        let mut u = self.potential.value(&self.mesh, phi);
        if let Some(j) = &self.source {
            for x in 0..self.mesh.n_sites() {
                if !self.mesh.is_dirichlet(x) {
                    u -= self.mesh.weight(x) * j[x] * phi[x];
                }
            }
        }
        u
    }

    /// `∂U/∂φ` over all sites (entries at Dirichlet sites not meaningful).
    pub(crate) fn potential_grad(&self, phi: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.mesh.n_sites()];
        self.potential.add_grad(&self.mesh, phi, &mut g, 1.0);
        if let Some(j) = &self.source {
            for x in 0..self.mesh.n_sites() {
                g[x] -= self.mesh.weight(x) * j[x];
            }
        }
        g
    }

    pub(crate) fn potential_hessian(&self, phi: &[f64]) -> DMatrix<f64> {
        self.potential.hessian(&self.mesh, phi)
    }

    pub fn check_path(&self, path: &Path) -> Result<()> {
        if !path.mesh().compatible(&self.mesh) {
            return Err(Error::MeshMismatch(format!(
                "path mesh has {} sites, spec mesh {}",
                path.mesh().n_sites(),
                self.mesh.n_sites()
            )));
        }
        Ok(())
    }

    /// Conformal factor data for one interval midpoint: factor value,
    /// and optionally its gradient in the field (None for a flat mass).
    fn mass_at(&self, midpoint: &[f64], want_grad: bool) -> Result<(f64, Option<Vec<f64>>)> {
        match &self.mass_form {
            SuperMetric::FlatL2 => Ok((1.0, None)),
            SuperMetric::Conformal(ConformalWeight::Jacobi { energy, system }) => {
                let c = 2.0 * (energy - system.potential_energy(midpoint));
                let grad = if want_grad {
                    let mut g = system.potential_grad(midpoint);
                    for v in g.iter_mut() {
                        *v *= -2.0;
                    }
                    Some(g)
                } else {
                    None
                };
                Ok((c, grad))
            }
            SuperMetric::Conformal(ConformalWeight::PerSite(_)) => Err(Error::Unsupported(
                String::from("per-site conformal mass forms support evaluation only"),
            )),
        }
    }

    /// Kinetic term of interval `j`, `c(m_j) q_j / (2 dt)`, with
    /// `q_j = Σ_{x free} w_x Δ_x²`. Fails with `ClassicallyForbidden`
    /// when a Jacobi factor is nonpositive.
    fn kinetic_value(&self, path: &Path, j: usize, forbidden: &mut Vec<usize>) -> Result<f64> {
        let mesh = &self.mesh;
        let a = path.slice(j).values();
        let b = path.slice(j + 1).values();
        let mut q = 0.0;
        let mut mid = vec![0.0; mesh.n_sites()];
        for x in 0..mesh.n_sites() {
            mid[x] = 0.5 * (a[x] + b[x]);
            if !mesh.is_dirichlet(x) {
                let d = b[x] - a[x];
                q += mesh.weight(x) * d * d;
            }
        }
        match &self.mass_form {
            SuperMetric::Conformal(ConformalWeight::PerSite(f)) => {
                let mid_cfg = FieldConfig::new(mesh.clone(), mid)?;
                let c = f(&mid_cfg);
                let mut v = 0.0;
                let mut bad = false;
                for x in 0..mesh.n_sites() {
                    if !mesh.is_dirichlet(x) {
                        if c[x] <= 0.0 {
                            bad = true;
                        }
                        let d = b[x] - a[x];
                        v += mesh.weight(x) * c[x] * d * d;
                    }
                }
                if bad {
                    forbidden.push(j);
                }
                Ok(v / (2.0 * path.dt()))
            }
            _ => {
                let (c, _) = self.mass_at(&mid, false)?;
                if matches!(self.mass_form, SuperMetric::Conformal(_)) && c <= 0.0 {
                    forbidden.push(j);
                }
                Ok(c * q / (2.0 * path.dt()))
            }
        }
    }

    /// The discrete action of a path under this spec. Exact zero for
    /// static paths with vanishing potential.
    pub fn action(&self, path: &Path) -> Result<f64> {
        self.check_path(path)?;
        let dt = path.dt();
        let kk = path.n_steps();
        let mut s = 0.0;
        let mut forbidden = Vec::new();
        for j in 0..kk {
            s += self.kinetic_value(path, j, &mut forbidden)?;
        }
        if !forbidden.is_empty() {
            return Err(Error::ClassicallyForbidden(forbidden));
        }
        for k in 0..=kk {
            let dt_k = if k == 0 || k == kk { 0.5 * dt } else { dt };
            s -= dt_k * self.potential_energy(path.slice(k).values());
        }
        Ok(s)
    }

    /// Gradient of the discrete action with respect to slice `k`, over all
    /// sites. Entries at Dirichlet sites are zeroed.
    pub(crate) fn slice_gradient(&self, path: &Path, k: usize) -> Result<Vec<f64>> {
        let mesh = &self.mesh;
        let n = mesh.n_sites();
        let dt = path.dt();
        let kk = path.n_steps();
        let mut g = vec![0.0; n];
        // Kinetic contributions from the intervals (k-1, k) and (k, k+1);
        // slice k is the right end of the former, the left end of the
        // latter, which flips the sign of the c·WΔ/dt term.
        for (j, sign) in [(k.wrapping_sub(1), 1.0), (k, -1.0)] {
            if j >= kk {
                continue;
            }
            let a = path.slice(j).values();
            let b = path.slice(j + 1).values();
            let mut mid = vec![0.0; n];
            let mut q = 0.0;
            for x in 0..n {
                mid[x] = 0.5 * (a[x] + b[x]);
                if !mesh.is_dirichlet(x) {
                    let d = b[x] - a[x];
                    q += mesh.weight(x) * d * d;
                }
            }
            let (c, grad_c) = self.mass_at(&mid, true)?;
            if matches!(
                self.mass_form,
                SuperMetric::Conformal(ConformalWeight::Jacobi { .. })
            ) && c <= 0.0
            {
                return Err(Error::ClassicallyForbidden(vec![j]));
            }
            for x in 0..n {
                if mesh.is_dirichlet(x) {
                    continue;
                }
                let wd = mesh.weight(x) * (b[x] - a[x]);
                g[x] += sign * c * wd / dt;
                if let Some(gc) = &grad_c {
                    g[x] += q / (4.0 * dt) * gc[x];
                }
            }
        }
        // Potential contribution of this slice.
        let dt_k = if k == 0 || k == kk { 0.5 * dt } else { dt };
        let pg = self.potential_grad(path.slice(k).values());
        for x in 0..n {
            if !mesh.is_dirichlet(x) {
                g[x] -= dt_k * pg[x];
            }
        }
        for x in 0..n {
            if mesh.is_dirichlet(x) {
                g[x] = 0.0;
            }
        }
        Ok(g)
    }

    /// Euler–Lagrange residual: the action gradient at every interior
    /// slice, zero-padded at the endpoints and at Dirichlet sites. Zero
    /// exactly on discrete extremals.
    pub fn eom_residual(&self, path: &Path) -> Result<Path> {
        self.check_path(path)?;
        if path.slices().len() < 3 {
            return Err(Error::InvalidSpec(String::from(
                "eom_residual needs at least 3 slices",
            )));
        }
        let mut slices = Vec::with_capacity(path.slices().len());
        slices.push(FieldConfig::zeros(self.mesh.clone()));
        for k in 1..path.n_steps() {
            let g = self.slice_gradient(path, k)?;
            slices.push(FieldConfig::new(self.mesh.clone(), g)?);
        }
        slices.push(FieldConfig::zeros(self.mesh.clone()));
        Path::new(slices, path.total_time())
    }

    /// Gradient of the action with respect to an endpoint slice, over all
    /// sites (Dirichlet entries zeroed). The on-shell momenta are
    /// `π_i = −∂S/∂φ_0` and `π_f = +∂S/∂φ_K`.
    pub fn endpoint_gradient(&self, path: &Path, end: End) -> Result<Vec<f64>> {
        self.check_path(path)?;
        let k = match end {
            End::Initial => 0,
            End::Final => path.n_steps(),
        };
        self.slice_gradient(path, k)
    }

    /// `∂²S/∂φ_k∂φ_k` restricted to free sites, in `free_sites` order.
    pub(crate) fn hessian_diag_block(&self, path: &Path, k: usize) -> Result<DMatrix<f64>> {
        let free = self.mesh.free_sites();
        let m = free.len();
        let kk = path.n_steps();
        let dt = path.dt();
        let mut h = DMatrix::zeros(m, m);
        for j in [k.wrapping_sub(1), k] {
            if j >= kk {
                continue;
            }
            let ctx = self.interval_hessian_ctx(path, j)?;
            // Same-slice kinetic block: (1/2dt)(¼ q ∇²c − u vᵀ − v uᵀ) + (c/dt) W
            // with u = ∇c, v = WΔ; the uvᵀ signs depend on which end of
            // the interval slice k is.
            let left = j == k; // slice k is the interval's left end
            for (r, &x) in free.iter().enumerate() {
                for (s, &y) in free.iter().enumerate() {
                    let mut val = 0.0;
                    if let Some(hc) = &ctx.hess_c {
                        val += 0.25 * ctx.q * hc[(x, y)];
                    }
                    if let Some(gc) = &ctx.grad_c {
                        let sign = if left { -1.0 } else { 1.0 };
                        val += sign * (gc[x] * ctx.wdelta[y] + ctx.wdelta[x] * gc[y]);
                    }
                    h[(r, s)] += val / (2.0 * dt);
                }
                h[(r, r)] += ctx.c * self.mesh.weight(x) / dt;
            }
        }
        // Potential block.
        let dt_k = if k == 0 || k == kk { 0.5 * dt } else { dt };
        let hu = self.potential_hessian(path.slice(k).values());
        for (r, &x) in free.iter().enumerate() {
            for (s, &y) in free.iter().enumerate() {
                h[(r, s)] -= dt_k * hu[(x, y)];
            }
        }
        Ok(h)
    }

    /// `∂²S/∂φ_k∂φ_{k+1}` restricted to free sites. Only the kinetic term
    /// of interval `k` couples adjacent slices.
    pub(crate) fn hessian_off_block(&self, path: &Path, k: usize) -> Result<DMatrix<f64>> {
        let free = self.mesh.free_sites();
        let m = free.len();
        let dt = path.dt();
        let ctx = self.interval_hessian_ctx(path, k)?;
        let mut h = DMatrix::zeros(m, m);
        for (r, &x) in free.iter().enumerate() {
            for (s, &y) in free.iter().enumerate() {
                let mut val = 0.0;
                if let Some(hc) = &ctx.hess_c {
                    val += 0.25 * ctx.q * hc[(x, y)];
                }
                if let Some(gc) = &ctx.grad_c {
                    // Row index differentiates the left slice, column the
                    // right slice: +∇c (WΔ)ᵀ − (WΔ) ∇cᵀ.
                    val += gc[x] * ctx.wdelta[y] - ctx.wdelta[x] * gc[y];
                }
                h[(r, s)] += val / (2.0 * dt);
            }
            h[(r, r)] -= ctx.c * self.mesh.weight(x) / dt;
        }
        Ok(h)
    }

    fn interval_hessian_ctx(&self, path: &Path, j: usize) -> Result<IntervalCtx> {
        let mesh = &self.mesh;
        let n = mesh.n_sites();
        let a = path.slice(j).values();
        let b = path.slice(j + 1).values();
        let mut mid = vec![0.0; n];
        let mut wdelta = vec![0.0; n];
        let mut q = 0.0;
        for x in 0..n {
            mid[x] = 0.5 * (a[x] + b[x]);
            if !mesh.is_dirichlet(x) {
                let d = b[x] - a[x];
                wdelta[x] = mesh.weight(x) * d;
                q += mesh.weight(x) * d * d;
            }
        }
        let (c, grad_c) = self.mass_at(&mid, true)?;
        if matches!(
            self.mass_form,
            SuperMetric::Conformal(ConformalWeight::Jacobi { .. })
        ) && c <= 0.0
        {
            return Err(Error::ClassicallyForbidden(vec![j]));
        }
        let hess_c = match &self.mass_form {
            SuperMetric::FlatL2 => None,
            SuperMetric::Conformal(ConformalWeight::Jacobi { system, .. }) => {
                Some(system.potential_hessian(&mid) * -2.0)
            }
            SuperMetric::Conformal(ConformalWeight::PerSite(_)) => {
                return Err(Error::Unsupported(String::from(
                    "per-site conformal mass forms support evaluation only",
                )))
            }
        };
        Ok(IntervalCtx {
            q,
            wdelta,
            c,
            grad_c,
            hess_c,
        })
    }

    /// Energy `T + V` per time interval (kinetic at the midpoint, the
    /// potential averaged over the interval's two slices). Constant up to
    /// O(dt²) along extremals of time-independent actions.
    pub fn energy_profile(&self, path: &Path) -> Result<Vec<f64>> {
        self.check_path(path)?;
        let dt = path.dt();
        let mut out = Vec::with_capacity(path.n_steps());
        let mut forbidden = Vec::new();
        for j in 0..path.n_steps() {
            let ke = self.kinetic_value(path, j, &mut forbidden)? / dt;
            let pe = 0.5
                * (self.potential_energy(path.slice(j).values())
                    + self.potential_energy(path.slice(j + 1).values()));
            out.push(ke + pe);
        }
        if !forbidden.is_empty() {
            return Err(Error::ClassicallyForbidden(forbidden));
        }
        Ok(out)
    }

    /// Mean of [`ActionSpec::energy_profile`]: the on-shell energy of an
    /// extremal path up to discretization error.
    pub fn on_shell_energy(&self, path: &Path) -> Result<f64> {
        let prof = self.energy_profile(path)?;
        Ok(prof.iter().sum::<f64>() / prof.len() as f64)
    }

    /// The intrinsic action on one side of a decomposition: same local
    /// terms truncated to the submesh, nonlocal kernels restricted by
    /// sub-block extraction (never by inverting a restricted operator),
    /// `∂O` sites Dirichlet.
    pub fn intrinsic(&self, dec: &RegionDecomposition, side: Side) -> Result<ActionSpec> {
        if !dec.parent().compatible(&self.mesh) {
            return Err(Error::MeshMismatch(String::from(
                "decomposition parent differs from the spec mesh",
            )));
        }
        self.restrict_to_subregion(dec.subregion(side))
    }

    /// The separating sites' own action: the terms of the global action
    /// attributed to neither intrinsic side (boundary kinetic plus
    /// pure-boundary potential and source terms). `None` when the
    /// decomposition has no separating sites. All boundary sites are
    /// free here.
    pub fn boundary_sector(&self, dec: &RegionDecomposition) -> Result<Option<ActionSpec>> {
        if !dec.parent().compatible(&self.mesh) {
            return Err(Error::MeshMismatch(String::from(
                "decomposition parent differs from the spec mesh",
            )));
        }
        match dec.boundary_subregion() {
            None => Ok(None),
            Some(sub) => Ok(Some(self.restrict_to_subregion(sub)?)),
        }
    }

    fn restrict_to_subregion(&self, sub: &crate::region::SubRegion) -> Result<ActionSpec> {
        if !self.mass_form.is_flat() {
            return Err(Error::Unsupported(String::from(
                "intrinsic restriction is defined for flat mass forms",
            )));
        }
        let sites = sub.sites();
        let potential = match &self.potential {
            Potential::None => Potential::None,
            Potential::EdgeQuadratic(st) => {
                let values = sub
                    .edge_parent()
                    .iter()
                    .map(|&pe| st.values()[pe])
                    .collect();
                Potential::EdgeQuadratic(EdgeStiffness::from_values(values))
            }
            Potential::SitePoly { quadratic, quartic } => Potential::SitePoly {
                quadratic: sites.iter().map(|&s| quadratic[s]).collect(),
                quartic: if quartic.is_empty() {
                    Vec::new()
                } else {
                    sites.iter().map(|&s| quartic[s]).collect()
                },
            },
            Potential::Nonlocal(kernel) => {
                let m = sites.len();
                let mut block = DMatrix::zeros(m, m);
                for (i, &si) in sites.iter().enumerate() {
                    for (j, &sj) in sites.iter().enumerate() {
                        block[(i, j)] = kernel[(si, sj)];
                    }
                }
                Potential::Nonlocal(block)
            }
        };
        let mut spec = ActionSpec::new(
            sub.mesh().clone(),
            SuperMetric::FlatL2,
            potential,
            self.time_steps,
            self.total_time,
        )?;
        if let Some(j) = &self.source {
            spec = spec.with_source(sites.iter().map(|&s| j[s]).collect())?;
        }
        Ok(spec)
    }
}

struct IntervalCtx {
    q: f64,
    wdelta: Vec<f64>,
    c: f64,
    grad_c: Option<Vec<f64>>,
    hess_c: Option<DMatrix<f64>>,
}
