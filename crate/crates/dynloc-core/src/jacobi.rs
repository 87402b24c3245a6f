//! The Jacobi metric `h = 2(E − V) g` and the Maupertuis equivalence
//! between fixed-energy action extremals and geodesics of `h`.
//!
//! Geodesics are computed by extremizing the energy functional of `h`
//! with a fixed affine parametrization — an action with a conformal mass
//! form and no potential — and compared against action extremals as
//! unparametrized images, by a symmetric Hausdorff distance between each
//! path's slice points and the other path's polyline.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math via the trait in no_std builds
use num_traits::Float;

use crate::action::{ActionSpec, Path, Potential};
use crate::error::{Error, Result};
use crate::metric::{ConformalWeight, SuperMetric};
use crate::solve::{solve_seeded, ExtremalPath, SolverOptions};

/// The Jacobi metric of a dynamical system at a fixed energy:
/// pointwise `2(E − V(φ))` times the system's base (mass) metric.
#[derive(Debug, Clone)]
pub struct JacobiMetric {
    base: SuperMetric,
    energy: f64,
    system: Arc<ActionSpec>,
}

impl JacobiMetric {
    /// Build from the system whose potential (and source) defines `V`.
    pub fn build(spec: &ActionSpec, energy: f64) -> JacobiMetric {
        JacobiMetric {
            base: spec.mass_form().clone(),
            energy,
            system: Arc::new(spec.clone()),
        }
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn system(&self) -> &Arc<ActionSpec> {
        &self.system
    }

    /// The conformal factor `2(E − V(φ))` at a configuration.
    pub fn conformal_factor(&self, values: &[f64]) -> f64 {
        2.0 * (self.energy - self.system.potential_energy(values))
    }

    /// The metric as a [`SuperMetric`] usable for inner products.
    pub fn as_supermetric(&self) -> SuperMetric {
        SuperMetric::Conformal(ConformalWeight::Jacobi {
            energy: self.energy,
            system: self.system.clone(),
        })
    }

    /// Discrete length `Σ_j √( c(m_j) ‖Δφ_j‖²_g )` with everything
    /// evaluated at interval midpoints. Reparametrization-invariant under
    /// slice redistribution. Fails with the offending interval indices if
    /// the conformal factor is nonpositive anywhere along the path.
    pub fn length(&self, path: &Path) -> Result<f64> {
        if !path.mesh().compatible(self.system.mesh()) {
            return Err(Error::MeshMismatch(String::from(
                "path does not live on the Jacobi system's mesh",
            )));
        }
        let mesh = path.mesh();
        let n = mesh.n_sites();
        let mut total = 0.0;
        let mut forbidden = Vec::new();
        for j in 0..path.n_steps() {
            let a = path.slice(j).values();
            let b = path.slice(j + 1).values();
            let mid: Vec<f64> = (0..n).map(|x| 0.5 * (a[x] + b[x])).collect();
            let c = self.conformal_factor(&mid);
            // Base-metric squared speed; flat unless the base is itself
            // conformal (evaluated at the same midpoint).
            let base_factor = match &self.base {
                SuperMetric::FlatL2 => None,
                other => {
                    let cfg = crate::field::FieldConfig::new(mesh.clone(), mid.clone())?;
                    Some(other.factor_at(&cfg)?)
                }
            };
            let mut q = 0.0;
            for x in 0..n {
                if mesh.is_dirichlet(x) {
                    continue;
                }
                let d = b[x] - a[x];
                let f = base_factor.as_ref().map_or(1.0, |v| v[x]);
                q += mesh.weight(x) * f * d * d;
            }
            if q > 0.0 && c <= 0.0 {
                forbidden.push(j);
            } else {
                total += (c * q).max(0.0).sqrt();
            }
        }
        if !forbidden.is_empty() {
            return Err(Error::ClassicallyForbidden(forbidden));
        }
        Ok(total)
    }

    /// The geodesic boundary-value problem of `h` as an action spec: the
    /// energy functional `∫ ½ h(φ̇, φ̇) dt` with no potential. Requires a
    /// flat base metric.
    pub fn geodesic_spec(&self, time_steps: usize, total_time: f64) -> Result<ActionSpec> {
        if !self.base.is_flat() {
            return Err(Error::Unsupported(String::from(
                "geodesic solves require a flat base metric",
            )));
        }
        ActionSpec::new(
            self.system.mesh().clone(),
            self.as_supermetric(),
            Potential::None,
            time_steps,
            total_time,
        )
    }
}

/// Outcome of the Maupertuis equivalence check.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    /// Symmetric Hausdorff distance between the two paths' images.
    pub max_deviation: f64,
    pub pass: bool,
    /// The geodesic found for the comparison.
    pub geodesic: ExtremalPath,
}

/// Resample a path so its slices sit at equal arc-length increments of
/// the Jacobi metric. Extremals of the energy functional traverse at
/// constant h-speed, so this is the natural seed normalization for the
/// geodesic boundary-value problem.
pub fn reparametrize_by_arclength(metric: &JacobiMetric, path: &Path) -> Result<Path> {
    let mesh = path.mesh();
    let n = mesh.n_sites();
    let kk = path.n_steps();
    let mut cum = Vec::with_capacity(kk + 1);
    cum.push(0.0);
    for j in 0..kk {
        let a = path.slice(j).values();
        let b = path.slice(j + 1).values();
        let mid: Vec<f64> = (0..n).map(|x| 0.5 * (a[x] + b[x])).collect();
        let c = metric.conformal_factor(&mid).max(0.0);
        let mut q = 0.0;
        for x in 0..n {
            if !mesh.is_dirichlet(x) {
                let d = b[x] - a[x];
                q += mesh.weight(x) * d * d;
            }
        }
        cum.push(cum[j] + (c * q).sqrt());
    }
    let total = cum[kk];
    if total <= 0.0 {
        return Ok(path.clone());
    }
    let mut slices = Vec::with_capacity(kk + 1);
    slices.push(path.slice(0).clone());
    let mut j = 0;
    for k in 1..kk {
        let target = total * k as f64 / kk as f64;
        while j + 1 < kk && cum[j + 1] < target {
            j += 1;
        }
        let seg = cum[j + 1] - cum[j];
        let t = if seg > 0.0 {
            (target - cum[j]) / seg
        } else {
            0.0
        };
        slices.push(
            path.slice(j)
                .scaled(1.0 - t)
                .add_scaled(path.slice(j + 1), t)?,
        );
    }
    slices.push(path.slice(kk).clone());
    Path::new(slices, path.total_time())
}

/// Solve the geodesic problem of `metric` between the extremal's
/// endpoints (seeded with the arc-length reparametrized extremal) and
/// compare the two curve images. Passes when the deviation stays below
/// `tol`. The principle holds when the metric was built with the
/// extremal's on-shell energy; a mismatched energy shows up as a
/// deviation.
pub fn verify_equivalence(
    spec: &ActionSpec,
    ex: &ExtremalPath,
    metric: &JacobiMetric,
    tol: f64,
) -> Result<EquivalenceReport> {
    spec.check_path(&ex.path)?;
    let geo_spec = metric.geodesic_spec(ex.path.n_steps(), ex.path.total_time())?;
    let seed = reparametrize_by_arclength(metric, &ex.path)?;
    let geodesic = solve_seeded(&geo_spec, &seed, &SolverOptions::default(), "geodesic")?;
    let max_deviation = image_deviation(&ex.path, &geodesic.path)?;
    Ok(EquivalenceReport {
        max_deviation,
        pass: max_deviation < tol,
        geodesic,
    })
}

/// Symmetric Hausdorff-style distance between two paths viewed as point
/// sets: each slice of one path is measured against the other path's
/// polyline in the flat configuration-space norm, and the largest such
/// distance in either direction is returned. Parametrization-independent.
pub fn image_deviation(p: &Path, q: &Path) -> Result<f64> {
    p.slices()[0].check_compatible(&q.slices()[0])?;
    let d1 = one_sided_deviation(p, q);
    let d2 = one_sided_deviation(q, p);
    Ok(d1.max(d2))
}

fn one_sided_deviation(p: &Path, q: &Path) -> f64 {
    let w = p.mesh().weights();
    let mut worst = 0.0f64;
    for s in p.slices() {
        let mut best = f64::INFINITY;
        for j in 0..q.n_steps() {
            best = best.min(point_segment_distance(
                w,
                s.values(),
                q.slice(j).values(),
                q.slice(j + 1).values(),
            ));
        }
        worst = worst.max(best);
    }
    worst
}

/// Distance from a point to the segment `[a, b]` in the weighted flat
/// norm.
fn point_segment_distance(w: &[f64], p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for x in 0..p.len() {
        let ab = b[x] - a[x];
        num += w[x] * (p[x] - a[x]) * ab;
        den += w[x] * ab * ab;
    }
    let t = if den > 0.0 {
        (num / den).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut d2 = 0.0;
    for x in 0..p.len() {
        let proj = a[x] + t * (b[x] - a[x]);
        d2 += w[x] * (p[x] - proj) * (p[x] - proj);
    }
    d2.sqrt()
}
