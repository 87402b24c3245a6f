//! Inner products on configuration space.
//!
//! The scalar-field analog of the DeWitt supermetric family: a weighted
//! L² product `⟨u, v⟩ = Σ_x w(x) c(φ; x) u(x) v(x)`, where `w` are the
//! mesh quadrature weights and `c` an optional conformal factor evaluated
//! at a base configuration. The flat metric has `c ≡ 1`; the Jacobi
//! variant carries `c = 2(E − V(φ))`, uniform over sites but depending on
//! the whole base field through the potential energy.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // f64 math via the trait in no_std builds
use num_traits::Float;

use crate::action::ActionSpec;
use crate::error::{Error, Result};
use crate::field::FieldConfig;

/// A per-site conformal weight as a function of the base configuration.
pub type WeightFn = Arc<dyn Fn(&FieldConfig) -> Vec<f64> + Send + Sync>;

/// Conformal factor of a [`SuperMetric::Conformal`] metric.
#[derive(Clone)]
pub enum ConformalWeight {
    /// The Jacobi factor `2(E − V(φ))` of a reference dynamical system,
    /// uniform over sites. `V` is the system's potential energy including
    /// any source term.
    Jacobi {
        energy: f64,
        system: Arc<ActionSpec>,
    },
    /// Arbitrary per-site positive weights as a function of the base
    /// configuration. Supported for inner products and lengths; the
    /// boundary-value solver rejects it.
    PerSite(WeightFn),
}

impl fmt::Debug for ConformalWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConformalWeight::Jacobi { energy, .. } => {
                write!(f, "ConformalWeight::Jacobi {{ energy: {energy} }}")
            }
            ConformalWeight::PerSite(_) => write!(f, "ConformalWeight::PerSite(..)"),
        }
    }
}

/// A (super)metric on configuration space.
#[derive(Debug, Clone)]
pub enum SuperMetric {
    /// Plain weighted L²: `⟨u, v⟩ = Σ_x w(x) u(x) v(x)`.
    FlatL2,
    /// Conformally rescaled L²: `⟨u, v⟩ = Σ_x w(x) c(φ; x) u(x) v(x)`.
    Conformal(ConformalWeight),
}

impl SuperMetric {
    /// Per-site conformal factor at the base configuration, checked to be
    /// strictly positive.
    pub fn factor_at(&self, base: &FieldConfig) -> Result<Vec<f64>> {
        let n = base.len();
        let factors = match self {
            SuperMetric::FlatL2 => vec![1.0; n],
            SuperMetric::Conformal(ConformalWeight::Jacobi { energy, system }) => {
                let c = 2.0 * (energy - system.potential_energy(base.values()));
                vec![c; n]
            }
            SuperMetric::Conformal(ConformalWeight::PerSite(f)) => f(base),
        };
        for (site, c) in factors.iter().enumerate() {
            if !(*c > 0.0) || !c.is_finite() {
                return Err(Error::MetricDegenerate { site, weight: *c });
            }
        }
        Ok(factors)
    }

    /// `⟨u, v⟩` at the base configuration.
    pub fn inner_product(
        &self,
        u: &FieldConfig,
        v: &FieldConfig,
        base: &FieldConfig,
    ) -> Result<f64> {
        u.check_compatible(v)?;
        u.check_compatible(base)?;
        let c = self.factor_at(base)?;
        let w = u.mesh().weights();
        Ok(u.values()
            .iter()
            .zip(v.values())
            .zip(w.iter().zip(&c))
            .map(|((a, b), (w, c))| w * c * a * b)
            .sum())
    }

    /// Induced norm `√⟨u, u⟩` at the base configuration.
    pub fn norm(&self, u: &FieldConfig, base: &FieldConfig) -> Result<f64> {
        Ok(self.inner_product(u, u, base)?.sqrt())
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, SuperMetric::FlatL2)
    }
}

/// Flat weighted L² product of two raw value slices over a weight slice.
pub fn flat_inner(weights: &[f64], u: &[f64], v: &[f64]) -> f64 {
    weights
        .iter()
        .zip(u.iter().zip(v))
        .map(|(w, (a, b))| w * a * b)
        .sum()
}

/// Flat weighted L² distance between two raw value slices.
pub fn flat_distance(weights: &[f64], u: &[f64], v: &[f64]) -> f64 {
    weights
        .iter()
        .zip(u.iter().zip(v))
        .map(|(w, (a, b))| w * (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    #[test]
    fn zero_fields_give_zero() {
        let m = Arc::new(Mesh::circle(8, 2.0 * PI).unwrap());
        let z = FieldConfig::zeros(m);
        let ip = SuperMetric::FlatL2.inner_product(&z, &z, &z).unwrap();
        assert_eq!(ip, 0.0);
    }

    #[test]
    fn constants_integrate_to_total_measure() {
        let m = Arc::new(Mesh::circle(16, 2.0 * PI).unwrap());
        let one = FieldConfig::constant(m.clone(), 1.0);
        let base = FieldConfig::zeros(m);
        let ip = SuperMetric::FlatL2
            .inner_product(&one, &one, &base)
            .unwrap();
        assert_relative_eq!(ip, 2.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn sine_squared_integrates_to_pi() {
        // ∫ sin²(kθ) dθ = π on the circle; midpoint quadrature is in fact
        // exact for this integrand, so 1e-3 is comfortable.
        let m = Arc::new(Mesh::circle(256, 2.0 * PI).unwrap());
        let k = 3.0;
        let u = FieldConfig::from_fn(m.clone(), |_, p| (k * p[0]).sin());
        let base = FieldConfig::zeros(m);
        let ip = SuperMetric::FlatL2.inner_product(&u, &u, &base).unwrap();
        assert_relative_eq!(ip, PI, max_relative = 1e-3);
    }

    #[test]
    fn nonpositive_custom_weight_is_degenerate() {
        let m = Arc::new(Mesh::circle(4, 1.0).unwrap());
        let metric =
            SuperMetric::Conformal(ConformalWeight::PerSite(Arc::new(|f| f.values().to_vec())));
        let base = FieldConfig::zeros(m.clone());
        let u = FieldConfig::constant(m, 1.0);
        assert!(matches!(
            metric.inner_product(&u, &u, &base),
            Err(Error::MetricDegenerate { .. })
        ));
    }
}
