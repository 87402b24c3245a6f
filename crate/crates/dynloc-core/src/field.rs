//! Field configurations: one real value per mesh site.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// One point of configuration space: a full scalar-field snapshot over a
/// mesh. Immutable in spirit; the mutating helpers are construction aids.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl FieldConfig {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<FieldConfig> {
        if values.len() != mesh.n_sites() {
            return Err(Error::MeshMismatch(format!(
                "{} values for a mesh with {} sites",
                values.len(),
                mesh.n_sites()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "nonfinite field value at site {bad}"
            )));
        }
        Ok(FieldConfig { mesh, values })
    }

    pub fn zeros(mesh: Arc<Mesh>) -> FieldConfig {
        let n = mesh.n_sites();
        FieldConfig {
            mesh,
            values: vec![0.0; n],
        }
    }

    pub fn constant(mesh: Arc<Mesh>, c: f64) -> FieldConfig {
        let n = mesh.n_sites();
        FieldConfig {
            mesh,
            values: vec![c; n],
        }
    }

    /// Build from a function of `(site id, site position)`.
    pub fn from_fn(mesh: Arc<Mesh>, mut f: impl FnMut(usize, &[f64]) -> f64) -> FieldConfig {
        let values = (0..mesh.n_sites())
            .map(|s| f(s, mesh.position(s)))
            .collect();
        FieldConfig { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, site: usize) -> f64 {
        self.values[site]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn set(&mut self, site: usize, v: f64) {
        self.values[site] = v;
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// `self + s·other`, on the same mesh.
    pub fn add_scaled(&self, other: &FieldConfig, s: f64) -> Result<FieldConfig> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + s * b)
            .collect();
        Ok(FieldConfig {
            mesh: self.mesh.clone(),
            values,
        })
    }

    pub fn scaled(&self, s: f64) -> FieldConfig {
        FieldConfig {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|v| s * v).collect(),
        }
    }

    pub fn check_compatible(&self, other: &FieldConfig) -> Result<()> {
        if !self.mesh.compatible(&other.mesh) {
            return Err(Error::MeshMismatch(format!(
                "fields live on meshes with {} and {} sites",
                self.mesh.n_sites(),
                other.mesh.n_sites()
            )));
        }
        Ok(())
    }
}
