//! Region decomposition of a mesh into interior `O`, exterior `N`, and a
//! separating boundary `∂O`, with the projection and gluing maps between
//! global and per-region field configurations.
//!
//! The boundary is realized as a site set: the unselected sites adjacent
//! to the selection. Every edge leaving the selected interior therefore
//! ends on a boundary site, so `∂O` separates `O` from `N` by
//! construction. Each side's submesh covers `interior ∪ ∂O` with the
//! boundary sites flagged Dirichlet; parent weights, positions and edges
//! are inherited.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::mesh::{Edge, Mesh};

/// Which side of a decomposition an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    O,
    N,
}

/// One side's submesh together with its embedding into the parent.
#[derive(Debug, Clone)]
pub struct SubRegion {
    mesh: Arc<Mesh>,
    /// Parent site id of each submesh site, in submesh order (ascending).
    sites: Vec<usize>,
    /// Parent edge index of each submesh edge, aligned to `mesh.edges()`.
    edge_parent: Vec<usize>,
}

impl SubRegion {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn edge_parent(&self) -> &[usize] {
        &self.edge_parent
    }

    /// Submesh site index of a parent site, if it belongs to this side.
    pub fn local_index(&self, parent_site: usize) -> Option<usize> {
        self.sites.binary_search(&parent_site).ok()
    }
}

/// A split of a mesh into interior `O`, exterior `N` and separating `∂O`.
#[derive(Debug, Clone)]
pub struct RegionDecomposition {
    parent: Arc<Mesh>,
    interior_o: Vec<usize>,
    interior_n: Vec<usize>,
    boundary: Vec<usize>,
    sub_o: SubRegion,
    sub_n: SubRegion,
    /// The boundary sites as their own (fully free) subsystem; absent
    /// when the separating set is empty. In the continuum the boundary
    /// has measure zero, but on the lattice its sites carry honest
    /// degrees of freedom that belong to neither interior.
    sub_boundary: Option<SubRegion>,
}

impl RegionDecomposition {
    /// Decompose by a predicate on site positions: selected sites form the
    /// interior `O`; unselected sites adjacent to the selection form `∂O`.
    pub fn decompose(
        parent: Arc<Mesh>,
        predicate: impl Fn(&[f64]) -> bool,
    ) -> Result<RegionDecomposition> {
        let selected: Vec<usize> = (0..parent.n_sites())
            .filter(|&s| predicate(parent.position(s)))
            .collect();
        Self::from_selected(parent, &selected)
    }

    /// Decompose from an explicit interior site set.
    pub fn from_selected(parent: Arc<Mesh>, selected: &[usize]) -> Result<RegionDecomposition> {
        let n = parent.n_sites();
        let mut in_o = vec![false; n];
        for &s in selected {
            if s >= n {
                return Err(Error::DegenerateRegion(format!("site {s} out of range")));
            }
            in_o[s] = true;
        }
        let interior_o: Vec<usize> = (0..n).filter(|&s| in_o[s]).collect();
        if interior_o.is_empty() {
            return Err(Error::DegenerateRegion(String::from("empty interior O")));
        }
        let mut is_boundary = vec![false; n];
        for &s in &interior_o {
            for &(nb, _) in parent.neighbors(s) {
                if !in_o[nb] {
                    is_boundary[nb] = true;
                }
            }
        }
        let boundary: Vec<usize> = (0..n).filter(|&s| is_boundary[s]).collect();
        let interior_n: Vec<usize> = (0..n).filter(|&s| !in_o[s] && !is_boundary[s]).collect();
        if interior_n.is_empty() {
            return Err(Error::DegenerateRegion(String::from(
                "empty exterior N (selection covers the mesh up to its boundary)",
            )));
        }
        if !connected_within(&parent, &interior_o) {
            return Err(Error::DegenerateRegion(String::from(
                "interior O is not connected",
            )));
        }
        let sub_o = build_subregion(&parent, &interior_o, &boundary)?;
        let sub_n = build_subregion(&parent, &interior_n, &boundary)?;
        let sub_boundary = if boundary.is_empty() {
            None
        } else {
            Some(build_boundary_subregion(&parent, &boundary)?)
        };
        Ok(RegionDecomposition {
            parent,
            interior_o,
            interior_n,
            boundary,
            sub_o,
            sub_n,
            sub_boundary,
        })
    }

    pub fn parent(&self) -> &Arc<Mesh> {
        &self.parent
    }

    pub fn interior_o(&self) -> &[usize] {
        &self.interior_o
    }

    pub fn interior_n(&self) -> &[usize] {
        &self.interior_n
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn subregion(&self, side: Side) -> &SubRegion {
        match side {
            Side::O => &self.sub_o,
            Side::N => &self.sub_n,
        }
    }

    /// The separating sites as their own free subsystem, if any.
    pub fn boundary_subregion(&self) -> Option<&SubRegion> {
        self.sub_boundary.as_ref()
    }

    /// Restrict a global configuration to the boundary sites.
    pub fn project_boundary(&self, config: &FieldConfig) -> Result<Option<FieldConfig>> {
        let Some(sub) = &self.sub_boundary else {
            return Ok(None);
        };
        if !config.mesh().compatible(&self.parent) {
            return Err(Error::MeshMismatch(format!(
                "configuration has {} sites, parent mesh {}",
                config.len(),
                self.parent.n_sites()
            )));
        }
        let values = sub.sites.iter().map(|&s| config.value(s)).collect();
        Ok(Some(FieldConfig::new(sub.mesh.clone(), values)?))
    }

    /// Restrict a global configuration to `interior ∪ ∂O` of one side.
    /// Linear in the configuration.
    pub fn project(&self, side: Side, config: &FieldConfig) -> Result<FieldConfig> {
        if !config.mesh().compatible(&self.parent) {
            return Err(Error::MeshMismatch(format!(
                "configuration has {} sites, parent mesh {}",
                config.len(),
                self.parent.n_sites()
            )));
        }
        let sub = self.subregion(side);
        let values = sub.sites.iter().map(|&s| config.value(s)).collect();
        FieldConfig::new(sub.mesh.clone(), values)
    }

    /// Restriction to `O ∪ ∂O`.
    pub fn project_o(&self, config: &FieldConfig) -> Result<FieldConfig> {
        self.project(Side::O, config)
    }

    /// Restriction to `N ∪ ∂O`.
    pub fn project_n(&self, config: &FieldConfig) -> Result<FieldConfig> {
        self.project(Side::N, config)
    }

    /// Glue per-side configurations back into a global one. The two fields
    /// must agree on `∂O` within `tol` (absolute); the glued field takes
    /// its boundary values from the O side, so `project_o ∘ glue` is exact.
    pub fn glue_with_tol(
        &self,
        f_o: &FieldConfig,
        f_n: &FieldConfig,
        tol: f64,
    ) -> Result<FieldConfig> {
        if !f_o.mesh().compatible(&self.sub_o.mesh) || !f_n.mesh().compatible(&self.sub_n.mesh) {
            return Err(Error::MeshMismatch(String::from(
                "glue arguments do not live on this decomposition's submeshes",
            )));
        }
        let mut offending = Vec::new();
        for &b in &self.boundary {
            let vo = f_o.value(self.sub_o.local_index(b).expect("boundary in O submesh"));
            let vn = f_n.value(self.sub_n.local_index(b).expect("boundary in N submesh"));
            let gap = (vo - vn).abs();
            if gap > tol {
                offending.push((b, gap));
            }
        }
        if !offending.is_empty() {
            return Err(Error::BoundaryMismatch(offending));
        }
        let mut values = vec![0.0; self.parent.n_sites()];
        for (local, &parent_site) in self.sub_n.sites.iter().enumerate() {
            values[parent_site] = f_n.value(local);
        }
        for (local, &parent_site) in self.sub_o.sites.iter().enumerate() {
            values[parent_site] = f_o.value(local);
        }
        FieldConfig::new(self.parent.clone(), values)
    }

    /// [`RegionDecomposition::glue_with_tol`] at the default tolerance
    /// `1e-12`.
    pub fn glue(&self, f_o: &FieldConfig, f_n: &FieldConfig) -> Result<FieldConfig> {
        self.glue_with_tol(f_o, f_n, DEFAULT_GLUE_TOL)
    }

    /// Check that every edge out of `interior O` lands on `∂O`.
    pub fn separation_holds(&self) -> bool {
        let mut class = vec![0u8; self.parent.n_sites()];
        for &s in &self.interior_n {
            class[s] = 1;
        }
        for &s in &self.boundary {
            class[s] = 2;
        }
        for &s in &self.interior_o {
            class[s] = 3;
        }
        self.interior_o.iter().all(|&s| {
            self.parent
                .neighbors(s)
                .iter()
                .all(|&(nb, _)| class[nb] != 1)
        })
    }
}

/// Absolute tolerance for boundary agreement when gluing.
pub const DEFAULT_GLUE_TOL: f64 = 1e-12;

fn connected_within(mesh: &Mesh, sites: &[usize]) -> bool {
    if sites.len() <= 1 || mesh.edges().is_empty() {
        // Edgeless (product) meshes carry no connectivity notion.
        return true;
    }
    let mut member = vec![false; mesh.n_sites()];
    for &s in sites {
        member[s] = true;
    }
    let mut seen = vec![false; mesh.n_sites()];
    let mut stack = vec![sites[0]];
    seen[sites[0]] = true;
    let mut count = 1;
    while let Some(s) = stack.pop() {
        for &(nb, _) in mesh.neighbors(s) {
            if member[nb] && !seen[nb] {
                seen[nb] = true;
                count += 1;
                stack.push(nb);
            }
        }
    }
    count == sites.len()
}

/// The boundary sites as a fully free submesh. Tagged as a product mesh:
/// separating sites are usually mutually non-adjacent, and any edges
/// among them are still inherited.
fn build_boundary_subregion(parent: &Mesh, boundary: &[usize]) -> Result<SubRegion> {
    let mut sites: Vec<usize> = boundary.to_vec();
    sites.sort_unstable();
    let mut local = vec![usize::MAX; parent.n_sites()];
    for (i, &s) in sites.iter().enumerate() {
        local[s] = i;
    }
    let positions = sites.iter().map(|&s| parent.position(s).to_vec()).collect();
    let weights = sites.iter().map(|&s| parent.weight(s)).collect();
    let mut edges = Vec::new();
    for e in parent.edges() {
        if local[e.a] != usize::MAX && local[e.b] != usize::MAX {
            let (a, b) = (local[e.a], local[e.b]);
            edges.push(Edge {
                a: a.min(b),
                b: b.max(a),
                length: e.length,
            });
        }
    }
    let mesh = Mesh::assemble(
        crate::mesh::Topology::Product,
        positions,
        weights,
        edges,
        Vec::new(),
    )?;
    let edge_parent = mesh
        .edges()
        .iter()
        .map(|e| {
            parent
                .edge_index(sites[e.a], sites[e.b])
                .expect("boundary edge has a parent edge")
        })
        .collect();
    Ok(SubRegion {
        mesh: Arc::new(mesh),
        sites,
        edge_parent,
    })
}

fn build_subregion(parent: &Mesh, interior: &[usize], boundary: &[usize]) -> Result<SubRegion> {
    let mut sites: Vec<usize> = interior.iter().chain(boundary).copied().collect();
    sites.sort_unstable();
    let mut local = vec![usize::MAX; parent.n_sites()];
    for (i, &s) in sites.iter().enumerate() {
        local[s] = i;
    }
    let positions = sites.iter().map(|&s| parent.position(s).to_vec()).collect();
    let weights = sites.iter().map(|&s| parent.weight(s)).collect();
    let mut edges = Vec::new();
    for e in parent.edges() {
        if local[e.a] != usize::MAX && local[e.b] != usize::MAX {
            let (a, b) = (local[e.a], local[e.b]);
            edges.push(Edge {
                a: a.min(b),
                b: b.max(a),
                length: e.length,
            });
        }
    }
    // Dirichlet: the new ∂O sites plus anything already fixed upstream.
    let dirichlet: Vec<usize> = sites
        .iter()
        .enumerate()
        .filter(|(_, &s)| parent.is_dirichlet(s) || boundary.contains(&s))
        .map(|(i, _)| i)
        .collect();
    let mesh = Mesh::assemble(parent.topology(), positions, weights, edges, dirichlet)?;
    let edge_parent = mesh
        .edges()
        .iter()
        .map(|e| {
            parent
                .edge_index(sites[e.a], sites[e.b])
                .expect("submesh edge has a parent edge")
        })
        .collect();
    Ok(SubRegion {
        mesh: Arc::new(mesh),
        sites,
        edge_parent,
    })
}
