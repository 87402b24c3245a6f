//! Discretized spatial manifolds.
//!
//! A [`Mesh`] is a finite weighted graph standing in for a spatial
//! manifold `M`: per-site quadrature weights play the role of the volume
//! element, edges carry the lattice spacing, and a topology tag records
//! which constructor produced the mesh. Sites flagged as Dirichlet are
//! held fixed by every boundary-value solve (mesh boundary rings, and
//! later the `∂O` sites of intrinsic submeshes).
//!
//! Coordinate conventions for region predicates and plotting:
//! circle sites carry `[θ]` with `θ ∈ [0, 2π)` scaled to the circle's
//! angular coordinate, interval sites `[x]`, annulus sites `[r, θ]`, and
//! product (plain degree-of-freedom) sites `[index]`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // f64 math via the trait in no_std builds
use num_traits::Float;

use crate::error::{Error, Result};

/// Which constructor produced the mesh. Purely descriptive; the solvers
/// only look at weights, edges and Dirichlet flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Circle,
    Interval,
    Annulus,
    /// A bare product of scalar degrees of freedom (particle systems,
    /// mode coordinates). Sites carry unit weight and no adjacency.
    Product,
}

impl Topology {
    pub fn as_str(&self) -> &'static str {
        match self {
            Topology::Circle => "circle",
            Topology::Interval => "interval",
            Topology::Annulus => "annulus",
            Topology::Product => "product",
        }
    }

    pub fn parse(s: &str) -> Option<Topology> {
        match s {
            "circle" => Some(Topology::Circle),
            "interval" => Some(Topology::Interval),
            "annulus" => Some(Topology::Annulus),
            "product" => Some(Topology::Product),
            _ => None,
        }
    }
}

/// One undirected mesh edge with its geometric length. `a < b` always.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

/// A discretized spatial manifold: sites, positions, quadrature weights,
/// adjacency, and Dirichlet flags. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    topology: Topology,
    positions: Vec<Vec<f64>>,
    weights: Vec<f64>,
    adjacency: Vec<Vec<(usize, f64)>>,
    edges: Vec<Edge>,
    dirichlet: Vec<bool>,
}

impl Mesh {
    /// Uniform periodic mesh on a circle of the given circumference.
    ///
    /// Site `i` sits at angle `2πi/n`; weights are `circumference / n`.
    pub fn circle(n_sites: usize, circumference: f64) -> Result<Mesh> {
        if n_sites < 3 {
            return Err(Error::InvalidMesh(format!(
                "circle needs at least 3 sites, got {n_sites}"
            )));
        }
        if !(circumference > 0.0) || !circumference.is_finite() {
            return Err(Error::InvalidMesh(format!(
                "circumference must be positive, got {circumference}"
            )));
        }
        let h = circumference / n_sites as f64;
        let two_pi = 2.0 * core::f64::consts::PI;
        let positions = (0..n_sites)
            .map(|i| vec![two_pi * i as f64 / n_sites as f64])
            .collect();
        let weights = vec![h; n_sites];
        let mut edges = Vec::with_capacity(n_sites);
        for i in 0..n_sites {
            let j = (i + 1) % n_sites;
            edges.push(Edge {
                a: i.min(j),
                b: i.max(j),
                length: h,
            });
        }
        Self::assemble(Topology::Circle, positions, weights, edges, vec![])
    }

    /// Uniform mesh on an interval `[0, length]` with Dirichlet ends.
    pub fn interval(n_sites: usize, length: f64) -> Result<Mesh> {
        if n_sites < 3 {
            return Err(Error::InvalidMesh(format!(
                "interval needs at least 3 sites, got {n_sites}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidMesh(format!(
                "length must be positive, got {length}"
            )));
        }
        let h = length / (n_sites - 1) as f64;
        let positions = (0..n_sites).map(|i| vec![h * i as f64]).collect();
        // Trapezoid weights: half cells at the two ends.
        let mut weights = vec![h; n_sites];
        weights[0] = 0.5 * h;
        weights[n_sites - 1] = 0.5 * h;
        let edges = (0..n_sites - 1)
            .map(|i| Edge {
                a: i,
                b: i + 1,
                length: h,
            })
            .collect();
        Self::assemble(
            Topology::Interval,
            positions,
            weights,
            edges,
            vec![0, n_sites - 1],
        )
    }

    /// Polar-grid mesh on the annulus `r1 ≤ r ≤ r2`, periodic in θ.
    ///
    /// Site `(i, j)` (id `i·n_theta + j`) sits at radius `r1 + i·dr` and
    /// angle `j·dθ`. Weights approximate `r dr dθ` with half radial cells
    /// on the two rims; the rims are flagged Dirichlet.
    pub fn annulus(n_r: usize, n_theta: usize, r1: f64, r2: f64) -> Result<Mesh> {
        if !(r1 > 0.0) || !(r2 > r1) {
            return Err(Error::InvalidGeometry(format!(
                "annulus radii must satisfy 0 < r1 < r2, got r1 = {r1}, r2 = {r2}"
            )));
        }
        if n_r < 2 || n_theta < 8 {
            return Err(Error::InvalidMesh(format!(
                "annulus grid needs n_r >= 2 and n_theta >= 8, got ({n_r}, {n_theta})"
            )));
        }
        let dr = (r2 - r1) / (n_r - 1) as f64;
        let dtheta = 2.0 * core::f64::consts::PI / n_theta as f64;
        let id = |i: usize, j: usize| i * n_theta + j;
        let mut positions = Vec::with_capacity(n_r * n_theta);
        let mut weights = Vec::with_capacity(n_r * n_theta);
        let mut edges = Vec::new();
        for i in 0..n_r {
            let r = r1 + dr * i as f64;
            let dr_cell = if i == 0 || i == n_r - 1 { 0.5 * dr } else { dr };
            for j in 0..n_theta {
                positions.push(vec![r, dtheta * j as f64]);
                weights.push(r * dr_cell * dtheta);
                // Angular edge to the next site on the same ring.
                let jn = (j + 1) % n_theta;
                edges.push(Edge {
                    a: id(i, j).min(id(i, jn)),
                    b: id(i, j).max(id(i, jn)),
                    length: r * dtheta,
                });
                // Radial edge to the next ring.
                if i + 1 < n_r {
                    edges.push(Edge {
                        a: id(i, j),
                        b: id(i + 1, j),
                        length: dr,
                    });
                }
            }
        }
        let dirichlet = (0..n_theta)
            .map(|j| id(0, j))
            .chain((0..n_theta).map(|j| id(n_r - 1, j)))
            .collect();
        Self::assemble(Topology::Annulus, positions, weights, edges, dirichlet)
    }

    /// A bare product of `n` scalar degrees of freedom: unit weights, no
    /// adjacency. Used for particle systems and mode coordinates, where
    /// configuration space is a plain product of lines.
    pub fn degrees_of_freedom(n: usize) -> Result<Mesh> {
        if n == 0 {
            return Err(Error::InvalidMesh(String::from(
                "a product mesh needs at least one degree of freedom",
            )));
        }
        let positions = (0..n).map(|i| vec![i as f64]).collect();
        Self::assemble(Topology::Product, positions, vec![1.0; n], vec![], vec![])
    }

    /// Build a mesh from explicit parts (deserialization and custom
    /// geometries), with the same validation as the shape constructors.
    pub fn from_parts(
        topology: Topology,
        positions: Vec<Vec<f64>>,
        weights: Vec<f64>,
        edges: Vec<Edge>,
        dirichlet_sites: Vec<usize>,
    ) -> Result<Mesh> {
        Self::assemble(topology, positions, weights, edges, dirichlet_sites)
    }

    /// Build a mesh from explicit parts; used by the constructors above
    /// and by submesh extraction. Checks the structural invariants.
    pub(crate) fn assemble(
        topology: Topology,
        positions: Vec<Vec<f64>>,
        weights: Vec<f64>,
        mut edges: Vec<Edge>,
        dirichlet_sites: Vec<usize>,
    ) -> Result<Mesh> {
        let n = positions.len();
        if weights.len() != n {
            return Err(Error::InvalidMesh(format!(
                "weights length {} does not match {} sites",
                weights.len(),
                n
            )));
        }
        for (i, w) in weights.iter().enumerate() {
            if !(*w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidMesh(format!("weight {w} at site {i}")));
            }
        }
        edges.sort_by_key(|p| (p.a, p.b));
        edges.dedup_by(|p, q| p.a == q.a && p.b == q.b);
        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            if e.a >= n || e.b >= n || e.a == e.b {
                return Err(Error::InvalidMesh(format!(
                    "edge ({}, {}) out of range for {} sites",
                    e.a, e.b, n
                )));
            }
            if !(e.length > 0.0) || !e.length.is_finite() {
                return Err(Error::InvalidMesh(format!(
                    "edge ({}, {}) has nonpositive length {}",
                    e.a, e.b, e.length
                )));
            }
            adjacency[e.a].push((e.b, e.length));
            adjacency[e.b].push((e.a, e.length));
        }
        if topology != Topology::Product {
            if let Some(lonely) = adjacency.iter().position(|nb| nb.is_empty()) {
                return Err(Error::InvalidMesh(format!("site {lonely} has no neighbor")));
            }
        }
        let mut dirichlet = vec![false; n];
        for s in dirichlet_sites {
            if s >= n {
                return Err(Error::InvalidMesh(format!(
                    "Dirichlet site {s} out of range"
                )));
            }
            dirichlet[s] = true;
        }
        Ok(Mesh {
            topology,
            positions,
            weights,
            adjacency,
            edges,
            dirichlet,
        })
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn n_sites(&self) -> usize {
        self.positions.len()
    }

    pub fn position(&self, site: usize) -> &[f64] {
        &self.positions[site]
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn weight(&self, site: usize) -> f64 {
        self.weights[site]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of all quadrature weights: the total measure of `M`.
    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of a site as `(site, edge length)` pairs.
    pub fn neighbors(&self, site: usize) -> &[(usize, f64)] {
        &self.adjacency[site]
    }

    /// Index into [`Mesh::edges`] for the undirected pair `(a, b)`.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search_by(|e| (e.a, e.b).cmp(&key)).ok()
    }

    pub fn is_dirichlet(&self, site: usize) -> bool {
        self.dirichlet[site]
    }

    /// Sites held fixed by boundary-value solves.
    pub fn dirichlet_sites(&self) -> Vec<usize> {
        (0..self.n_sites()).filter(|&s| self.dirichlet[s]).collect()
    }

    /// Sites that are genuine degrees of freedom.
    pub fn free_sites(&self) -> Vec<usize> {
        (0..self.n_sites())
            .filter(|&s| !self.dirichlet[s])
            .collect()
    }

    pub fn n_free(&self) -> usize {
        self.dirichlet.iter().filter(|d| !**d).count()
    }

    /// Two fields/specs are compatible when they carry the same number of
    /// sites. Meshes are immutable, so this is the only cheap check that
    /// survives serialization round trips.
    pub fn compatible(&self, other: &Mesh) -> bool {
        self.n_sites() == other.n_sites()
    }

    /// Weighted graph Laplacian `L` with entries `L[a][b] = -c_e/ℓ_e` on
    /// edges, diagonal minus the row sum. The quadratic form
    /// `½ φᵀ L φ = ½ Σ_e c_e (φ_a - φ_b)² / ℓ_e` is the lattice Dirichlet
    /// energy; `stiffness` (aligned to [`Mesh::edges`]) defaults to 1.
    pub fn graph_laplacian(&self, stiffness: Option<&[f64]>) -> DMatrix<f64> {
        let n = self.n_sites();
        let mut l = DMatrix::zeros(n, n);
        for (idx, e) in self.edges.iter().enumerate() {
            let c = stiffness.map_or(1.0, |s| s[idx]);
            let w = c / e.length;
            l[(e.a, e.a)] += w;
            l[(e.b, e.b)] += w;
            l[(e.a, e.b)] -= w;
            l[(e.b, e.a)] -= w;
        }
        l
    }
}
