//! Discrete configuration-space dynamics on small spatial meshes.
//!
//! The crate models a scalar field over a discretized spatial manifold `M`
//! (circle, interval, annulus, or a plain product of scalar degrees of
//! freedom). A point of configuration space is one full field snapshot
//! ([`FieldConfig`]); a field history is a time-discretized [`Path`] of
//! snapshots. Actions of the form `S = ∫ dt (T − V)` are evaluated with
//! midpoint velocities and a trapezoidal potential rule, and their
//! extremals are found by a damped Newton iteration on the discrete
//! Euler–Lagrange residual with both endpoint slices held fixed.
//!
//! On top of the boundary-value solver the crate provides
//!
//! * region decomposition of `M` into an interior `O`, an exterior `N`
//!   and a separating site set `∂O`, with projection and gluing maps
//!   between global and per-region field configurations ([`region`]),
//! * intrinsic (Dirichlet-restricted) actions on subregions and the
//!   ε-localization test comparing projected global extremals against
//!   intrinsic ones ([`locality`]),
//! * Jacobi metrics `h = 2(E − V) g` and the Maupertuis equivalence check
//!   between action extremals and geodesics of `h` ([`jacobi`]),
//! * Van Vleck determinants, semi-classical kernels
//!   `K = Σ √|Δ| exp(iS/ħ)`, and cluster-decomposition diagnostics
//!   ([`semiclassical`]),
//! * mesh Laplacian eigenmodes, exact-rational commensurability analysis
//!   of standing-wave spectra on the circle, and per-mode-sector kernel
//!   factorization ([`modes`]),
//! * canned, self-verifying exemplar experiments ([`exemplars`]).
//!
//! The crate is `no_std`-compatible (with `alloc`); the companion
//! `dynloc-lab` crate carries file formats, experiment configs and the
//! command-line interface.
// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values;
// indexed loops write into several aligned per-site arrays at once.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod action;
pub mod error;
pub mod exemplars;
pub mod field;
pub mod jacobi;
pub mod locality;
pub mod mesh;
pub mod metric;
pub mod modes;
pub mod region;
pub mod semiclassical;
pub mod solve;

mod linalg;

pub use action::{ActionSpec, EdgeStiffness, Path, Potential};
pub use error::{Error, Result};
pub use field::FieldConfig;
pub use mesh::{Mesh, Topology};
pub use metric::SuperMetric;
pub use region::RegionDecomposition;
