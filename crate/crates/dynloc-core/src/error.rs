//! Crate-wide error type.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong while building meshes, evaluating actions
/// or running the solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Mesh construction parameters are unusable (too few sites, ...).
    InvalidMesh(String),
    /// Geometric parameters are inconsistent (e.g. annulus with r2 <= r1).
    InvalidGeometry(String),
    /// A region decomposition selected an empty interior or exterior.
    DegenerateRegion(String),
    /// Two objects that must live on the same mesh do not.
    MeshMismatch(String),
    /// Fields being glued disagree on the shared boundary; lists the
    /// offending parent-mesh site ids with their mismatch.
    BoundaryMismatch(Vec<(usize, f64)>),
    /// A conformal supermetric weight is not strictly positive.
    MetricDegenerate { site: usize, weight: f64 },
    /// Action specification violates an invariant (asymmetric kernel,
    /// nonpositive total time, ...).
    InvalidSpec(String),
    /// Newton iteration exhausted its budget.
    NonConvergence { iters: usize, residual: f64 },
    /// The boundary-value Hessian is singular: the endpoints are at (or
    /// numerically indistinguishable from) a conjugate point.
    ConjugatePoint { rcond: f64 },
    /// The Jacobi conformal factor 2(E - V) is nonpositive somewhere on
    /// the path; lists the offending interval indices.
    ClassicallyForbidden(Vec<usize>),
    /// A Van Vleck evaluation was requested on a near-caustic extremal
    /// without the explicit override.
    Caustic { label: String, determinant: f64 },
    /// A perturbed re-solve inside a sensitivity computation failed.
    Propagation(String),
    /// More eigenmodes requested than free degrees of freedom.
    InvalidCount { requested: usize, available: usize },
    /// The localization threshold must be strictly positive.
    InvalidThreshold(f64),
    /// A localization test could not run (no global extremal converged).
    Inconclusive(String),
    /// Operation not defined for this action or metric kind.
    Unsupported(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidMesh(m) => write!(f, "invalid mesh: {m}"),
            Error::InvalidGeometry(m) => write!(f, "invalid geometry: {m}"),
            Error::DegenerateRegion(m) => write!(f, "degenerate region: {m}"),
            Error::MeshMismatch(m) => write!(f, "mesh mismatch: {m}"),
            Error::BoundaryMismatch(sites) => {
                write!(f, "boundary values disagree at sites:")?;
                for (id, gap) in sites {
                    write!(f, " {id} (|gap| = {gap:.3e})")?;
                }
                Ok(())
            }
            Error::MetricDegenerate { site, weight } => write!(
                f,
                "supermetric degenerate: conformal weight {weight} at site {site}"
            ),
            Error::InvalidSpec(m) => write!(f, "invalid action spec: {m}"),
            Error::NonConvergence { iters, residual } => write!(
                f,
                "no convergence after {iters} iterations (residual {residual:.3e})"
            ),
            Error::ConjugatePoint { rcond } => write!(
                f,
                "singular boundary-value Hessian (rcond {rcond:.3e}): conjugate point"
            ),
            Error::ClassicallyForbidden(slices) => write!(
                f,
                "Jacobi factor nonpositive on {} path interval(s), first at {:?}",
                slices.len(),
                slices.first()
            ),
            Error::Caustic { label, determinant } => write!(
                f,
                "extremal '{label}' is near a caustic (Van Vleck determinant {determinant:.3e})"
            ),
            Error::Propagation(m) => write!(f, "perturbed re-solve failed: {m}"),
            Error::InvalidCount {
                requested,
                available,
            } => write!(
                f,
                "requested {requested} eigenmodes but only {available} degrees of freedom"
            ),
            Error::InvalidThreshold(eps) => {
                write!(f, "localization threshold must be positive, got {eps}")
            }
            Error::Inconclusive(m) => write!(f, "inconclusive: {m}"),
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
