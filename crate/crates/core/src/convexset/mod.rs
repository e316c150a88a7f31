//! Nonempty compact convex subsets of `R^d`.
//!
//! Bodies are built from a closed grammar (points, balls, finite hulls,
//! Minkowski sums, nonnegative scalings and translations). Every operation in
//! this module only needs the support oracle `u ↦ max_{x∈K} ⟨x, u⟩` and its
//! maximiser, so new representations only have to provide those two.
//!
//! Hilbert–Schmidt-valued bodies (diffusion coefficients) are flattened
//! row-major into `R^{dE·dH}`; the Frobenius inner product is then the
//! Euclidean one.

mod body;
mod directions;
mod distance;
mod hausdorff;
mod planar;
mod steiner;

pub use body::{ConvexBody, Direction, Repr};
pub use directions::sphere_directions;
pub use distance::{distance_to_point, distance_to_point_with, Projection};
pub use hausdorff::{hausdorff_distance, hausdorff_distance_with, HausdorffConfig};
pub use planar::convex_hull;
pub use steiner::{planar_steiner_point, steiner_point, QuadratureSpec};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("direction must have unit norm, got {0}")]
    NotUnit(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("projection did not converge in {iterations} iterations (best duality gap {best_gap:e})")]
    NoConvergence { iterations: usize, best_gap: f64 },
    #[error("Hausdorff tolerance {tol:e} not reached for {combination} within {budget} direction cells (remaining gap {gap:e})")]
    ToleranceUnreachable {
        combination: String,
        tol: f64,
        budget: usize,
        gap: f64,
    },
    #[error("Steiner estimate lies {residual:e} away from the body (allowed {tol:e})")]
    SteinerResidual { residual: f64, tol: f64 },
}

pub(crate) fn check_tol(tol: f64) -> Result<(), GeometryError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::BadTolerance(tol))
    }
}
