//! Simulation and verification toolkit for semilinear stochastic differential
//! inclusions
//!
//! ```text
//! dX_t ∈ A X_t dt + F(t, X_t) dt + G(t, X_t) dW_t
//! ```
//!
//! on finite-dimensional state spaces. The crate is organised bottom-up:
//!
//! - [`convexset`]: compact convex bodies given by support oracles, Hausdorff
//!   distances and the Steiner-point selection.
//! - [`semigroup`]: `S(t) = e^{tA}`, Yosida approximants and growth envelopes.
//! - [`coefficients`]: set-valued drift/diffusion maps, comparison moduli and
//!   sampling-based hypothesis checks.
//! - [`driver`]: counter-based Brownian increments.
//! - [`tonelli`]: the delayed (Tonelli) scheme, the solution operators and
//!   the residual process.
//! - [`diagnostics`]: moments, convolution constants, Aldous statistics,
//!   bounded-Lipschitz distances and covering proxies.
//! - [`config`] and [`io`]: the scenario file grammar and on-disk formats.

pub mod coefficients;
pub mod config;
pub mod convexset;
pub mod diagnostics;
pub mod driver;
pub mod io;
pub mod semigroup;
pub mod stats;
pub mod tonelli;

pub use nalgebra::{DMatrix, DVector};

/// Column vector used for states, body points and directions.
pub type Vector = DVector<f64>;
/// Dense real matrix.
pub type Matrix = DMatrix<f64>;

/// Runs `f` over `0..count` and returns the results in index order.
///
/// With the `parallel` feature this fans out over the current rayon pool;
/// results are always collected in ascending index order so that every
/// downstream reduction is independent of the worker count.
pub(crate) fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}
