//! The delayed (Tonelli) approximation of
//! `dX ∈ AX dt + F(t, X) dt + G(t, X) dW`, its one-step solution operators,
//! the residual process, and the lag-free mild Euler reference.
//!
//! On the grid `t_k = k·dt` with lag `1/n = L·dt` the scheme is
//!
//! ```text
//! X_{k+1} = ξ                                              (k + 1 ≤ L)
//! X_{k+1} = S(dt) X_k + S(dt + 1/n) [f_{k-L} dt + g_{k-L} ΔW_{k-L}]
//! f_j = σ(F(t_j, X_j)),  g_j = σ(G(t_j, X_j))
//! ```
//!
//! which is exactly the left-endpoint discretisation of
//! `X(t) = S(t - 1/n)ξ + ∫₀^{t-1/n} S(t - s)(f ds + g dW)`. Every step is
//! explicit: the selections used at `t_{k+1}` only involve states at or
//! before `t_{k+1-L-1}`. With `L = 0` the same recursion is the exponential
//! (mild) Euler scheme.

mod ensemble;
mod scheme;

use std::sync::Arc;

use thiserror::Error;

pub use ensemble::PathEnsemble;
pub use scheme::{
    mild_euler_reference, phi_apply, residual_z, tonelli_step_ensemble, SchemeOptions, SelectionSource,
};

use crate::coefficients::{CoefficientError, CoefficientHypotheses, MultiMap, Selector};
use crate::driver::rng::{GaussianStream, DOMAIN_INITIAL};
use crate::driver::DriverError;
use crate::semigroup::{SemigroupError, SemigroupOperator};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("grid incompatibility: {0}")]
    Grid(String),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error(transparent)]
    Coefficient(#[from] CoefficientError),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error("path {path} blew up at step {step} (state norm {norm:e})")]
    BlowUp { path: u64, step: usize, norm: f64 },
    #[error("selection of {which} on path {path} at step {step} lies {residual:e} outside its value set")]
    Membership {
        which: &'static str,
        path: u64,
        step: usize,
        residual: f64,
    },
    #[error("{which} is not single-valued on path {path} at step {step}")]
    NotSingleValued {
        which: &'static str,
        path: u64,
        step: usize,
    },
    #[error("ensemble carries no stored selections")]
    MissingSelections,
    #[error("ensemble does not match: {0}")]
    Mismatch(String),
}

/// Law of the initial condition `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Point(Vector),
    /// `N(mean, cov)`; sampled through a symmetric square root of `cov`.
    Gaussian { mean: Vector, cov: Matrix },
}

impl InitialCondition {
    pub fn dim(&self) -> usize {
        match self {
            InitialCondition::Point(x) => x.len(),
            InitialCondition::Gaussian { mean, .. } => mean.len(),
        }
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        match self {
            InitialCondition::Point(x) => {
                if x.iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(SchemeError::InvalidScenario("initial point is not finite".into()))
                }
            }
            InitialCondition::Gaussian { mean, cov } => {
                let d = mean.len();
                if cov.shape() != (d, d) {
                    return Err(SchemeError::InvalidScenario(format!(
                        "covariance is {:?}, expected {d}×{d}",
                        cov.shape()
                    )));
                }
                if (cov - cov.transpose()).abs().max() > 1e-12 * cov.abs().max().max(1.0) {
                    return Err(SchemeError::InvalidScenario("covariance is not symmetric".into()));
                }
                let eig = cov.clone().symmetric_eigen();
                if eig.eigenvalues.min() < -1e-12 * cov.abs().max().max(1.0) {
                    return Err(SchemeError::InvalidScenario(
                        "covariance is not positive semidefinite".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    fn root(cov: &Matrix) -> Matrix {
        let eig = cov.clone().symmetric_eigen();
        let sq = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        &eig.eigenvectors * Matrix::from_diagonal(&sq) * eig.eigenvectors.transpose()
    }

    /// `ξ` for path `path` of a run seeded with `seed`.
    pub fn sample(&self, seed: u64, path: u64) -> Vector {
        match self {
            InitialCondition::Point(x) => x.clone(),
            InitialCondition::Gaussian { mean, cov } => {
                let mut s = GaussianStream::new(seed, DOMAIN_INITIAL, path);
                let z = Vector::from_fn(mean.len(), |_, _| s.next_gaussian());
                mean + Self::root(cov) * z
            }
        }
    }
}

/// A complete problem instance.
#[derive(Debug, Clone)]
pub struct InclusionScenario {
    pub de: usize,
    pub dh: usize,
    pub op: Arc<SemigroupOperator>,
    pub f: MultiMap,
    pub g: MultiMap,
    pub hyp: CoefficientHypotheses,
    pub xi: InitialCondition,
    pub horizon: f64,
    pub selector: Selector,
    /// Identifies the configuration the scenario was built from.
    pub hash: u64,
}

impl InclusionScenario {
    pub fn validate(&self) -> Result<(), SchemeError> {
        let bad = |m: String| Err(SchemeError::InvalidScenario(m));
        if self.de == 0 || self.dh == 0 {
            return bad("dimensions must be positive".into());
        }
        if self.op.dim() != self.de {
            return bad(format!("operator acts on R^{}, state space is R^{}", self.op.dim(), self.de));
        }
        if self.f.domain_dim() != self.de || self.f.codomain_dim() != self.de {
            return bad(format!(
                "F maps R^{} to R^{}, expected R^{} to R^{}",
                self.f.domain_dim(),
                self.f.codomain_dim(),
                self.de,
                self.de
            ));
        }
        if self.g.domain_dim() != self.de || self.g.codomain_dim() != self.de * self.dh {
            return bad(format!(
                "G maps R^{} to R^{}, expected R^{} to R^{} (dE·dH)",
                self.g.domain_dim(),
                self.g.codomain_dim(),
                self.de,
                self.de * self.dh
            ));
        }
        if self.xi.dim() != self.de {
            return bad(format!("initial condition lives in R^{}", self.xi.dim()));
        }
        self.xi.validate()?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        self.selector.validate(self.de)?;
        self.selector.validate(self.de * self.dh)?;
        Ok(())
    }
}
