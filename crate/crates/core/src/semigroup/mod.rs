//! Matrix semigroups `S(t) = e^{tA}`: evaluation, Yosida approximants and
//! the growth envelope `‖S(t)‖ ≤ M e^{ωt}`.
//!
//! The envelope is fitted numerically: `ω` is the spectral abscissa of `A`
//! and `M` the grid supremum of `‖S(t)‖ e^{-ωt}` on `[0, T]`, with 5%
//! headroom unless that supremum is 1 (contractions keep `M = 1`). The fit
//! is then re-checked on a grid ten times finer and `M` is raised to cover
//! any excess, so the returned pair is never violated on either grid.

mod expm;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use thiserror::Error;

pub use expm::expm;

use crate::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemigroupError {
    #[error("generator must be square, got {rows}×{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("generator has non-finite entries")]
    NonFiniteGenerator,
    #[error("time must be nonnegative and finite, got {0}")]
    BadTime(f64),
    #[error("vector has non-finite entries")]
    NonFiniteVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("grid must be positive")]
    BadGrid,
    #[error("Yosida index n = {n} must exceed the growth exponent ω = {omega}")]
    YosidaBelowOmega { n: u64, omega: f64 },
    #[error("resolvent (nI - A) is singular at n = {n}")]
    SingularResolvent { n: u64 },
}

/// Certified growth bound `‖e^{tA}‖ ≤ M e^{ωt}` on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthEnvelope {
    pub m: f64,
    pub omega: f64,
    pub horizon: f64,
}

impl GrowthEnvelope {
    pub fn bound(&self, t: f64) -> f64 {
        self.m * (self.omega * t).exp()
    }

    /// `C_B(t) = sup_{0≤s≤t} M e^{ωs}`.
    pub fn c_b(&self, t: f64) -> f64 {
        self.m * (self.omega * t).exp().max(1.0)
    }
}

/// Grid used when an operator is constructed.
pub const DEFAULT_ENVELOPE_GRID: usize = 256;

pub struct SemigroupOperator {
    a: Matrix,
    envelope: GrowthEnvelope,
    cache: RwLock<HashMap<u64, Arc<Matrix>>>,
}

impl Clone for SemigroupOperator {
    fn clone(&self) -> Self {
        Self {
            a: self.a.clone(),
            envelope: self.envelope,
            cache: RwLock::new(HashMap::new()),
        }
    }
}

impl std::fmt::Debug for SemigroupOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemigroupOperator")
            .field("a", &self.a)
            .field("envelope", &self.envelope)
            .finish()
    }
}

impl SemigroupOperator {
    /// Operator for generator `a`, with its envelope fitted on `[0, horizon]`.
    pub fn new(a: Matrix, horizon: f64) -> Result<Self, SemigroupError> {
        if !a.is_square() {
            return Err(SemigroupError::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(SemigroupError::NonFiniteGenerator);
        }
        let envelope = fit_envelope(&a, horizon, DEFAULT_ENVELOPE_GRID)?;
        Ok(Self {
            a,
            envelope,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn generator(&self) -> &Matrix {
        &self.a
    }

    pub fn envelope(&self) -> GrowthEnvelope {
        self.envelope
    }

    pub fn m(&self) -> f64 {
        self.envelope.m
    }

    pub fn omega(&self) -> f64 {
        self.envelope.omega
    }

    pub fn c_b(&self, t: f64) -> f64 {
        self.envelope.c_b(t)
    }

    /// `e^{tA}`, memoised by the bit pattern of `t`.
    pub fn exp_at(&self, t: f64) -> Result<Arc<Matrix>, SemigroupError> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(SemigroupError::BadTime(t));
        }
        let key = t.to_bits();
        if let Some(m) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(m));
        }
        let m = Arc::new(expm(&(&self.a * t)));
        let mut cache = self.cache.write().expect("cache lock");
        Ok(Arc::clone(cache.entry(key).or_insert(m)))
    }

    /// `S(t)x`.
    pub fn evolve(&self, t: f64, x: &Vector) -> Result<Vector, SemigroupError> {
        if x.len() != self.dim() {
            return Err(SemigroupError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SemigroupError::NonFiniteVector);
        }
        Ok(&*self.exp_at(t)? * x)
    }

    /// Yosida approximant `A_n = nA(nI - A)^{-1}` as a new operator on the
    /// same horizon.
    pub fn yosida(&self, n: u64) -> Result<SemigroupOperator, SemigroupError> {
        let nf = n as f64;
        if n == 0 || nf <= self.envelope.omega {
            return Err(SemigroupError::YosidaBelowOmega {
                n,
                omega: self.envelope.omega,
            });
        }
        let d = self.dim();
        let resolvent = (Matrix::identity(d, d) * nf - &self.a)
            .try_inverse()
            .filter(|r| r.iter().all(|v| v.is_finite()))
            .ok_or(SemigroupError::SingularResolvent { n })?;
        SemigroupOperator::new(&self.a * resolvent * nf, self.envelope.horizon)
    }

    /// Re-fits `(M, ω)` on `[0, horizon]` with `grid` intervals.
    pub fn growth_envelope(&self, horizon: f64, grid: usize) -> Result<GrowthEnvelope, SemigroupError> {
        fit_envelope(&self.a, horizon, grid)
    }
}

/// Largest singular value.
pub fn operator_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    // √λ_max(MᵀM): much cheaper than a full SVD and accurate to rounding for
    // the small generators used here.
    let g = m.tr_mul(m);
    g.symmetric_eigenvalues().max().max(0.0).sqrt()
}

/// Largest real part of the eigenvalues of `a`.
pub fn spectral_abscissa(a: &Matrix) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `‖e^{tA}‖ e^{-ωt}` at `t = k·horizon/(refine·grid)`, `k = 0..=refine·grid`.
///
/// Exact exponentials are taken at the coarse nodes; the `refine - 1` points
/// in between are reached by multiplying with the one-step exponential.
fn envelope_ratios(a: &Matrix, omega: f64, horizon: f64, grid: usize, refine: usize) -> Vec<f64> {
    let fine = grid * refine;
    let h = horizon / fine as f64;
    let step = expm(&(a * h));
    let mut out = Vec::with_capacity(fine + 1);
    for k in 0..=grid {
        let mut s = expm(&(a * (horizon * k as f64 / grid as f64)));
        let last = if k == grid { 1 } else { refine };
        for j in 0..last {
            let t = h * (k * refine + j) as f64;
            out.push(operator_norm(&s) * (-omega * t).exp());
            if j + 1 < last {
                s = &s * &step;
            }
        }
    }
    out
}

fn fit_envelope(a: &Matrix, horizon: f64, grid: usize) -> Result<GrowthEnvelope, SemigroupError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(SemigroupError::BadHorizon(horizon));
    }
    if grid == 0 {
        return Err(SemigroupError::BadGrid);
    }
    const REFINE: usize = 10;
    let omega = if a.is_empty() { 0.0 } else { spectral_abscissa(a) };
    let ratios = envelope_ratios(a, omega, horizon, grid, REFINE);
    let sup = ratios.iter().step_by(REFINE).copied().fold(0.0, f64::max);
    // Ratios within 1e-12 of the current M are rounding noise of expm.
    let slack = 1.0 + 1e-12;
    let mut m = if sup <= slack { 1.0 } else { 1.05 * sup };
    let fine = ratios.iter().copied().fold(0.0, f64::max);
    if fine > m * slack {
        m = 1.05 * fine;
    }
    Ok(GrowthEnvelope { m, omega, horizon })
}

/// `d × d` zero generator.
pub fn zero(d: usize) -> Matrix {
    Matrix::zeros(d, d)
}

/// `λ I`.
pub fn scaled_identity(d: usize, lambda: f64) -> Matrix {
    Matrix::identity(d, d) * lambda
}

/// Ones on the superdiagonal.
pub fn shift_nilpotent(d: usize) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    for i in 0..d.saturating_sub(1) {
        m[(i, i + 1)] = 1.0;
    }
    m
}

/// Planar rotation generator `[[0, -ω], [ω, 0]]`.
pub fn rotation2d(rate: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[0.0, -rate, rate, 0.0])
}
