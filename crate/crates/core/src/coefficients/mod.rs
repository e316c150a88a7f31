//! Set-valued coefficients `F(t, x)` (drift) and `G(t, x)` (diffusion), the
//! comparison modulus `L`, and sampling checks of the growth and modulus
//! hypotheses.
//!
//! Diffusion values are `dE × dH` matrices flattened row-major, so `G` is a
//! [`MultiMap`] into `R^{dE·dH}`.

mod hypotheses;
mod modulus;
mod osgood;
mod selector;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use hypotheses::{
    check_growth, check_modulus, sample_pairs, sample_points, CoefficientHypotheses, GrowthReport,
    ModulusReport, SamplingSpec,
};
pub use modulus::{ModulusShape, OsgoodModulus};
pub use osgood::{osgood_iterate, OsgoodOutcome, OsgoodVerdict};
pub use selector::{caratheodory_selector, certify_selector, SelectionKey, Selector, SelectorRule};

use crate::convexset::{ConvexBody, GeometryError};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoefficientError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("modulus is not finite at t = {t}, u = {u}")]
    NonFiniteModulus { t: f64, u: f64 },
    #[error("selection lies {residual:e} outside the value set (allowed {tol:e}) at t = {t}")]
    Membership { residual: f64, tol: f64, t: f64 },
    #[error("no samples given")]
    EmptySamples,
}

type EvalFn = dyn Fn(f64, &Vector) -> ConvexBody + Send + Sync;

/// A map `(t, x) ↦ K ⊂ R^{codomain_dim}` with convex compact values.
#[derive(Clone)]
pub struct MultiMap {
    domain_dim: usize,
    codomain_dim: usize,
    label: String,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for MultiMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MultiMap({}: R^{} → cc(R^{}))",
            self.label, self.domain_dim, self.codomain_dim
        )
    }
}

impl MultiMap {
    /// Wraps an arbitrary evaluation closure. The closure must return
    /// bodies of dimension `codomain_dim`; [`MultiMap::eval`] checks it.
    pub fn from_fn(
        domain_dim: usize,
        codomain_dim: usize,
        label: impl Into<String>,
        f: impl Fn(f64, &Vector) -> ConvexBody + Send + Sync + 'static,
    ) -> Self {
        Self {
            domain_dim,
            codomain_dim,
            label: label.into(),
            eval: Arc::new(f),
        }
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, t: f64, x: &Vector) -> Result<ConvexBody, CoefficientError> {
        if x.len() != self.domain_dim {
            return Err(CoefficientError::DimensionMismatch {
                what: "state",
                expected: self.domain_dim,
                found: x.len(),
            });
        }
        let k = (self.eval)(t, x);
        if k.dim() != self.codomain_dim {
            return Err(CoefficientError::DimensionMismatch {
                what: "value",
                expected: self.codomain_dim,
                found: k.dim(),
            });
        }
        Ok(k)
    }

    /// Whether the value at `(t, x)` is a single point.
    pub fn is_singleton_at(&self, t: f64, x: &Vector) -> Result<bool, CoefficientError> {
        Ok(self.eval(t, x)?.is_singleton())
    }
}

/// Time profile `r(t) ≥ 0` of a tube radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusFn {
    Const(f64),
    /// `a + b·t`.
    Linear { a: f64, b: f64 },
    /// `amp·|sin(freq·t)|`.
    AbsSin { amp: f64, freq: f64 },
}

impl RadiusFn {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            RadiusFn::Const(r) => r,
            RadiusFn::Linear { a, b } => a + b * t,
            RadiusFn::AbsSin { amp, freq } => amp * (freq * t).sin().abs(),
        }
    }

    /// `sup_{[0, horizon]} r`.
    pub fn max_on(&self, horizon: f64) -> f64 {
        match *self {
            RadiusFn::Const(r) => r,
            RadiusFn::Linear { a, b } => a.max(a + b * horizon),
            RadiusFn::AbsSin { amp, .. } => amp,
        }
    }

    /// Rejects profiles that go negative on `[0, horizon]`.
    pub fn validate(&self, horizon: f64) -> Result<(), CoefficientError> {
        let lowest = match *self {
            RadiusFn::Const(r) => r,
            RadiusFn::Linear { a, b } => a.min(a + b * horizon),
            RadiusFn::AbsSin { amp, freq } => {
                if !freq.is_finite() {
                    f64::NAN
                } else {
                    amp
                }
            }
        };
        if lowest >= 0.0 && lowest.is_finite() {
            Ok(())
        } else {
            Err(CoefficientError::InvalidParameter(format!(
                "radius profile {self:?} is negative or non-finite on [0, {horizon}]"
            )))
        }
    }
}

/// State-dependent diffusion matrix `g(x) ∈ R^{dE×dH}`.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixFn {
    Const(Matrix),
    /// `g_ij(x) = base_ij + slope_ij·x_i`.
    Affine { base: Matrix, slope: Matrix },
}

impl MatrixFn {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            MatrixFn::Const(m) => m.shape(),
            MatrixFn::Affine { base, .. } => base.shape(),
        }
    }

    pub fn eval(&self, x: &Vector) -> Matrix {
        match self {
            MatrixFn::Const(m) => m.clone(),
            MatrixFn::Affine { base, slope } => {
                let mut g = base.clone();
                for i in 0..g.nrows() {
                    for j in 0..g.ncols() {
                        g[(i, j)] += slope[(i, j)] * x[i];
                    }
                }
                g
            }
        }
    }

    /// Lipschitz constant of `x ↦ g(x)` in Frobenius norm.
    pub fn lipschitz(&self) -> f64 {
        match self {
            MatrixFn::Const(_) => 0.0,
            MatrixFn::Affine { slope, .. } => slope
                .row_iter()
                .map(|r| r.norm())
                .fold(0.0, f64::max),
        }
    }

    fn validate(&self) -> Result<(), CoefficientError> {
        if let MatrixFn::Affine { base, slope } = self {
            if base.shape() != slope.shape() {
                return Err(CoefficientError::InvalidParameter(format!(
                    "affine matrix_fn: base is {:?} but slope is {:?}",
                    base.shape(),
                    slope.shape()
                )));
            }
        }
        Ok(())
    }
}

/// Row-major flattening of a matrix.
pub fn flatten_row_major(m: &Matrix) -> Vector {
    Vector::from_iterator(m.len(), m.transpose().iter().copied())
}

/// Inverse of [`flatten_row_major`].
pub fn unflatten_row_major(v: &[f64], rows: usize, cols: usize) -> Matrix {
    Matrix::from_row_slice(rows, cols, v)
}

/// `F(t, x) = c + Bx + r(t)·K₀`. Lipschitz in `x` with constant `‖B‖`.
pub fn tube(center: Vector, matrix: Matrix, body: ConvexBody, radius: RadiusFn) -> Result<MultiMap, CoefficientError> {
    let d_out = center.len();
    if matrix.nrows() != d_out {
        return Err(CoefficientError::DimensionMismatch {
            what: "tube matrix rows",
            expected: d_out,
            found: matrix.nrows(),
        });
    }
    if body.dim() != d_out {
        return Err(CoefficientError::DimensionMismatch {
            what: "tube body",
            expected: d_out,
            found: body.dim(),
        });
    }
    let d_in = matrix.ncols();
    let label = format!("tube({d_out}x{d_in})");
    Ok(MultiMap::from_fn(d_in, d_out, label, move |t, x| {
        let scaled = ConvexBody::scaled(radius.eval(t).max(0.0), body.clone()).expect("nonnegative factor");
        ConvexBody::translated(&center + &matrix * x, scaled).expect("dimensions checked")
    }))
}

/// Single-valued `F(t, x) = {c + Bx}`.
pub fn affine(center: Vector, matrix: Matrix) -> Result<MultiMap, CoefficientError> {
    if matrix.nrows() != center.len() {
        return Err(CoefficientError::DimensionMismatch {
            what: "affine matrix rows",
            expected: center.len(),
            found: matrix.nrows(),
        });
    }
    let (d_out, d_in) = matrix.shape();
    Ok(MultiMap::from_fn(d_in, d_out, format!("affine({d_out}x{d_in})"), move |_, x| {
        ConvexBody::point(&center + &matrix * x).expect("finite")
    }))
}

/// The same body for every `(t, x)`.
pub fn constant(domain_dim: usize, body: ConvexBody) -> MultiMap {
    let d = body.dim();
    MultiMap::from_fn(domain_dim, d, format!("constant({})", body.kind()), move |_, _| body.clone())
}

/// Scalar profile `m(δ) = δ (1 - ln δ)^{1/p}` on `[0, 1]`, `m(δ) = δ` beyond.
/// `m(δ)^p = δ^p (1 - ln δ)`, so `a·m` has modulus `a^p u (1 - ln u)`.
pub fn osgood_profile(delta: f64, p: f64) -> f64 {
    if delta <= 0.0 {
        0.0
    } else if delta <= 1.0 {
        delta * (1.0 - delta.ln()).powf(1.0 / p)
    } else {
        delta
    }
}

/// Scalar Osgood-but-not-Lipschitz family `F(t, x) = B(a·m(x⁺), r)`.
/// Satisfies growth with `η = a + r` and the modulus `loglinear(C = a^p)`.
pub fn osgood_scalar(a: f64, radius: f64, p: f64) -> Result<MultiMap, CoefficientError> {
    if !(a >= 0.0 && radius >= 0.0 && p > 2.0 && a.is_finite() && radius.is_finite()) {
        return Err(CoefficientError::InvalidParameter(format!(
            "osgood family needs a ≥ 0, r ≥ 0, p > 2 (got a = {a}, r = {radius}, p = {p})"
        )));
    }
    Ok(MultiMap::from_fn(1, 1, "osgood(1)", move |_, x| {
        let c = Vector::from_element(1, a * osgood_profile(x[0], p));
        ConvexBody::ball(c, radius).expect("valid ball")
    }))
}

/// Single-valued diffusion `G(t, x) = {g(x)}`.
pub fn diffusion_singleton(g: MatrixFn) -> Result<MultiMap, CoefficientError> {
    diffusion_ball(g, 0.0)
}

/// `G(t, x) = B(g(x), r)` in the Frobenius norm (a point when `r = 0`).
pub fn diffusion_ball(g: MatrixFn, radius: f64) -> Result<MultiMap, CoefficientError> {
    g.validate()?;
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(CoefficientError::InvalidParameter(format!("diffusion radius {radius}")));
    }
    let (de, dh) = g.shape();
    let label = if radius == 0.0 {
        format!("singleton({de}x{dh})")
    } else {
        format!("ball({de}x{dh})")
    };
    Ok(MultiMap::from_fn(de, de * dh, label, move |_, x| {
        let c = flatten_row_major(&g.eval(x));
        if radius == 0.0 {
            ConvexBody::point(c).expect("finite")
        } else {
            ConvexBody::ball(c, radius).expect("valid ball")
        }
    }))
}
