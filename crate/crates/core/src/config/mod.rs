//! Scenario files.
//!
//! ```text
//! [space]
//! dE = 1
//! dH = 1
//! T = 2
//!
//! [operator]
//! A = scaled_identity(1, -0.5)        # zero(d) | shift_nilpotent(d) | rotation2d(rate) | matrix([[..]])
//!
//! [coefficients]
//! F = affine(center=[0], matrix=[[0]])
//! G = singleton(matrix_fn=const([[1]]))
//! L = linear(C=1)
//! p = 4
//! eta = 2
//! xi = point([1])
//!
//! [scheme]
//! n_ladder = [64]
//! dt = 0.001953125
//! paths = 10000
//! seed = 7
//! ```
//!
//! Unknown sections and keys are errors, reported with their line. Every
//! optional key has a default; [`ScenarioConfig::print`] writes all keys,
//! and `parse(print(c)) == c`.

mod term;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

pub use term::{fmt_f64, parse_term, Arg, Term};
use term::{split_lines, Line};

use crate::coefficients::{
    self, CoefficientHypotheses, MatrixFn, MultiMap, OsgoodModulus, RadiusFn, SamplingSpec, Selector, SelectorRule,
};
use crate::convexset::{ConvexBody, Direction, QuadratureSpec};
use crate::semigroup::{self, SemigroupOperator};
use crate::tonelli::{InclusionScenario, InitialCondition, SchemeOptions};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn bare(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

// ---------------------------------------------------------------- term access

fn num(t: &Term) -> Result<f64, String> {
    match t {
        Term::Num(s) => s.parse::<f64>().map_err(|e| e.to_string()),
        other => Err(format!("expected a number, found `{other}`")),
    }
}

fn finite(t: &Term) -> Result<f64, String> {
    let x = num(t)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a finite number, found `{t}`"))
    }
}

fn uint(t: &Term) -> Result<u64, String> {
    match t {
        Term::Num(s) => s
            .parse::<u64>()
            .map_err(|_| format!("expected a nonnegative integer, found `{s}`")),
        other => Err(format!("expected an integer, found `{other}`")),
    }
}

fn boolean(t: &Term) -> Result<bool, String> {
    match t {
        Term::Bool(b) => Ok(*b),
        other => Err(format!("expected true or false, found `{other}`")),
    }
}

fn string(t: &Term) -> Result<String, String> {
    match t {
        Term::Str(s) => Ok(s.clone()),
        Term::Ident(s) => Ok(s.clone()),
        other => Err(format!("expected a string, found `{other}`")),
    }
}

fn vector(t: &Term) -> Result<Vec<f64>, String> {
    match t {
        Term::List(items) => items.iter().map(finite).collect(),
        other => Err(format!("expected a list of numbers, found `{other}`")),
    }
}

fn rows(t: &Term) -> Result<Vec<Vec<f64>>, String> {
    let Term::List(items) = t else {
        return Err(format!("expected a matrix `[[..], ..]`, found `{t}`"));
    };
    let rows: Vec<Vec<f64>> = items.iter().map(vector).collect::<Result<_, _>>()?;
    if rows.is_empty() || rows[0].is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err("matrix rows must be nonempty and of equal length".into());
    }
    Ok(rows)
}

fn to_matrix(r: &[Vec<f64>]) -> Matrix {
    Matrix::from_fn(r.len(), r[0].len(), |i, j| r[i][j])
}

/// Matches call arguments to `params`: positional ones in order, then named
/// ones by name. Parameters not supplied are `None`.
fn bind(t: &Term, params: &[&str]) -> Result<Vec<Option<Term>>, String> {
    let (name, args) = match t {
        Term::Call { name, args } => (name.as_str(), args.as_slice()),
        Term::Ident(name) => (name.as_str(), &[][..]),
        other => return Err(format!("expected a constructor, found `{other}`")),
    };
    let mut out: Vec<Option<Term>> = vec![None; params.len()];
    let mut positional = 0;
    for a in args {
        let slot = match &a.name {
            None => {
                if positional >= params.len() {
                    return Err(format!("`{name}` takes at most {} arguments", params.len()));
                }
                positional += 1;
                positional - 1
            }
            Some(n) => params
                .iter()
                .position(|p| p == n)
                .ok_or_else(|| format!("`{name}` has no parameter `{n}` (expected one of {params:?})"))?,
        };
        if out[slot].is_some() {
            return Err(format!("parameter `{}` of `{name}` given twice", params[slot]));
        }
        out[slot] = Some(a.value.clone());
    }
    Ok(out)
}

fn required(v: Option<Term>, name: &str, param: &str) -> Result<Term, String> {
    v.ok_or_else(|| format!("`{name}` needs `{param}`"))
}

fn bind_all(t: &Term, params: &[&str]) -> Result<Vec<Term>, String> {
    let name = t.head().unwrap_or("?").to_string();
    bind(t, params)?
        .into_iter()
        .zip(params)
        .map(|(v, p)| required(v, &name, p))
        .collect()
}

// ---------------------------------------------------------------- typed specs

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    Matrix(Vec<Vec<f64>>),
    Zero(usize),
    ScaledIdentity(usize, f64),
    ShiftNilpotent(usize),
    Rotation2d(f64),
}

impl OperatorSpec {
    fn from_term(t: &Term) -> Result<Self, String> {
        match t.head() {
            Some("matrix") => Ok(Self::Matrix(rows(&bind_all(t, &["rows"])?[0])?)),
            Some("zero") => Ok(Self::Zero(uint(&bind_all(t, &["d"])?[0])? as usize)),
            Some("scaled_identity") => {
                let a = bind_all(t, &["d", "lambda"])?;
                Ok(Self::ScaledIdentity(uint(&a[0])? as usize, finite(&a[1])?))
            }
            Some("shift_nilpotent") => Ok(Self::ShiftNilpotent(uint(&bind_all(t, &["d"])?[0])? as usize)),
            Some("rotation2d") => Ok(Self::Rotation2d(finite(&bind_all(t, &["theta_rate"])?[0])?)),
            _ => Err(format!(
                "unknown operator `{t}` (expected matrix, zero, scaled_identity, shift_nilpotent or rotation2d)"
            )),
        }
    }

    fn to_term(&self) -> Term {
        match self {
            Self::Matrix(r) => Term::call("matrix", vec![(None, Term::rows(r))]),
            Self::Zero(d) => Term::call("zero", vec![(None, Term::int(*d as u64))]),
            Self::ScaledIdentity(d, l) => Term::call("scaled_identity", vec![(None, Term::int(*d as u64)), (None, Term::num(*l))]),
            Self::ShiftNilpotent(d) => Term::call("shift_nilpotent", vec![(None, Term::int(*d as u64))]),
            Self::Rotation2d(r) => Term::call("rotation2d", vec![(None, Term::num(*r))]),
        }
    }

    pub fn matrix(&self) -> Matrix {
        match self {
            Self::Matrix(r) => to_matrix(r),
            Self::Zero(d) => semigroup::zero(*d),
            Self::ScaledIdentity(d, l) => semigroup::scaled_identity(*d, *l),
            Self::ShiftNilpotent(d) => semigroup::shift_nilpotent(*d),
            Self::Rotation2d(r) => semigroup::rotation2d(*r),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BodySpec {
    Point(Vec<f64>),
    Ball { center: Vec<f64>, radius: f64 },
    Hull(Vec<Vec<f64>>),
    Msum(Box<BodySpec>, Box<BodySpec>),
    Scale(f64, Box<BodySpec>),
    Shift(Vec<f64>, Box<BodySpec>),
}

impl BodySpec {
    fn from_term(t: &Term) -> Result<Self, String> {
        match t.head() {
            Some("point") => Ok(Self::Point(vector(&bind_all(t, &["center"])?[0])?)),
            Some("ball") => {
                let a = bind_all(t, &["center", "radius"])?;
                Ok(Self::Ball {
                    center: vector(&a[0])?,
                    radius: finite(&a[1])?,
                })
            }
            Some("hull") => Ok(Self::Hull(rows(&bind_all(t, &["points"])?[0])?)),
            Some("msum") => {
                let a = bind_all(t, &["a", "b"])?;
                Ok(Self::Msum(Box::new(Self::from_term(&a[0])?), Box::new(Self::from_term(&a[1])?)))
            }
            Some("scale") => {
                let a = bind_all(t, &["factor", "body"])?;
                Ok(Self::Scale(finite(&a[0])?, Box::new(Self::from_term(&a[1])?)))
            }
            Some("shift") => {
                let a = bind_all(t, &["offset", "body"])?;
                Ok(Self::Shift(vector(&a[0])?, Box::new(Self::from_term(&a[1])?)))
            }
            _ => Err(format!("unknown body `{t}` (expected point, ball, hull, msum, scale or shift)")),
        }
    }

    fn to_term(&self) -> Term {
        match self {
            Self::Point(c) => Term::call("point", vec![(None, Term::vector(c))]),
            Self::Ball { center, radius } => Term::call(
                "ball",
                vec![(Some("center"), Term::vector(center)), (Some("radius"), Term::num(*radius))],
            ),
            Self::Hull(p) => Term::call("hull", vec![(Some("points"), Term::rows(p))]),
            Self::Msum(a, b) => Term::call("msum", vec![(None, a.to_term()), (None, b.to_term())]),
            Self::Scale(f, b) => Term::call("scale", vec![(None, Term::num(*f)), (None, b.to_term())]),
            Self::Shift(o, b) => Term::call("shift", vec![(None, Term::vector(o)), (None, b.to_term())]),
        }
    }

    pub fn build(&self) -> Result<ConvexBody, String> {
        let r = match self {
            Self::Point(c) => ConvexBody::point(Vector::from_column_slice(c)),
            Self::Ball { center, radius } => ConvexBody::ball(Vector::from_column_slice(center), *radius),
            Self::Hull(p) => ConvexBody::hull(p.iter().map(|v| Vector::from_column_slice(v)).collect()),
            Self::Msum(a, b) => ConvexBody::minkowski_sum(a.build()?, b.build()?),
            Self::Scale(f, b) => ConvexBody::scaled(*f, b.build()?),
            Self::Shift(o, b) => ConvexBody::translated(Vector::from_column_slice(o), b.build()?),
        };
        r.map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusSpec {
    Const(f64),
    Linear { a: f64, b: f64 },
    AbsSin { amp: f64, freq: f64 },
}

impl RadiusSpec {
    fn from_term(t: &Term) -> Result<Self, String> {
        if let Term::Num(_) = t {
            return Ok(Self::Const(finite(t)?));
        }
        match t.head() {
            Some("const") => Ok(Self::Const(finite(&bind_all(t, &["r"])?[0])?)),
            Some("linear") => {
                let a = bind_all(t, &["a", "b"])?;
                Ok(Self::Linear {
                    a: finite(&a[0])?,
                    b: finite(&a[1])?,
                })
            }
            Some("abs_sin") => {
                let a = bind_all(t, &["amp", "freq"])?;
                Ok(Self::AbsSin {
                    amp: finite(&a[0])?,
                    freq: finite(&a[1])?,
                })
            }
            _ => Err(format!("unknown radius_fn `{t}` (expected const, linear or abs_sin)")),
        }
    }

    fn to_term(self) -> Term {
        match self {
            Self::Const(r) => Term::call("const", vec![(None, Term::num(r))]),
            Self::Linear { a, b } => Term::call("linear", vec![(None, Term::num(a)), (None, Term::num(b))]),
            Self::AbsSin { amp, freq } => Term::call("abs_sin", vec![(None, Term::num(amp)), (None, Term::num(freq))]),
        }
    }

    fn build(self) -> RadiusFn {
        match self {
            Self::Const(r) => RadiusFn::Const(r),
            Self::Linear { a, b } => RadiusFn::Linear { a, b },
            Self::AbsSin { amp, freq } => RadiusFn::AbsSin { amp, freq },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DriftSpec {
    /// `c + Bx + r(t)·K`.
    Tube {
        center: Vec<f64>,
        matrix: Vec<Vec<f64>>,
        body: BodySpec,
        radius_fn: RadiusSpec,
    },
    Affine { center: Vec<f64>, matrix: Vec<Vec<f64>> },
    /// Scalar Osgood (non-Lipschitz) family; uses the scenario's `p`.
    Osgood { a: f64, radius: f64 },
    Constant(BodySpec),
}

impl DriftSpec {
    fn from_term(t: &Term) -> Result<Self, String> {
        match t.head() {
            Some("tube") => {
                let a = bind(t, &["center", "matrix", "body", "radius_fn"])?;
                let mut a = a.into_iter();
                let mut next = |p: &str| required(a.next().flatten(), "tube", p);
                let center = vector(&next("center")?)?;
                let matrix = rows(&next("matrix")?)?;
                let body = BodySpec::from_term(&next("body")?)?;
                let radius_fn = RadiusSpec::from_term(&next("radius_fn")?)?;
                Ok(Self::Tube {
                    center,
                    matrix,
                    body,
                    radius_fn,
                })
            }
            Some("affine") => {
                let a = bind_all(t, &["center", "matrix"])?;
                Ok(Self::Affine {
                    center: vector(&a[0])?,
                    matrix: rows(&a[1])?,
                })
            }
            Some("osgood") => {
                let a = bind_all(t, &["a", "radius"])?;
                Ok(Self::Osgood {
                    a: finite(&a[0])?,
                    radius: finite(&a[1])?,
                })
            }
            Some("constant") => Ok(Self::Constant(BodySpec::from_term(&bind_all(t, &["body"])?[0])?)),
            _ => Err(format!("unknown drift `{t}` (expected tube, affine, osgood or constant)")),
        }
    }

    fn to_term(&self) -> Term {
        match self {
            Self::Tube {
                center,
                matrix,
                body,
                radius_fn,
            } => Term::call(
                "tube",
                vec![
                    (Some("center"), Term::vector(center)),
                    (Some("matrix"), Term::rows(matrix)),
                    (Some("body"), body.to_term()),
                    (Some("radius_fn"), radius_fn.to_term()),
                ],
            ),
            Self::Affine { center, matrix } => Term::call(
                "affine",
                vec![(Some("center"), Term::vector(center)), (Some("matrix"), Term::rows(matrix))],
            ),
            Self::Osgood { a, radius } => {
                Term::call("osgood", vec![(Some("a"), Term::num(*a)), (Some("radius"), Term::num(*radius))])
            }
            Self::Constant(b) => Term::call("constant", vec![(None, b.to_term())]),
        }
    }

    /// `(domain, codomain)` dimensions, where determined by the spec.
    fn dims(&self) -> Result<(usize, usize), String> {
        Ok(match self {
            Self::Tube { center, matrix, .. } | Self::Affine { center, matrix } => (matrix[0].len(), center.len()),
            Self::Osgood { .. } => (1, 1),
            Self::Constant(b) => {
                let d = b.build()?.dim();
                (d, d)
            }
        })
    }

    fn build(&self, de: usize, p: f64, horizon: f64) -> Result<MultiMap, String> {
        let r = match self {
            Self::Tube {
                center,
                matrix,
                body,
                radius_fn,
            } => {
                let rf = radius_fn.build();
                rf.validate(horizon).map_err(|e| e.to_string())?;
                coefficients::tube(Vector::from_column_slice(center), to_matrix(matrix), body.build()?, rf)
            }
            Self::Affine { center, matrix } => {
                coefficients::affine(Vector::from_column_slice(center), to_matrix(matrix))
            }
            Self::Osgood { a, radius } => coefficients::osgood_scalar(*a, *radius, p),
            Self::Constant(b) => Ok(coefficients::constant(de, b.build()?)),
        };
        r.map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixFnSpec {
    Const(Vec<Vec<f64>>),
    Affine { base: Vec<Vec<f64>>, slope: Vec<Vec<f64>> },
}

impl MatrixFnSpec {
    fn from_term(t: &Term) -> Result<Self, String> {
        match t.head() {
            Some("const") => Ok(Self::Const(rows(&bind_all(t, &["m"])?[0])?)),
            Some("affine") => {
                let a = bind_all(t, &["base", "slope"])?;
                Ok(Self::Affine {
                    base: rows(&a[0])?,
                    slope: rows(&a[1])?,
                })
            }
            _ => Err(format!("unknown matrix_fn `{t}` (expected const or affine)")),
        }
    }

    fn to_term(&self) -> Term {
        match self {
            Self::Const(m) => Term::call("const", vec![(None, Term::rows(m))]),
            Self::Affine { base, slope } => Term::call(
                "affine",
                vec![(Some("base"), Term::rows(base)), (Some("slope"), Term::rows(slope))],
            ),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        let m = match self {
            Self::Const(m) | Self::Affine { base: m, .. } => m,
        };
        (m.len(), m[0].len())
    }

    pub fn build(&self) -> MatrixFn {
        match self {
            Self::Const(m) => MatrixFn::Const(to_matrix(m)),
            Self::Affine { base, slope } => MatrixFn::Affine {
                base: to_matrix(base),
                slope: to_matrix(slope),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiffusionSpec {
    Singleton(MatrixFnSpec),
    /// Frobenius ball of the given radius around `g(x)`.
    Ball(MatrixFnSpec, f64),
}

impl DiffusionSpec {
    fn from_term(t: &Term) -> Result<Self, String> {
        match t.head() {
            Some("singleton") => Ok(Self::Singleton(MatrixFnSpec::from_term(&bind_all(t, &["matrix_fn"])?[0])?)),
            Some("ball") => {
                let a = bind_all(t, &["matrix_fn", "radius"])?;
                Ok(Self::Ball(MatrixFnSpec::from_term(&a[0])?, finite(&a[1])?))
            }
            _ => Err(format!("unknown diffusion `{t}` (expected singleton or ball)")),
        }
    }

    fn to_term(&self) -> Term {
        match self {
            Self::Singleton(g) => Term::call("singleton", vec![(Some("matrix_fn"), g.to_term())]),
            Self::Ball(g, r) => Term::call(
                "ball",
                vec![(Some("matrix_fn"), g.to_term()), (Some("radius"), Term::num(*r))],
            ),
        }
    }

    pub fn matrix_fn(&self) -> &MatrixFnSpec {
        match self {
            Self::Singleton(g) | Self::Ball(g, _) => g,
        }
    }

    fn build(&self) -> Result<MultiMap, String> {
        match self {
            Self::Singleton(g) => coefficients::diffusion_singleton(g.build()),
            Self::Ball(g, r) => coefficients::diffusion_ball(g.build(), *r),
        }
        .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModulusSpec {
    Linear(f64),
    Loglinear(f64),
    Sqrt(f64),
    Zero,
}

impl ModulusSpec {
    fn from_term(t: &Term) -> Result<Self, String> {
        let c = |t: &Term| -> Result<f64, String> {
            let v = bind(t, &["C"])?.remove(0);
            match v {
                Some(v) => finite(&v),
                None => Ok(1.0),
            }
        };
        match t.head() {
            Some("linear") => Ok(Self::Linear(c(t)?)),
            Some("loglinear") => Ok(Self::Loglinear(c(t)?)),
            Some("sqrt") => Ok(Self::Sqrt(c(t)?)),
            Some("zero") => {
                bind(t, &[])?;
                Ok(Self::Zero)
            }
            _ => Err(format!("unknown modulus `{t}` (expected linear, loglinear, sqrt or zero)")),
        }
    }

    fn to_term(self) -> Term {
        let c = |n: &str, v: f64| Term::call(n, vec![(Some("C"), Term::num(v))]);
        match self {
            Self::Linear(v) => c("linear", v),
            Self::Loglinear(v) => c("loglinear", v),
            Self::Sqrt(v) => c("sqrt", v),
            Self::Zero => Term::Ident("zero".into()),
        }
    }

    pub fn build(self) -> OsgoodModulus {
        match self {
            Self::Linear(c) => OsgoodModulus::linear(c),
            Self::Loglinear(c) => OsgoodModulus::loglinear(c),
            Self::Sqrt(c) => OsgoodModulus::sqrt(c),
            Self::Zero => OsgoodModulus::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum XiSpec {
    Point(Vec<f64>),
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
}

impl XiSpec {
    fn from_term(t: &Term) -> Result<Self, String> {
        match t.head() {
            Some("point") => Ok(Self::Point(vector(&bind_all(t, &["x"])?[0])?)),
            Some("gaussian") => {
                let a = bind_all(t, &["mean", "cov"])?;
                Ok(Self::Gaussian {
                    mean: vector(&a[0])?,
                    cov: rows(&a[1])?,
                })
            }
            _ => Err(format!("unknown initial condition `{t}` (expected point or gaussian)")),
        }
    }

    fn to_term(&self) -> Term {
        match self {
            Self::Point(x) => Term::call("point", vec![(None, Term::vector(x))]),
            Self::Gaussian { mean, cov } => Term::call(
                "gaussian",
                vec![(Some("mean"), Term::vector(mean)), (Some("cov"), Term::rows(cov))],
            ),
        }
    }

    pub fn mean(&self) -> &[f64] {
        match self {
            Self::Point(x) | Self::Gaussian { mean: x, .. } => x,
        }
    }

    fn build(&self) -> InitialCondition {
        match self {
            Self::Point(x) => InitialCondition::Point(Vector::from_column_slice(x)),
            Self::Gaussian { mean, cov } => InitialCondition::Gaussian {
                mean: Vector::from_column_slice(mean),
                cov: to_matrix(cov),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectorSpec {
    Steiner,
    Support(Vec<f64>),
    /// Seed defaults to the scheme seed.
    VertexRandom(Option<u64>),
}

impl SelectorSpec {
    fn from_term(t: &Term) -> Result<Self, String> {
        match t.head() {
            Some("steiner") => {
                bind(t, &[])?;
                Ok(Self::Steiner)
            }
            Some("support") => Ok(Self::Support(vector(&bind_all(t, &["u"])?[0])?)),
            Some("vertex_random") => Ok(Self::VertexRandom(bind(t, &["seed"])?.remove(0).map(|s| uint(&s)).transpose()?)),
            _ => Err(format!("unknown selector `{t}` (expected steiner, support(u) or vertex_random)")),
        }
    }

    fn to_term(&self) -> Term {
        match self {
            Self::Steiner => Term::Ident("steiner".into()),
            Self::Support(u) => Term::call("support", vec![(None, Term::vector(u))]),
            Self::VertexRandom(None) => Term::Ident("vertex_random".into()),
            Self::VertexRandom(Some(s)) => Term::call("vertex_random", vec![(Some("seed"), Term::int(*s))]),
        }
    }
}

// ---------------------------------------------------------------- sections

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSection {
    pub de: usize,
    pub dh: usize,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSection {
    pub a: OperatorSpec,
    pub envelope_grid: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientsSection {
    pub f: DriftSpec,
    pub g: DiffusionSpec,
    pub l: ModulusSpec,
    pub p: f64,
    pub eta: f64,
    pub xi: XiSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSection {
    pub n_ladder: Vec<u64>,
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
    pub selector: SelectorSpec,
    pub steiner_nodes: usize,
    pub store_selections: bool,
    pub norm_cap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsSection {
    /// Comparison constant `k` for the Osgood iteration.
    pub osgood_k: f64,
    pub osgood_r0: f64,
    pub osgood_grid: usize,
    pub osgood_iters: usize,
    pub samples: usize,
    pub half_width: f64,
    pub aldous_deltas: Vec<f64>,
    pub aldous_eta: f64,
    pub bl_anchors: usize,
    pub cover_radii: Vec<f64>,
    pub cover_anchors: usize,
    pub conv_paths: usize,
    pub gronwall_slack: f64,
    /// Distance at which residual exceedance probabilities are reported.
    pub residual_eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: String,
    pub write_ensembles: bool,
}

/// Key positions, ignored by equality.
#[derive(Debug, Clone, Default)]
struct Origin(BTreeMap<(String, String), usize>);

impl PartialEq for Origin {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub space: SpaceSection,
    pub operator: OperatorSection,
    pub coefficients: CoefficientsSection,
    pub scheme: SchemeSection,
    pub diagnostics: DiagnosticsSection,
    pub output: OutputSection,
    origin: Origin,
}

const SECTIONS: [&str; 6] = ["space", "operator", "coefficients", "scheme", "diagnostics", "output"];

struct Section {
    name: &'static str,
    header: usize,
    entries: BTreeMap<String, (Term, usize)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(Term, usize)> {
        self.entries.remove(key)
    }

    fn req<T>(&mut self, key: &str, f: impl Fn(&Term) -> Result<T, String>) -> Result<T, ConfigError> {
        let (t, line) = self.take(key).ok_or_else(|| {
            ConfigError::at(self.header, format!("[{}] is missing required key `{key}`", self.name))
        })?;
        f(&t).map_err(|m| ConfigError::at(line, format!("`{key}`: {m}")))
    }

    fn opt<T>(&mut self, key: &str, default: T, f: impl Fn(&Term) -> Result<T, String>) -> Result<T, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some((t, line)) => f(&t).map_err(|m| ConfigError::at(line, format!("`{key}`: {m}"))),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.entries.into_iter().min_by_key(|(_, (_, l))| *l) {
            None => Ok(()),
            Some((k, (_, line))) => Err(ConfigError::at(line, format!("unknown key `{k}` in [{}]", self.name))),
        }
    }
}

fn positive(x: f64) -> Result<f64, String> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be positive, got {}", fmt_f64(x)))
    }
}

fn at_least_one(x: u64) -> Result<usize, String> {
    if x >= 1 {
        Ok(x as usize)
    } else {
        Err("must be at least 1".into())
    }
}

fn default_deltas(t: f64) -> Vec<f64> {
    [32.0, 16.0, 8.0, 4.0, 2.0, 1.0].iter().map(|k| t / k).collect()
}

/// FNV-1a; stable across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(*b)).wrapping_mul(0x0100_0000_01b3))
}

impl ScenarioConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::bare(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<&'static str, Section> = BTreeMap::new();
        let mut current: Option<&'static str> = None;
        let mut origin = Origin::default();
        for l in split_lines(text)? {
            match l {
                Line::Section { name, line } => {
                    let Some(&s) = SECTIONS.iter().find(|s| **s == name) else {
                        return Err(ConfigError::at(
                            line,
                            format!("unknown section [{name}] (expected one of {})", SECTIONS.join(", ")),
                        ));
                    };
                    if sections.contains_key(s) {
                        return Err(ConfigError::at(line, format!("section [{s}] appears twice")));
                    }
                    sections.insert(
                        s,
                        Section {
                            name: s,
                            header: line,
                            entries: BTreeMap::new(),
                        },
                    );
                    current = Some(s);
                }
                Line::Entry { key, value, line } => {
                    let Some(s) = current else {
                        return Err(ConfigError::at(line, format!("key `{key}` appears before any section")));
                    };
                    origin.0.insert((s.to_string(), key.clone()), line);
                    let sec = sections.get_mut(s).expect("current section exists");
                    if sec.entries.insert(key.clone(), (value, line)).is_some() {
                        return Err(ConfigError::at(line, format!("key `{key}` repeated in [{s}]")));
                    }
                }
            }
        }
        let mut get = |name: &'static str| {
            sections.remove(name).unwrap_or(Section {
                name,
                header: 0,
                entries: BTreeMap::new(),
            })
        };
        let mut s = get("space");
        if s.header == 0 {
            return Err(ConfigError::bare("missing section [space]"));
        }
        let space = SpaceSection {
            de: s.req("dE", |t| at_least_one(uint(t)?))?,
            dh: s.req("dH", |t| at_least_one(uint(t)?))?,
            horizon: s.req("T", |t| positive(num(t)?))?,
        };
        s.finish()?;

        let mut s = get("operator");
        let operator = OperatorSection {
            a: s.req("A", OperatorSpec::from_term)?,
            envelope_grid: s.opt("envelope_grid", semigroup::DEFAULT_ENVELOPE_GRID, |t| at_least_one(uint(t)?))?,
        };
        s.finish()?;

        let mut s = get("coefficients");
        let coefficients = CoefficientsSection {
            f: s.req("F", DriftSpec::from_term)?,
            g: s.req("G", DiffusionSpec::from_term)?,
            l: s.req("L", ModulusSpec::from_term)?,
            p: s.req("p", |t| {
                let p = num(t)?;
                if p > 2.0 && p.is_finite() {
                    Ok(p)
                } else {
                    Err(format!("must exceed 2, got {}", fmt_f64(p)))
                }
            })?,
            eta: s.req("eta", |t| positive(num(t)?))?,
            xi: s.req("xi", XiSpec::from_term)?,
        };
        s.finish()?;

        let mut s = get("scheme");
        let scheme = SchemeSection {
            n_ladder: s.req("n_ladder", |t| match t {
                Term::List(items) if !items.is_empty() => items.iter().map(|i| at_least_one(uint(i)?).map(|n| n as u64)).collect(),
                _ => Err("expected a nonempty list of integers".into()),
            })?,
            dt: s.req("dt", |t| positive(num(t)?))?,
            paths: s.req("paths", |t| at_least_one(uint(t)?))?,
            seed: s.req("seed", uint)?,
            selector: s.opt("selector", SelectorSpec::Steiner, SelectorSpec::from_term)?,
            steiner_nodes: s.opt("steiner_nodes", QuadratureSpec::default().nodes, |t| at_least_one(uint(t)?))?,
            store_selections: s.opt("store_selections", true, boolean)?,
            norm_cap: s.opt("norm_cap", 1e12, |t| positive(num(t)?))?,
        };
        s.finish()?;

        let t = space.horizon;
        let mut s = get("diagnostics");
        let pos_list = |t: &Term| -> Result<Vec<f64>, String> {
            let v = vector(t)?;
            if v.is_empty() || v.iter().any(|x| x.is_nan() || *x <= 0.0) {
                Err("expected a nonempty list of positive numbers".into())
            } else {
                Ok(v)
            }
        };
        let diagnostics = DiagnosticsSection {
            osgood_k: s.opt("osgood_k", 1.0, |t| positive(num(t)?))?,
            osgood_r0: s.opt("osgood_r0", 1.0, |t| positive(num(t)?))?,
            osgood_grid: s.opt("osgood_grid", 200, |t| at_least_one(uint(t)?))?,
            osgood_iters: s.opt("osgood_iters", 60, |t| at_least_one(uint(t)?))?,
            samples: s.opt("samples", 1000, |t| at_least_one(uint(t)?))?,
            half_width: s.opt("half_width", 5.0, |t| positive(num(t)?))?,
            aldous_deltas: s.opt("aldous_deltas", default_deltas(t), pos_list)?,
            aldous_eta: s.opt("aldous_eta", 0.5, |t| positive(num(t)?))?,
            bl_anchors: s.opt("bl_anchors", 32, |t| at_least_one(uint(t)?))?,
            cover_radii: s.opt("cover_radii", vec![0.25, 0.5, 1.0, 2.0, 4.0], pos_list)?,
            cover_anchors: s.opt("cover_anchors", 8, |t| at_least_one(uint(t)?))?,
            conv_paths: s.opt("conv_paths", 2000, |t| at_least_one(uint(t)?))?,
            gronwall_slack: s.opt("gronwall_slack", 2.0, |t| positive(num(t)?))?,
            residual_eps: s.opt("residual_eps", 0.1, |t| positive(num(t)?))?,
        };
        s.finish()?;

        let mut s = get("output");
        let output = OutputSection {
            dir: s.opt("dir", "out".to_string(), string)?,
            write_ensembles: s.opt("write_ensembles", true, boolean)?,
        };
        s.finish()?;

        let cfg = Self {
            space,
            operator,
            coefficients,
            scheme,
            diagnostics,
            output,
            origin,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn line(&self, section: &str, key: &str) -> Option<usize> {
        self.origin.0.get(&(section.to_string(), key.to_string())).copied()
    }

    fn err(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.line(section, key),
            message: format!("`{key}`: {}", message.into()),
        }
    }

    /// Cross-key consistency: dimensions and grid compatibility.
    pub fn check(&self) -> Result<(), ConfigError> {
        let de = self.space.de;
        let dh = self.space.dh;
        let a = self.operator.a.matrix();
        if a.shape() != (de, de) {
            return Err(self.err("operator", "A", format!("is {}×{}, but dE = {de}", a.nrows(), a.ncols())));
        }
        let (din, dout) = self.coefficients.f.dims().map_err(|m| self.err("coefficients", "F", m))?;
        if din != de || dout != de {
            return Err(self.err(
                "coefficients",
                "F",
                format!("maps R^{din} to R^{dout}, but dE = {de}"),
            ));
        }
        if let DriftSpec::Tube { body, .. } = &self.coefficients.f {
            body.build().map_err(|m| self.err("coefficients", "F", m))?;
        }
        let shape = self.coefficients.g.matrix_fn().shape();
        if shape != (de, dh) {
            return Err(self.err(
                "coefficients",
                "G",
                format!("matrix is {}×{}, expected dE×dH = {de}×{dh}", shape.0, shape.1),
            ));
        }
        if let MatrixFnSpec::Affine { base, slope } = self.coefficients.g.matrix_fn() {
            if (slope.len(), slope[0].len()) != (base.len(), base[0].len()) {
                return Err(self.err("coefficients", "G", "affine slope and base differ in shape"));
            }
        }
        if let DiffusionSpec::Ball(_, r) = &self.coefficients.g {
            if *r < 0.0 {
                return Err(self.err("coefficients", "G", "ball radius must be ≥ 0"));
            }
        }
        if self.coefficients.xi.mean().len() != de {
            return Err(self.err("coefficients", "xi", format!("lives in R^{}, but dE = {de}", self.coefficients.xi.mean().len())));
        }
        self.coefficients
            .xi
            .build()
            .validate()
            .map_err(|e| self.err("coefficients", "xi", e.to_string()))?;
        if let SelectorSpec::Support(u) = &self.scheme.selector {
            for dim in [de, de * dh] {
                if u.len() != dim {
                    return Err(self.err(
                        "scheme",
                        "selector",
                        format!("direction has {} entries; it must fit both F (R^{de}) and G (R^{})", u.len(), de * dh),
                    ));
                }
            }
            Direction::normalize(Vector::from_column_slice(u)).map_err(|e| self.err("scheme", "selector", e.to_string()))?;
        }
        let dt = self.scheme.dt;
        crate::driver::grid_steps(self.space.horizon, dt).map_err(|e| self.err("scheme", "dt", e.to_string()))?;
        for &n in &self.scheme.n_ladder {
            let lag = 1.0 / n as f64;
            let l = (lag / dt).round();
            if l < 1.0 || (l * dt - lag).abs() > 1e-12 * lag {
                return Err(self.err("scheme", "n_ladder", format!("lag 1/{n} is not a multiple of dt = {}", fmt_f64(dt))));
            }
        }
        let t = self.space.horizon;
        if let Some(d) = self.diagnostics.aldous_deltas.iter().find(|d| **d > t * (1.0 + 1e-12)) {
            return Err(self.err("diagnostics", "aldous_deltas", format!("{} exceeds T = {}", fmt_f64(*d), fmt_f64(t))));
        }
        Ok(())
    }

    pub fn print(&self) -> String {
        let mut s = String::new();
        let mut sec = |name: &str, entries: Vec<(&str, Term)>| {
            let _ = writeln!(s, "[{name}]");
            for (k, v) in entries {
                let _ = writeln!(s, "{k} = {v}");
            }
            s.push('\n');
        };
        let sp = &self.space;
        sec(
            "space",
            vec![
                ("dE", Term::int(sp.de as u64)),
                ("dH", Term::int(sp.dh as u64)),
                ("T", Term::num(sp.horizon)),
            ],
        );
        sec(
            "operator",
            vec![
                ("A", self.operator.a.to_term()),
                ("envelope_grid", Term::int(self.operator.envelope_grid as u64)),
            ],
        );
        let c = &self.coefficients;
        sec(
            "coefficients",
            vec![
                ("F", c.f.to_term()),
                ("G", c.g.to_term()),
                ("L", c.l.to_term()),
                ("p", Term::num(c.p)),
                ("eta", Term::num(c.eta)),
                ("xi", c.xi.to_term()),
            ],
        );
        let sc = &self.scheme;
        sec(
            "scheme",
            vec![
                ("n_ladder", Term::List(sc.n_ladder.iter().map(|n| Term::int(*n)).collect())),
                ("dt", Term::num(sc.dt)),
                ("paths", Term::int(sc.paths as u64)),
                ("seed", Term::int(sc.seed)),
                ("selector", sc.selector.to_term()),
                ("steiner_nodes", Term::int(sc.steiner_nodes as u64)),
                ("store_selections", Term::Bool(sc.store_selections)),
                ("norm_cap", Term::num(sc.norm_cap)),
            ],
        );
        let d = &self.diagnostics;
        sec(
            "diagnostics",
            vec![
                ("osgood_k", Term::num(d.osgood_k)),
                ("osgood_r0", Term::num(d.osgood_r0)),
                ("osgood_grid", Term::int(d.osgood_grid as u64)),
                ("osgood_iters", Term::int(d.osgood_iters as u64)),
                ("samples", Term::int(d.samples as u64)),
                ("half_width", Term::num(d.half_width)),
                ("aldous_deltas", Term::vector(&d.aldous_deltas)),
                ("aldous_eta", Term::num(d.aldous_eta)),
                ("bl_anchors", Term::int(d.bl_anchors as u64)),
                ("cover_radii", Term::vector(&d.cover_radii)),
                ("cover_anchors", Term::int(d.cover_anchors as u64)),
                ("conv_paths", Term::int(d.conv_paths as u64)),
                ("gronwall_slack", Term::num(d.gronwall_slack)),
                ("residual_eps", Term::num(d.residual_eps)),
            ],
        );
        sec(
            "output",
            vec![
                ("dir", Term::Str(self.output.dir.clone())),
                ("write_ensembles", Term::Bool(self.output.write_ensembles)),
            ],
        );
        s.pop();
        s
    }

    /// Identifies the simulated problem: everything but [diagnostics] and
    /// [output].
    pub fn scenario_hash(&self) -> u64 {
        let printed = self.print();
        let cut = printed.find("[diagnostics]").unwrap_or(printed.len());
        fnv1a(&printed.as_bytes()[..cut])
    }

    pub fn selector(&self) -> Selector {
        let rule = match &self.scheme.selector {
            SelectorSpec::Steiner => SelectorRule::Steiner,
            SelectorSpec::Support(u) => {
                SelectorRule::Support(Direction::normalize(Vector::from_column_slice(u)).expect("checked at parse"))
            }
            SelectorSpec::VertexRandom(seed) => SelectorRule::VertexRandom {
                seed: seed.unwrap_or(self.scheme.seed),
            },
        };
        Selector::new(
            rule,
            QuadratureSpec {
                nodes: self.scheme.steiner_nodes,
                ..QuadratureSpec::default()
            },
        )
    }

    pub fn hypotheses(&self) -> Result<CoefficientHypotheses, ConfigError> {
        let c = &self.coefficients;
        CoefficientHypotheses::new(c.eta, c.l.build(), c.p).map_err(|e| self.err("coefficients", "eta", e.to_string()))
    }

    pub fn scheme_options(&self) -> SchemeOptions {
        SchemeOptions {
            store_selections: self.scheme.store_selections,
            norm_cap: self.scheme.norm_cap,
            ..SchemeOptions::default()
        }
    }

    pub fn sampling_spec(&self) -> SamplingSpec {
        SamplingSpec {
            samples: self.diagnostics.samples,
            half_width: self.diagnostics.half_width,
            ..SamplingSpec::new(self.space.horizon, self.scheme.seed)
        }
    }

    pub fn build(&self) -> Result<InclusionScenario, ConfigError> {
        let t = self.space.horizon;
        let op = SemigroupOperator::new(self.operator.a.matrix(), t).map_err(|e| self.err("operator", "A", e.to_string()))?;
        let c = &self.coefficients;
        let f = c
            .f
            .build(self.space.de, c.p, t)
            .map_err(|m| self.err("coefficients", "F", m))?;
        let g = c.g.build().map_err(|m| self.err("coefficients", "G", m))?;
        let sc = InclusionScenario {
            de: self.space.de,
            dh: self.space.dh,
            op: Arc::new(op),
            f,
            g,
            hyp: self.hypotheses()?,
            xi: c.xi.build(),
            horizon: t,
            selector: self.selector(),
            hash: self.scenario_hash(),
        };
        sc.validate().map_err(|e| ConfigError::bare(e.to_string()))?;
        Ok(sc)
    }
}
