use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use super::GeometryError;
use crate::Vector;

/// Relative slack under which two support values count as tied.
const TIE_EPS: f64 = 1e-12;

/// Representation grammar of a [`ConvexBody`].
#[derive(Debug, Clone, PartialEq)]
pub enum Repr {
    Point(Vector),
    Ball { center: Vector, radius: f64 },
    Hull(Arc<Vec<Vector>>),
    MinkowskiSum(Arc<ConvexBody>, Arc<ConvexBody>),
    Scaled(f64, Arc<ConvexBody>),
    Translated(Vector, Arc<ConvexBody>),
}

/// A nonempty compact convex body in `R^dim`.
///
/// Values are immutable; children are shared through `Arc`, so cloning is
/// cheap and bodies can be handed across threads freely.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    dim: usize,
    repr: Repr,
}

fn check_vec(v: &Vector, dim: usize) -> Result<(), GeometryError> {
    if v.len() != dim {
        return Err(GeometryError::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(GeometryError::InvalidBody("non-finite coordinate".into()));
    }
    Ok(())
}

impl ConvexBody {
    pub fn point(c: Vector) -> Result<Self, GeometryError> {
        let dim = c.len();
        if dim == 0 {
            return Err(GeometryError::InvalidBody("zero-dimensional point".into()));
        }
        check_vec(&c, dim)?;
        Ok(Self {
            dim,
            repr: Repr::Point(c),
        })
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self, GeometryError> {
        let dim = center.len();
        if dim == 0 {
            return Err(GeometryError::InvalidBody("zero-dimensional ball".into()));
        }
        check_vec(&center, dim)?;
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidBody(format!(
                "ball radius must be finite and nonnegative, got {radius}"
            )));
        }
        Ok(Self {
            dim,
            repr: Repr::Ball { center, radius },
        })
    }

    pub fn hull(vertices: Vec<Vector>) -> Result<Self, GeometryError> {
        let dim = match vertices.first() {
            Some(v) if !v.is_empty() => v.len(),
            Some(_) => return Err(GeometryError::InvalidBody("zero-dimensional hull".into())),
            None => return Err(GeometryError::InvalidBody("hull needs at least one vertex".into())),
        };
        for v in &vertices {
            check_vec(v, dim)?;
        }
        Ok(Self {
            dim,
            repr: Repr::Hull(Arc::new(vertices)),
        })
    }

    pub fn minkowski_sum(a: ConvexBody, b: ConvexBody) -> Result<Self, GeometryError> {
        if a.dim != b.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: a.dim,
                found: b.dim,
            });
        }
        Ok(Self {
            dim: a.dim,
            repr: Repr::MinkowskiSum(Arc::new(a), Arc::new(b)),
        })
    }

    pub fn scaled(factor: f64, body: ConvexBody) -> Result<Self, GeometryError> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(GeometryError::InvalidBody(format!(
                "scale factor must be finite and nonnegative, got {factor}"
            )));
        }
        Ok(Self {
            dim: body.dim,
            repr: Repr::Scaled(factor, Arc::new(body)),
        })
    }

    pub fn translated(offset: Vector, body: ConvexBody) -> Result<Self, GeometryError> {
        check_vec(&offset, body.dim)?;
        Ok(Self {
            dim: body.dim,
            repr: Repr::Translated(offset, Arc::new(body)),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    /// Short tag naming the outermost constructor.
    pub fn kind(&self) -> &'static str {
        match self.repr {
            Repr::Point(_) => "point",
            Repr::Ball { .. } => "ball",
            Repr::Hull(_) => "hull",
            Repr::MinkowskiSum(..) => "msum",
            Repr::Scaled(..) => "scale",
            Repr::Translated(..) => "translate",
        }
    }

    fn check_dim(&self, found: usize) -> Result<(), GeometryError> {
        if found == self.dim {
            Ok(())
        } else {
            Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                found,
            })
        }
    }

    /// Support function `h_K(u) = max_{x∈K} ⟨x, u⟩`.
    pub fn support_value(&self, u: &Direction) -> Result<f64, GeometryError> {
        self.check_dim(u.dim())?;
        Ok(self.support(u.as_slice()))
    }

    /// A maximiser of `⟨x, u⟩` over the body. Hull ties go to the
    /// lexicographically smallest vertex.
    pub fn support_point(&self, u: &Direction) -> Result<Vector, GeometryError> {
        self.check_dim(u.dim())?;
        Ok(self.maximizer(u.as_slice()))
    }

    /// Unchecked support function for an arbitrary (not necessarily unit)
    /// vector of matching length; positively homogeneous in `u`.
    pub(crate) fn support(&self, u: &[f64]) -> f64 {
        match &self.repr {
            Repr::Point(c) => dot(c.as_slice(), u),
            Repr::Ball { center, radius } => dot(center.as_slice(), u) + radius * norm(u),
            Repr::Hull(vs) => vs
                .iter()
                .map(|v| dot(v.as_slice(), u))
                .fold(f64::NEG_INFINITY, f64::max),
            Repr::MinkowskiSum(a, b) => a.support(u) + b.support(u),
            Repr::Scaled(f, k) => f * k.support(u),
            Repr::Translated(v, k) => dot(v.as_slice(), u) + k.support(u),
        }
    }

    /// Unchecked linear maximisation oracle.
    pub(crate) fn maximizer(&self, u: &[f64]) -> Vector {
        match &self.repr {
            Repr::Point(c) => c.clone(),
            Repr::Ball { center, radius } => {
                let n = norm(u);
                if n == 0.0 || *radius == 0.0 {
                    center.clone()
                } else {
                    let mut x = center.clone();
                    for (xi, ui) in x.iter_mut().zip(u) {
                        *xi += radius * ui / n;
                    }
                    x
                }
            }
            Repr::Hull(vs) => {
                let values: Vec<f64> = vs.iter().map(|v| dot(v.as_slice(), u)).collect();
                let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let slack = TIE_EPS * (1.0 + best.abs());
                vs.iter()
                    .zip(&values)
                    .filter(|(_, &val)| val >= best - slack)
                    .map(|(v, _)| v)
                    .min_by(|a, b| lex_cmp(a, b))
                    .expect("hull is nonempty")
                    .clone()
            }
            Repr::MinkowskiSum(a, b) => a.maximizer(u) + b.maximizer(u),
            Repr::Scaled(f, k) => k.maximizer(u) * *f,
            Repr::Translated(v, k) => k.maximizer(u) + v,
        }
    }

    /// A ball `B(c, r)` containing the body.
    pub fn bounding_ball(&self) -> (Vector, f64) {
        match &self.repr {
            Repr::Point(c) => (c.clone(), 0.0),
            Repr::Ball { center, radius } => (center.clone(), *radius),
            Repr::Hull(vs) => {
                let mut c = Vector::zeros(self.dim);
                for v in vs.iter() {
                    c += v;
                }
                c /= vs.len() as f64;
                let r = vs.iter().map(|v| (v - &c).norm()).fold(0.0, f64::max);
                (c, r)
            }
            Repr::MinkowskiSum(a, b) => {
                let (ca, ra) = a.bounding_ball();
                let (cb, rb) = b.bounding_ball();
                (ca + cb, ra + rb)
            }
            Repr::Scaled(f, k) => {
                let (c, r) = k.bounding_ball();
                (c * *f, r * f)
            }
            Repr::Translated(v, k) => {
                let (c, r) = k.bounding_ball();
                (c + v, r)
            }
        }
    }

    /// `Some((c, r))` when the body is exactly the ball `B(c, r)` (points
    /// included as radius zero).
    pub fn as_ball(&self) -> Option<(Vector, f64)> {
        match &self.repr {
            Repr::Point(c) => Some((c.clone(), 0.0)),
            Repr::Ball { center, radius } => Some((center.clone(), *radius)),
            Repr::Hull(vs) => {
                let first = &vs[0];
                vs.iter().all(|v| v == first).then(|| (first.clone(), 0.0))
            }
            Repr::MinkowskiSum(a, b) => {
                let (ca, ra) = a.as_ball()?;
                let (cb, rb) = b.as_ball()?;
                Some((ca + cb, ra + rb))
            }
            Repr::Scaled(f, k) => k.as_ball().map(|(c, r)| (c * *f, r * f)),
            Repr::Translated(v, k) => k.as_ball().map(|(c, r)| (c + v, r)),
        }
    }

    /// A finite generating set of the body when it is a polytope with at
    /// most `cap` generators.
    pub fn polytope_vertices(&self, cap: usize) -> Option<Vec<Vector>> {
        let vs = match &self.repr {
            Repr::Point(c) => vec![c.clone()],
            Repr::Ball { center, radius } => {
                if *radius > 0.0 {
                    return None;
                }
                vec![center.clone()]
            }
            Repr::Hull(vs) => vs.as_ref().clone(),
            Repr::MinkowskiSum(a, b) => {
                let va = a.polytope_vertices(cap)?;
                let vb = b.polytope_vertices(cap)?;
                if va.len() * vb.len() > cap {
                    return None;
                }
                va.iter()
                    .flat_map(|x| vb.iter().map(move |y| x + y))
                    .collect()
            }
            Repr::Scaled(f, k) => k
                .polytope_vertices(cap)?
                .into_iter()
                .map(|v| v * *f)
                .collect(),
            Repr::Translated(off, k) => k
                .polytope_vertices(cap)?
                .into_iter()
                .map(|v| v + off)
                .collect(),
        };
        (vs.len() <= cap).then_some(vs)
    }

    /// Normal form `P ⊕ B(0, r)` with `P` given by at most `cap` generators.
    /// Every body of the grammar has this form; `None` only when the
    /// generator count would exceed `cap`.
    pub fn polytope_ball_form(&self, cap: usize) -> Option<(Vec<Vector>, f64)> {
        let (vs, r) = match &self.repr {
            Repr::Point(c) => (vec![c.clone()], 0.0),
            Repr::Ball { center, radius } => (vec![center.clone()], *radius),
            Repr::Hull(vs) => (vs.as_ref().clone(), 0.0),
            Repr::MinkowskiSum(a, b) => {
                let (va, ra) = a.polytope_ball_form(cap)?;
                let (vb, rb) = b.polytope_ball_form(cap)?;
                if va.len() * vb.len() > cap {
                    return None;
                }
                let vs = va
                    .iter()
                    .flat_map(|x| vb.iter().map(move |y| x + y))
                    .collect();
                (vs, ra + rb)
            }
            Repr::Scaled(f, k) => {
                let (vs, r) = k.polytope_ball_form(cap)?;
                (vs.into_iter().map(|v| v * *f).collect(), r * f)
            }
            Repr::Translated(off, k) => {
                let (vs, r) = k.polytope_ball_form(cap)?;
                (vs.into_iter().map(|v| v + off).collect(), r)
            }
        };
        (vs.len() <= cap).then_some((vs, r))
    }

    /// Splits the body into `offset + core`, pulling every translation and
    /// every point/ball centre out of the core. Two bodies with equal cores
    /// are translates of each other.
    pub(crate) fn split_offset(&self) -> (Vector, ConvexBody) {
        let zero = || Vector::zeros(self.dim);
        match &self.repr {
            Repr::Point(c) => (c.clone(), ConvexBody::point(zero()).expect("dim > 0")),
            Repr::Ball { center, radius } => (
                center.clone(),
                ConvexBody::ball(zero(), *radius).expect("validated radius"),
            ),
            Repr::Hull(_) => (zero(), self.clone()),
            Repr::MinkowskiSum(a, b) => {
                let (oa, ca) = a.split_offset();
                let (ob, cb) = b.split_offset();
                (oa + ob, ConvexBody::minkowski_sum(ca, cb).expect("same dim"))
            }
            Repr::Scaled(f, k) => {
                let (o, c) = k.split_offset();
                (o * *f, ConvexBody::scaled(*f, c).expect("validated factor"))
            }
            Repr::Translated(v, k) => {
                let (o, c) = k.split_offset();
                (o + v, c)
            }
        }
    }

    /// True when the body is a single point.
    pub fn is_singleton(&self) -> bool {
        match &self.repr {
            Repr::Point(_) => true,
            Repr::Ball { radius, .. } => *radius == 0.0,
            Repr::Hull(vs) => vs.iter().all(|v| v == &vs[0]),
            Repr::MinkowskiSum(a, b) => a.is_singleton() && b.is_singleton(),
            Repr::Scaled(f, k) => *f == 0.0 || k.is_singleton(),
            Repr::Translated(_, k) => k.is_singleton(),
        }
    }
}

impl fmt::Display for ConvexBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn vec(f: &mut fmt::Formatter<'_>, v: &Vector) -> fmt::Result {
            write!(f, "[")?;
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")
        }
        match &self.repr {
            Repr::Point(c) => {
                write!(f, "point(")?;
                vec(f, c)?;
                write!(f, ")")
            }
            Repr::Ball { center, radius } => {
                write!(f, "ball(center=")?;
                vec(f, center)?;
                write!(f, ", radius={radius})")
            }
            Repr::Hull(vs) => {
                write!(f, "hull(points=[")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    vec(f, v)?;
                }
                write!(f, "])")
            }
            Repr::MinkowskiSum(a, b) => write!(f, "msum({a}, {b})"),
            Repr::Scaled(s, k) => write!(f, "scale({s}, {k})"),
            Repr::Translated(v, k) => {
                write!(f, "translate(")?;
                vec(f, v)?;
                write!(f, ", {k})")
            }
        }
    }
}

/// Unit vector argument of support functions.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vector);

impl Direction {
    /// Accepts `u` only if `| ‖u‖ - 1 | ≤ 1e-12`.
    pub fn new(u: Vector) -> Result<Self, GeometryError> {
        let n = u.norm();
        if (n - 1.0).abs() <= 1e-12 {
            Ok(Self(u))
        } else {
            Err(GeometryError::NotUnit(n))
        }
    }

    /// Normalises a nonzero finite vector.
    pub fn normalize(u: Vector) -> Result<Self, GeometryError> {
        let n = u.norm();
        if n > 0.0 && n.is_finite() {
            Ok(Self(u / n))
        } else {
            Err(GeometryError::NotUnit(n))
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn lex_cmp(a: &Vector, b: &Vector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}
