//! Hausdorff distance between convex bodies.
//!
//! For convex bodies `H(K₁, K₂) = sup_{‖u‖=1} |h₁(u) - h₂(u)|`. Every body of
//! the grammar is `P ⊕ B(0, r)` with `P` a polytope, so
//! `h₁ - h₂ = h_{P₁} - h_{P₂} + (r₁ - r₂)` on the sphere. Routes, in order:
//!
//! 1. translates of a common core: `‖o₁ - o₂‖`;
//! 2. two balls: `‖c₁ - c₂‖ + |r₁ - r₂|`;
//! 3. two polytopes: the outer supremum of the convex function
//!    `x ↦ d(x, K)` is attained at a generator, so only vertex projections
//!    are needed (each within `tol`);
//! 4. one side a point `p`: `max_v ‖v - p‖ + r`;
//! 5. equal polytope parts: `|r₁ - r₂|`;
//! 6. dimension one or two: the common refinement of both normal fans splits
//!    the circle into arcs on which `h₁ - h₂` is a single sinusoid, whose
//!    extremes are found in closed form;
//! 7. otherwise branch-and-bound over cells of the cube surface
//!    `‖u‖_∞ = 1`, searching `h₁ - h₂` and `h₂ - h₁` separately. A cell is
//!    discarded once a difference-of-convex majorant (see
//!    [`cell_certified`]) shows it cannot beat the incumbent by more than
//!    `tol`; bodies without a small polytope form fall back to the Lipschitz
//!    bound `Lip·ρ` with `Lip = ‖c₁ - c₂‖ + R₁ + R₂`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use super::planar::{convex_hull, edge_normal_angles};
use super::{check_tol, distance_to_point, ConvexBody, GeometryError};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HausdorffConfig {
    pub tol: f64,
    /// Maximum number of support evaluations in the branch-and-bound route.
    pub cell_budget: usize,
    /// Largest generator count of the polytope part.
    pub vertex_cap: usize,
}

impl HausdorffConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            cell_budget: 2_000_000,
            vertex_cap: 1024,
        }
    }
}

pub fn hausdorff_distance(a: &ConvexBody, b: &ConvexBody, tol: f64) -> Result<f64, GeometryError> {
    hausdorff_distance_with(a, b, &HausdorffConfig::with_tol(tol))
}

pub fn hausdorff_distance_with(
    a: &ConvexBody,
    b: &ConvexBody,
    cfg: &HausdorffConfig,
) -> Result<f64, GeometryError> {
    check_tol(cfg.tol)?;
    if a.dim() != b.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    // Evaluate in a canonical argument order so that the result is exactly
    // symmetric, not just up to rounding.
    let (a, b) = if order_key(b)? < order_key(a)? { (b, a) } else { (a, b) };
    let (oa, ca) = a.split_offset();
    let (ob, cb) = b.split_offset();
    if ca == cb {
        return Ok((oa - ob).norm());
    }
    if let (Some((c1, r1)), Some((c2, r2))) = (a.as_ball(), b.as_ball()) {
        return Ok((c1 - c2).norm() + (r1 - r2).abs());
    }
    let forms = (
        a.polytope_ball_form(cfg.vertex_cap),
        b.polytope_ball_form(cfg.vertex_cap),
    );
    let ((pa, ra), (pb, rb)) = match forms {
        (Some(fa), Some(fb)) => (fa, fb),
        _ => return branch_and_bound(a, b, None, cfg),
    };
    if ra == 0.0 && rb == 0.0 {
        let one = one_sided(&pa, b, cfg.tol)?;
        let other = one_sided(&pb, a, cfg.tol)?;
        return Ok(one.max(other));
    }
    if let Some(p) = single_point(&pa, ra) {
        return Ok(farthest(&pb, &p) + rb);
    }
    if let Some(p) = single_point(&pb, rb) {
        return Ok(farthest(&pa, &p) + ra);
    }
    if pa == pb {
        return Ok((ra - rb).abs());
    }
    match a.dim() {
        1 => Ok([-1.0, 1.0]
            .iter()
            .map(|&s| {
                let u = [s];
                (support_of(&pa, &u) + ra - support_of(&pb, &u) - rb).abs()
            })
            .fold(0.0, f64::max)),
        2 => Ok(planar_fan_sweep(&pa, ra, &pb, rb)),
        _ => branch_and_bound(a, b, Some(((&pa, ra), (&pb, rb))), cfg),
    }
}

/// Support values along `±e_i` and the diagonal: a cheap key that only ties
/// for bodies that are equal or nearly so.
fn order_key(k: &ConvexBody) -> Result<Vec<f64>, GeometryError> {
    let d = k.dim();
    if d == 0 {
        return Ok(Vec::new());
    }
    let mut key = Vec::with_capacity(2 * d + 1);
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = Vector::zeros(d);
            e[i] = s;
            key.push(k.support_value(&super::Direction::new(e)?)?);
        }
    }
    key.push(k.support_value(&super::Direction::normalize(Vector::from_element(d, 1.0))?)?);
    Ok(key)
}

fn one_sided(vertices: &[Vector], body: &ConvexBody, tol: f64) -> Result<f64, GeometryError> {
    let mut worst = 0.0_f64;
    for v in vertices {
        worst = worst.max(distance_to_point(body, v, tol)?.distance);
    }
    Ok(worst)
}

fn single_point(vs: &[Vector], r: f64) -> Option<Vector> {
    (r == 0.0 && vs.iter().all(|v| v == &vs[0])).then(|| vs[0].clone())
}

fn farthest(vs: &[Vector], p: &Vector) -> f64 {
    vs.iter().map(|v| (v - p).norm()).fold(0.0, f64::max)
}

fn support_of(vs: &[Vector], u: &[f64]) -> f64 {
    vs.iter()
        .map(|v| super::body::dot(v.as_slice(), u))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn argmax_of(hull: &[[f64; 2]], u: [f64; 2]) -> [f64; 2] {
    let mut best = hull[0];
    let mut val = f64::NEG_INFINITY;
    for &p in hull {
        let s = p[0] * u[0] + p[1] * u[1];
        if s > val {
            val = s;
            best = p;
        }
    }
    best
}

fn planar_fan_sweep(pa: &[Vector], ra: f64, pb: &[Vector], rb: f64) -> f64 {
    let to2 = |vs: &[Vector]| vs.iter().map(|v| [v[0], v[1]]).collect::<Vec<_>>();
    let ha = convex_hull(&to2(pa));
    let hb = convex_hull(&to2(pb));
    let mut breaks: Vec<f64> = edge_normal_angles(&ha)
        .into_iter()
        .chain(edge_normal_angles(&hb))
        .map(|a| a.rem_euclid(2.0 * PI))
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    if breaks.is_empty() {
        breaks.push(0.0);
    }
    let dr = ra - rb;
    let mut best = 0.0_f64;
    for (i, &lo) in breaks.iter().enumerate() {
        let hi = if i + 1 < breaks.len() {
            breaks[i + 1]
        } else {
            breaks[0] + 2.0 * PI
        };
        let mid = 0.5 * (lo + hi);
        let u = [mid.cos(), mid.sin()];
        let va = argmax_of(&ha, u);
        let vb = argmax_of(&hb, u);
        let w = [va[0] - vb[0], va[1] - vb[1]];
        let f = |t: f64| w[0] * t.cos() + w[1] * t.sin() + dr;
        let mut candidates = vec![lo, hi];
        let phi = w[1].atan2(w[0]);
        for crit in [phi, phi + PI] {
            let mut t = crit;
            while t < lo {
                t += 2.0 * PI;
            }
            while t > hi {
                t -= 2.0 * PI;
            }
            if t >= lo && t <= hi {
                candidates.push(t);
            }
        }
        for t in candidates {
            best = best.max(f(t).abs());
        }
    }
    best
}

/// A cell of the cube surface: face `(axis, sign)`, free coordinates in the
/// box `center ± half`. `orient` selects which signed difference is searched
/// (`+1`: `h₁ - h₂`, `-1`: `h₂ - h₁`; `0`: the absolute value).
struct Cell {
    axis: usize,
    sign: f64,
    orient: f64,
    center: Vec<f64>,
    half: f64,
    value: f64,
    priority: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

type Form<'a> = (&'a [Vector], f64);

fn centre_and_radius(vs: &[Vector]) -> (Vector, f64) {
    let mut c = Vector::zeros(vs[0].len());
    for v in vs {
        c += v;
    }
    c /= vs.len() as f64;
    let r = vs.iter().map(|v| (v - &c).norm()).fold(0.0, f64::max);
    (c, r)
}

fn argmax_vertex<'a>(vs: &'a [Vector], u: &[f64]) -> &'a Vector {
    let mut best = &vs[0];
    let mut val = f64::NEG_INFINITY;
    for v in vs {
        let s = super::body::dot(v.as_slice(), u);
        if s > val {
            val = s;
            best = v;
        }
    }
    best
}

/// Lifts free coordinates onto the face `u_axis = sign`.
fn lift(axis: usize, sign: f64, free: &[f64], out: &mut [f64]) {
    let mut k = 0;
    for (i, ui) in out.iter_mut().enumerate() {
        if i == axis {
            *ui = sign;
        } else {
            *ui = free[k];
            k += 1;
        }
    }
}

/// Certificate that `h_X(u) - h_Y(u) + t ≤ λ` for every unit `u` whose ray
/// meets the cell. With `c = λ - t` the claim is `φ(u) = h_X(u) - h_Y(u) -
/// c‖u‖ ≤ 0` on the (flat) cell. `φ` is a difference of convex functions;
/// replacing the subtracted convex part by its tangent plane at the centre
/// gives a convex majorant, whose maximum over the box is at a corner.
#[allow(clippy::too_many_arguments)]
fn cell_certified(
    x: &[Vector],
    y: &[Vector],
    t: f64,
    lambda: f64,
    axis: usize,
    sign: f64,
    center: &[f64],
    half: f64,
    scratch: &mut [f64],
) -> bool {
    let c = lambda - t;
    lift(axis, sign, center, scratch);
    let u0 = scratch.to_vec();
    let n0 = super::body::norm(&u0);
    let ystar = argmax_vertex(y, &u0);
    // Tangent plane of h_Y (+ c‖·‖ when c ≥ 0) at u0.
    let mut grad: Vec<f64> = ystar.iter().copied().collect();
    if c >= 0.0 {
        for (g, u) in grad.iter_mut().zip(&u0) {
            *g += c * u / n0;
        }
    }
    let free = center.len();
    let mut corner = vec![0.0; free];
    for mask in 0..(1usize << free) {
        for (k, (ck, cc)) in corner.iter_mut().zip(center).enumerate() {
            *ck = if mask >> k & 1 == 1 { cc + half } else { cc - half };
        }
        lift(axis, sign, &corner, scratch);
        let mut phi = support_of(x, scratch) - super::body::dot(&grad, scratch);
        if c < 0.0 {
            phi += -c * super::body::norm(scratch);
        }
        if phi > 0.0 {
            return false;
        }
    }
    true
}

fn branch_and_bound(
    a: &ConvexBody,
    b: &ConvexBody,
    forms: Option<(Form<'_>, Form<'_>)>,
    cfg: &HausdorffConfig,
) -> Result<f64, GeometryError> {
    let dim = a.dim();
    let free = dim - 1;
    let diag = (free as f64).sqrt();
    let lip = match forms {
        Some(((pa, _), (pb, _))) => {
            let (c1, r1) = centre_and_radius(pa);
            let (c2, r2) = centre_and_radius(pb);
            (c1 - c2).norm() + r1 + r2
        }
        None => {
            let (c1, r1) = a.bounding_ball();
            let (c2, r2) = b.bounding_ball();
            (c1 - c2).norm() + r1 + r2
        }
    };

    let mut u = vec![0.0; dim];
    let mut scratch = vec![0.0; dim];
    let mut eval = |axis: usize, sign: f64, orient: f64, center: &[f64], half: f64| -> Cell {
        lift(axis, sign, center, &mut u);
        let n = super::body::norm(&u);
        let value = match forms {
            Some(((pa, ra), (pb, rb))) => {
                orient * ((support_of(pa, &u) - support_of(pb, &u)) / n + ra - rb)
            }
            None => (a.support(&u) - b.support(&u)).abs() / n,
        };
        Cell {
            axis,
            sign,
            orient,
            center: center.to_vec(),
            half,
            value,
            priority: value + lip * half * diag,
        }
    };
    let orients: &[f64] = if forms.is_some() { &[1.0, -1.0] } else { &[0.0] };

    let mut evaluations = 0usize;
    let mut heap = BinaryHeap::new();
    let mut best = 0.0_f64;
    for axis in 0..dim {
        for sign in [-1.0, 1.0] {
            for &orient in orients {
                let cell = eval(axis, sign, orient, &vec![0.0; free], 1.0);
                evaluations += 1;
                best = best.max(cell.value);
                heap.push(cell);
            }
        }
    }
    while let Some(cell) = heap.pop() {
        let lambda = best + cfg.tol;
        let settled = match forms {
            Some(((pa, ra), (pb, rb))) => {
                evaluations += 1 << free;
                let (x, y, t) = if cell.orient > 0.0 { (pa, pb, ra - rb) } else { (pb, pa, rb - ra) };
                cell_certified(x, y, t, lambda, cell.axis, cell.sign, &cell.center, cell.half, &mut scratch)
            }
            None => cell.priority <= lambda,
        };
        if settled {
            continue;
        }
        if evaluations >= cfg.cell_budget {
            return Err(GeometryError::ToleranceUnreachable {
                combination: format!("{} vs {} in dimension {dim}", a.kind(), b.kind()),
                tol: cfg.tol,
                budget: cfg.cell_budget,
                gap: cell.priority - best,
            });
        }
        let half = cell.half / 2.0;
        for child in 0..(1usize << free) {
            let center: Vec<f64> = cell
                .center
                .iter()
                .enumerate()
                .map(|(k, c)| if child >> k & 1 == 1 { c + half } else { c - half })
                .collect();
            let sub = eval(cell.axis, cell.sign, cell.orient, &center, half);
            evaluations += 1;
            best = best.max(sub.value);
            heap.push(sub);
        }
    }
    Ok(best)
}
