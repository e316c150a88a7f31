//! Steiner point `s(K) = d · avg_{u∈S^{d-1}} h_K(u) u`.
//!
//! The Steiner point is Minkowski additive, positively homogeneous and
//! translation equivariant, and `s(B(c, r)) = c`. Composite bodies are
//! therefore reduced to their hull leaves, which are handled as follows:
//!
//! - `d = 1`: midpoint of the interval;
//! - `d = 2`: exterior-angle formula `Σ (θ_v / 2π) v` over hull vertices;
//! - `d ≥ 3`: quadrature of the equivalent form `avg_u x*(u)` where `x*(u)`
//!   is the support point. Every quadrature estimate is a convex combination
//!   of vertices, hence inside the hull.

use std::f64::consts::PI;

use super::planar::convex_hull;
use super::{check_tol, distance_to_point, sphere_directions, ConvexBody, GeometryError, Repr};
use crate::Vector;

/// Quadrature budget and the membership tolerance used to certify the
/// estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub nodes: usize,
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 4096,
            tol: 1e-6,
        }
    }
}

pub fn steiner_point(body: &ConvexBody, quad: &QuadratureSpec) -> Result<Vector, GeometryError> {
    check_tol(quad.tol)?;
    let mut used_quadrature = false;
    let s = reduce(body, quad, &mut used_quadrature);
    if used_quadrature {
        let residual = distance_to_point(body, &s, quad.tol)?.distance;
        if residual > quad.tol {
            return Err(GeometryError::SteinerResidual {
                residual,
                tol: quad.tol,
            });
        }
    }
    Ok(s)
}

fn reduce(body: &ConvexBody, quad: &QuadratureSpec, used_quadrature: &mut bool) -> Vector {
    match body.repr() {
        Repr::Point(c) => c.clone(),
        Repr::Ball { center, .. } => center.clone(),
        Repr::Hull(vs) => match body.dim() {
            1 => {
                let lo = vs.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
                let hi = vs.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
                Vector::from_element(1, 0.5 * (lo + hi))
            }
            2 => {
                let pts: Vec<[f64; 2]> = vs.iter().map(|v| [v[0], v[1]]).collect();
                let s = planar_steiner_point(&pts);
                Vector::from_column_slice(&s)
            }
            d => {
                *used_quadrature = true;
                let dirs = sphere_directions(d, quad.nodes);
                let mut acc = Vector::zeros(d);
                for u in &dirs {
                    acc += body.maximizer(u.as_slice());
                }
                acc / dirs.len() as f64
            }
        },
        Repr::MinkowskiSum(a, b) => reduce(a, quad, used_quadrature) + reduce(b, quad, used_quadrature),
        Repr::Scaled(f, k) => reduce(k, quad, used_quadrature) * *f,
        Repr::Translated(v, k) => reduce(k, quad, used_quadrature) + v,
    }
}

/// Exterior-angle Steiner point of the convex hull of planar points.
pub fn planar_steiner_point(points: &[[f64; 2]]) -> [f64; 2] {
    let hull = convex_hull(points);
    match hull.len() {
        0 => [f64::NAN, f64::NAN],
        1 => hull[0],
        2 => [0.5 * (hull[0][0] + hull[1][0]), 0.5 * (hull[0][1] + hull[1][1])],
        m => {
            let mut s = [0.0, 0.0];
            for i in 0..m {
                let prev = hull[(i + m - 1) % m];
                let cur = hull[i];
                let next = hull[(i + 1) % m];
                let e1 = [cur[0] - prev[0], cur[1] - prev[1]];
                let e2 = [next[0] - cur[0], next[1] - cur[1]];
                let turn = (e1[0] * e2[1] - e1[1] * e2[0]).atan2(e1[0] * e2[0] + e1[1] * e2[1]);
                let w = turn / (2.0 * PI);
                s[0] += w * cur[0];
                s[1] += w * cur[1];
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn ball_centre() {
        let b = ConvexBody::ball(v(&[1.0, 2.0]), 3.0).unwrap();
        assert_eq!(steiner_point(&b, &QuadratureSpec::default()).unwrap(), v(&[1.0, 2.0]));
    }

    #[test]
    fn unit_square_centre() {
        let sq = ConvexBody::hull(vec![
            v(&[0.0, 0.0]),
            v(&[1.0, 0.0]),
            v(&[1.0, 1.0]),
            v(&[0.0, 1.0]),
        ])
        .unwrap();
        let s = steiner_point(&sq, &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!((s - v(&[0.5, 0.5])).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn right_triangle_against_exterior_angles() {
        // Exterior angles π/2, 3π/4, 3π/4 at (0,0), (1,0), (0,1).
        let oracle = [0.375, 0.375];
        let tri = ConvexBody::hull(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let s = steiner_point(&tri, &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!(s[0], oracle[0], epsilon = 1e-15);
        assert_abs_diff_eq!(s[1], oracle[1], epsilon = 1e-15);
    }

    #[test]
    fn segment_midpoint_and_interval() {
        assert_eq!(planar_steiner_point(&[[0.0, 0.0], [2.0, 2.0]]), [1.0, 1.0]);
        let iv = ConvexBody::hull(vec![v(&[3.0]), v(&[-1.0]), v(&[0.0])]).unwrap();
        assert_eq!(steiner_point(&iv, &QuadratureSpec::default()).unwrap(), v(&[1.0]));
    }

    #[test]
    fn translation_is_exact() {
        let tri = ConvexBody::hull(vec![v(&[0.0, 0.0]), v(&[1.0, 0.3]), v(&[0.2, 1.0])]).unwrap();
        let off = v(&[0.7, -3.1]);
        let q = QuadratureSpec::default();
        let base = steiner_point(&tri, &q).unwrap();
        let moved = steiner_point(&ConvexBody::translated(off.clone(), tri).unwrap(), &q).unwrap();
        assert_eq!(moved, off + base);
    }

    #[test]
    fn regular_tetrahedron_by_quadrature() {
        // Symmetric body: Steiner point is the centroid.
        let s3 = 1.0 / 3f64.sqrt();
        let tet = ConvexBody::hull(vec![
            v(&[s3, s3, s3]),
            v(&[s3, -s3, -s3]),
            v(&[-s3, s3, -s3]),
            v(&[-s3, -s3, s3]),
        ])
        .unwrap();
        let s = steiner_point(&tet, &QuadratureSpec::default()).unwrap();
        assert!(s.norm() < 2e-2, "{s}");
    }

    #[test]
    fn cube_corner_simplex_matches_planar_when_flat() {
        // Quadrature in 3-D of a segment: lands on the segment.
        let seg = ConvexBody::hull(vec![v(&[0.0, 0.0, 0.0]), v(&[1.0, 2.0, 3.0])]).unwrap();
        let s = steiner_point(&seg, &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!((s - v(&[0.5, 1.0, 1.5])).norm(), 0.0, epsilon = 1e-2);
    }
}
