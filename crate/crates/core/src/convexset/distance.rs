//! Point-to-body distance by Frank–Wolfe with fully corrective steps
//! (Wolfe's minimum-norm-point method) on the shifted body `K - x`.
//!
//! Each major iteration calls the support oracle once and stops on the
//! duality gap `g = ⟨y, y - s⟩`. Since `g ≥ ‖y‖ (‖y‖ - d(x, K))`, stopping at
//! `g ≤ tol·‖y‖` (or `‖y‖ ≤ tol`) certifies `|‖y‖ - d(x, K)| ≤ tol`.
//!
//! Balls (and points) are projected in closed form. Composite bodies with a small `P ⊕ B(0, r)` normal form are projected
//! onto the polytope `P` instead, using `d(x, P ⊕ rB) = (d(x, P) - r)⁺`:
//! on a polytope the corral search terminates finitely, whereas curved
//! pieces only give sublinear Frank–Wolfe progress.

use nalgebra::DMatrix;

use super::{check_tol, ConvexBody, GeometryError, Repr};
use crate::Vector;

/// Result of projecting a point onto a body.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub distance: f64,
    /// A point of the body at (certified) distance `distance` from the query.
    pub witness: Vector,
    pub iterations: usize,
    pub gap: f64,
}

/// Distance from `x` to `body`, within `tol`.
///
/// The iteration cap is `min(10·d/tol, 10^6)`.
pub fn distance_to_point(body: &ConvexBody, x: &Vector, tol: f64) -> Result<Projection, GeometryError> {
    check_tol(tol)?;
    let cap = ((10.0 * body.dim() as f64 / tol).ceil() as usize).clamp(100, 1_000_000);
    distance_to_point_with(body, x, tol, cap)
}

pub fn distance_to_point_with(
    body: &ConvexBody,
    x: &Vector,
    tol: f64,
    max_iter: usize,
) -> Result<Projection, GeometryError> {
    check_tol(tol)?;
    if x.len() != body.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: body.dim(),
            found: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(GeometryError::InvalidBody("query point is not finite".into()));
    }
    if let Some((c, r)) = body.as_ball() {
        let v = x - &c;
        let d = v.norm();
        let witness = if d > r { &c + v * (r / d) } else { x.clone() };
        return Ok(Projection {
            distance: (d - r).max(0.0),
            witness,
            iterations: 0,
            gap: 0.0,
        });
    }
    if matches!(body.repr(), Repr::MinkowskiSum(..) | Repr::Scaled(..) | Repr::Translated(..)) {
        if let Some((vs, r)) = body.polytope_ball_form(COMPOSITE_VERTEX_CAP) {
            let p = wolfe(&ConvexBody::hull(vs)?, x, tol, max_iter)?;
            let d = p.distance;
            let witness = if d > r {
                &p.witness + (x - &p.witness) * (r / d)
            } else {
                x.clone()
            };
            return Ok(Projection {
                distance: (d - r).max(0.0),
                witness,
                ..p
            });
        }
    }
    wolfe(body, x, tol, max_iter)
}

const COMPOSITE_VERTEX_CAP: usize = 1024;

fn wolfe(body: &ConvexBody, x: &Vector, tol: f64, max_iter: usize) -> Result<Projection, GeometryError> {
    let dim = body.dim();

    // Seed with the support point facing x from the bounding-ball centre.
    let (c, _) = body.bounding_ball();
    let toward = x - &c;
    let seed_dir = if toward.norm() > 0.0 {
        toward
    } else {
        let mut e = Vector::zeros(dim);
        e[0] = 1.0;
        e
    };
    let mut atoms: Vec<Vector> = vec![body.maximizer(seed_dir.as_slice()) - x];
    let mut weights: Vec<f64> = vec![1.0];
    let mut y = atoms[0].clone();
    let mut best_gap = f64::INFINITY;

    for it in 0..max_iter {
        let ynorm = y.norm();
        if ynorm <= tol {
            return Ok(finish(y, x, it, 0.0));
        }
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let s = body.maximizer(&neg) - x;
        let gap = y.dot(&y) - y.dot(&s);
        best_gap = best_gap.min(gap);
        if gap <= tol * ynorm {
            return Ok(finish(y, x, it, gap));
        }
        let scale = 1.0 + s.norm();
        if atoms.iter().any(|a| (a - &s).norm() <= 1e-14 * scale) {
            // Oracle returned an atom already in the corral: the corral
            // minimiser is numerically optimal, but the gap is not yet small.
            // Fall back to a plain Frank–Wolfe line-search step.
            y = line_search(&y, &s);
            atoms = vec![y.clone()];
            weights = vec![1.0];
            continue;
        }
        if atoms.len() > dim {
            drop_lightest(&mut atoms, &mut weights);
        }
        atoms.push(s);
        weights.push(0.0);

        // Minor cycle: move towards the affine minimiser until it lies in
        // the relative interior of the corral.
        loop {
            let alpha = match affine_minimizer(&atoms) {
                Some(a) => a,
                None => {
                    drop_lightest(&mut atoms, &mut weights);
                    renormalize(&mut weights);
                    continue;
                }
            };
            if alpha.iter().all(|&a| a > 1e-15) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0_f64;
            for (w, a) in weights.iter().zip(&alpha) {
                if *a <= 1e-15 && w - a > 0.0 {
                    theta = theta.min(w / (w - a));
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w += theta * (a - *w);
            }
            let mut k = 0;
            while k < weights.len() {
                if weights[k] <= 1e-15 {
                    weights.remove(k);
                    atoms.remove(k);
                } else {
                    k += 1;
                }
            }
            if atoms.is_empty() {
                atoms.push(y.clone());
                weights.push(1.0);
                break;
            }
            renormalize(&mut weights);
            if atoms.len() == 1 {
                break;
            }
        }
        y = combine(&atoms, &weights, dim);
    }
    Err(GeometryError::NoConvergence {
        iterations: max_iter,
        best_gap,
    })
}

fn finish(y: Vector, x: &Vector, iterations: usize, gap: f64) -> Projection {
    let distance = y.norm();
    Projection {
        distance,
        witness: y + x,
        iterations,
        gap,
    }
}

fn line_search(y: &Vector, s: &Vector) -> Vector {
    let d = s - y;
    let dd = d.dot(&d);
    if dd == 0.0 {
        return y.clone();
    }
    let gamma = (-(y.dot(&d)) / dd).clamp(0.0, 1.0);
    y + d * gamma
}

fn combine(atoms: &[Vector], weights: &[f64], dim: usize) -> Vector {
    let mut y = Vector::zeros(dim);
    for (a, w) in atoms.iter().zip(weights) {
        y.axpy(*w, a, 1.0);
    }
    y
}

fn renormalize(weights: &mut [f64]) {
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        for w in weights.iter_mut() {
            *w /= total;
        }
    }
}

fn drop_lightest(atoms: &mut Vec<Vector>, weights: &mut Vec<f64>) {
    if let Some((idx, _)) = weights
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
    {
        atoms.remove(idx);
        weights.remove(idx);
    }
}

/// Minimiser of `‖Σ α_i a_i‖` subject to `Σ α_i = 1`, from the KKT system
/// `[G 1; 1ᵀ 0] [α; μ] = [0; 1]` with `G` the Gram matrix.
fn affine_minimizer(atoms: &[Vector]) -> Option<Vec<f64>> {
    let m = atoms.len();
    if m == 1 {
        return Some(vec![1.0]);
    }
    let mut kkt = DMatrix::<f64>::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..=i {
            let g = atoms[i].dot(&atoms[j]);
            kkt[(i, j)] = g;
            kkt[(j, i)] = g;
        }
        kkt[(i, m)] = 1.0;
        kkt[(m, i)] = 1.0;
    }
    let mut rhs = nalgebra::DVector::<f64>::zeros(m + 1);
    rhs[m] = 1.0;
    let scale = kkt.abs().max().max(1.0);
    // The KKT matrix is symmetric; its eigendecomposition stays accurate with
    // repeated eigenvalues, where the general SVD solve was seen to drift.
    let eig = kkt.symmetric_eigen();
    if eig.eigenvalues.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min) <= 1e-13 * scale {
        return None;
    }
    let coeffs = (eig.eigenvectors.transpose() * rhs).component_div(&eig.eigenvalues);
    let sol = &eig.eigenvectors * coeffs;
    let alpha: Vec<f64> = sol.iter().take(m).copied().collect();
    alpha.iter().all(|a| a.is_finite()).then_some(alpha)
}
