//! Bounded-Lipschitz distances between path laws and a greedy covering
//! proxy for noncompactness.
//!
//! The BL estimate maximises `|E₁φ − E₂φ|` over the dictionary
//! `φ_v(u) = max(0, 1 − ‖u − v‖_∞)` where `‖·‖_∞` is the sup over grid times
//! of the Euclidean norm. Every `φ_v` is bounded by 1 and 1-Lipschitz, so the
//! estimate is a lower bound of the Dudley distance between the empirical
//! laws and lies in `[0, 1]`.

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::driver::rng::{keyed, unit, DOMAIN_ANCHORS};
use crate::map_indexed;
use crate::tonelli::PathEnsemble;

/// `max_k ‖a_k − b_k‖` for flattened `(steps + 1) × d` trajectories.
pub fn sup_distance(a: &[f64], b: &[f64], d: usize) -> f64 {
    a.chunks(d)
        .zip(b.chunks(d))
        .map(|(u, v)| u.iter().zip(v).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

fn same_grid(a: &PathEnsemble, b: &PathEnsemble) -> Result<(), DiagnosticsError> {
    if a.dt() != b.dt() || a.steps() != b.steps() || a.de() != b.de() {
        return Err(DiagnosticsError::Mismatch(format!(
            "grids differ: (dt {}, steps {}, dE {}) vs (dt {}, steps {}, dE {})",
            a.dt(),
            a.steps(),
            a.de(),
            b.dt(),
            b.steps(),
            b.de()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlEstimate {
    pub value: f64,
    /// Standard error of the winning mean difference.
    pub std_error: f64,
    pub dictionary: usize,
}

/// Seeded permutation of `0..n` (Fisher–Yates on a keyed stream).
fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = keyed(seed, DOMAIN_ANCHORS, 0);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = ((unit(rng.next_u64()) * (i + 1) as f64) as usize).min(i);
        idx.swap(i, j);
    }
    idx
}

/// Lower estimate of `β(law X1, law X2)` with `anchors` anchor paths taken
/// from each ensemble. The anchor sets are nested prefixes of one seeded
/// permutation, so the value is nondecreasing in `anchors`.
pub fn bl_distance(
    x1: &PathEnsemble,
    x2: &PathEnsemble,
    anchors: usize,
    seed: u64,
) -> Result<BlEstimate, DiagnosticsError> {
    same_grid(x1, x2)?;
    if anchors == 0 {
        return Err(DiagnosticsError::InvalidParameter("anchors must be ≥ 1".into()));
    }
    if x1.paths() == 0 || x2.paths() == 0 {
        return Err(DiagnosticsError::Empty);
    }
    let pool = x1.paths().min(x2.paths());
    let order = permutation(pool, seed);
    let mut dict: Vec<&[f64]> = Vec::with_capacity(2 * anchors);
    for &i in order.iter().take(anchors) {
        dict.push(x1.trajectory(i));
        dict.push(x2.trajectory(i));
    }
    bl_distance_with_dictionary(x1, x2, &dict)
}

/// As [`bl_distance`] with explicit anchor trajectories.
pub fn bl_distance_with_dictionary(
    x1: &PathEnsemble,
    x2: &PathEnsemble,
    anchors: &[&[f64]],
) -> Result<BlEstimate, DiagnosticsError> {
    same_grid(x1, x2)?;
    if x1.paths() == 0 || x2.paths() == 0 {
        return Err(DiagnosticsError::Empty);
    }
    let len = (x1.steps() + 1) * x1.de();
    if let Some(a) = anchors.iter().find(|a| a.len() != len) {
        return Err(DiagnosticsError::Mismatch(format!(
            "anchor has {} values, trajectories have {len}",
            a.len()
        )));
    }
    let de = x1.de();
    let moments = |x: &PathEnsemble, v: &[f64]| {
        let phi: Vec<f64> = (0..x.paths())
            .map(|p| (1.0 - sup_distance(x.trajectory(p), v, de)).max(0.0))
            .collect();
        let n = phi.len() as f64;
        let mean = crate::stats::sum(phi.iter().copied()) / n;
        let var = if phi.len() > 1 {
            crate::stats::sum(phi.iter().map(|f| (f - mean) * (f - mean))) / (n - 1.0)
        } else {
            0.0
        };
        (mean, var / n)
    };
    let per = map_indexed(anchors.len(), |j| {
        let (m1, v1) = moments(x1, anchors[j]);
        let (m2, v2) = moments(x2, anchors[j]);
        ((m1 - m2).abs(), (v1 + v2).sqrt())
    });
    let (value, std_error) = per
        .into_iter()
        .fold((0.0, 0.0), |best, cur| if cur.0 > best.0 { cur } else { best });
    Ok(BlEstimate {
        value,
        std_error,
        dictionary: anchors.len(),
    })
}

/// Uncovered fractions per radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringCurve {
    pub radii: Vec<f64>,
    pub anchors: usize,
    /// One curve per input ensemble.
    pub per_ensemble: Vec<Vec<f64>>,
    pub pooled: Vec<f64>,
}

/// Distances of every trajectory to the nearest of `k` farthest-point
/// greedy anchors (the first anchor is trajectory 0; ties go to the lowest
/// index).
fn greedy_cover(trajs: &[&[f64]], d: usize, k: usize) -> Vec<f64> {
    let mut best = vec![f64::INFINITY; trajs.len()];
    let mut next = 0usize;
    for _ in 0..k.min(trajs.len()) {
        let anchor = trajs[next];
        let dist = map_indexed(trajs.len(), |i| sup_distance(trajs[i], anchor, d));
        for (b, dd) in best.iter_mut().zip(dist) {
            *b = b.min(dd);
        }
        next = 0;
        for i in 1..best.len() {
            if best[i] > best[next] {
                next = i;
            }
        }
        if best[next] == 0.0 {
            break;
        }
    }
    best
}

fn uncovered(dist: &[f64], radii: &[f64]) -> Vec<f64> {
    radii
        .iter()
        .map(|eps| dist.iter().filter(|d| **d > *eps).count() as f64 / dist.len() as f64)
        .collect()
}

/// Fraction of trajectories farther than `ε` from `k` greedy anchors, for
/// each `ε` in `radii`, per ensemble and pooled.
pub fn noncompactness_proxy(
    ensembles: &[&PathEnsemble],
    radii: &[f64],
    k: usize,
) -> Result<CoveringCurve, DiagnosticsError> {
    let first = ensembles.first().ok_or(DiagnosticsError::Empty)?;
    for e in ensembles {
        same_grid(first, e)?;
        if e.paths() == 0 {
            return Err(DiagnosticsError::Empty);
        }
    }
    if k == 0 {
        return Err(DiagnosticsError::InvalidParameter("need at least one anchor".into()));
    }
    if radii.iter().any(|r| r.is_nan() || *r < 0.0) {
        return Err(DiagnosticsError::InvalidParameter("radii must be ≥ 0".into()));
    }
    let d = first.de();
    fn trajs(e: &PathEnsemble) -> Vec<&[f64]> {
        (0..e.paths()).map(|p| e.trajectory(p)).collect()
    }
    let per_ensemble = ensembles
        .iter()
        .map(|e| uncovered(&greedy_cover(&trajs(e), d, k), radii))
        .collect();
    let all: Vec<&[f64]> = ensembles.iter().flat_map(|e| trajs(e)).collect();
    let pooled = uncovered(&greedy_cover(&all, d, k), radii);
    Ok(CoveringCurve {
        radii: radii.to_vec(),
        anchors: k,
        per_ensemble,
        pooled,
    })
}
