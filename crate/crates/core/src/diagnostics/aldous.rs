//! Aldous-type increment statistic
//! `sup_{s ≤ t ≤ s + δ} P(‖X(t) − X(s)‖ > η)` over grid pairs.
//!
//! Stopping times are replaced by deterministic grid times, so the value
//! under-approximates the quantity in the tightness criterion.

use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::map_indexed;
use crate::tonelli::PathEnsemble;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AldousRow {
    pub delta: f64,
    /// Largest lag (in grid steps) admitted for this `δ`.
    pub max_lag: usize,
    pub value: f64,
}

/// Rows in the order of `deltas`. `δ < dt` still admits adjacent pairs.
pub fn aldous_statistic(x: &PathEnsemble, deltas: &[f64], eta: f64) -> Result<Vec<AldousRow>, DiagnosticsError> {
    if x.paths() == 0 {
        return Err(DiagnosticsError::Empty);
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(DiagnosticsError::InvalidParameter(format!("eta must be ≥ 0, got {eta}")));
    }
    for &d in deltas {
        if !(d > 0.0 && d <= x.horizon() * (1.0 + 1e-12)) {
            return Err(DiagnosticsError::InvalidParameter(format!(
                "delta {d} outside (0, {}]",
                x.horizon()
            )));
        }
    }
    let lag_of = |d: f64| (((d / x.dt()) * (1.0 + 1e-12)).floor() as usize).clamp(1, x.steps().max(1));
    let max_lag = deltas.iter().map(|d| lag_of(*d)).max().unwrap_or(0);
    let paths = x.paths();
    // best[j - 1] = max over start k of the exceedance frequency at lag j.
    let best = map_indexed(max_lag.min(x.steps()), |jm1| {
        let j = jm1 + 1;
        (0..=x.steps() - j)
            .map(|k| {
                let hits = (0..paths)
                    .filter(|&p| {
                        let a = x.state(p, k);
                        let b = x.state(p, k + j);
                        a.iter().zip(b).map(|(u, v)| (v - u) * (v - u)).sum::<f64>().sqrt() > eta
                    })
                    .count();
                hits as f64 / paths as f64
            })
            .fold(0.0, f64::max)
    });
    Ok(deltas
        .iter()
        .map(|&delta| {
            let l = lag_of(delta).min(best.len());
            AldousRow {
                delta,
                max_lag: l,
                value: best[..l].iter().copied().fold(0.0, f64::max),
            }
        })
        .collect())
}
