//! Path moments, the Gronwall bound and residual summaries.

use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::stats::{quantile, sum, Estimate};
use crate::tonelli::{InclusionScenario, PathEnsemble};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn require_paths(x: &PathEnsemble) -> Result<(), DiagnosticsError> {
    if x.paths() == 0 {
        Err(DiagnosticsError::Empty)
    } else {
        Ok(())
    }
}

/// Monte Carlo estimate of `E[sup_{t ≤ T} ‖X(t)‖^p]` over the grid.
pub fn sup_moment(x: &PathEnsemble, p: f64) -> Result<Estimate, DiagnosticsError> {
    require_paths(x)?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(DiagnosticsError::InvalidParameter(format!("p must be > 0, got {p}")));
    }
    let samples: Vec<f64> = (0..x.paths())
        .map(|i| {
            (0..=x.steps())
                .map(|k| norm(x.state(i, k)))
                .fold(0.0, f64::max)
                .powf(p)
        })
        .collect();
    Ok(Estimate::from_samples(&samples).expect("nonempty"))
}

/// Monte Carlo estimate of `E ∫₀ᵀ ‖X(t)‖^p dt` (trapezoidal in time).
pub fn integrated_moment(x: &PathEnsemble, p: f64) -> Result<Estimate, DiagnosticsError> {
    require_paths(x)?;
    let dt = x.dt();
    let samples: Vec<f64> = (0..x.paths())
        .map(|i| {
            let vals: Vec<f64> = (0..=x.steps()).map(|k| norm(x.state(i, k)).powf(p)).collect();
            let inner = sum(vals[1..vals.len() - 1].iter().copied());
            dt * (inner + 0.5 * (vals[0] + vals[vals.len() - 1]))
        })
        .collect();
    Ok(Estimate::from_samples(&samples).expect("nonempty"))
}

/// The a-priori bound `E∫‖X_n‖^p ≤ T·c·e^{cT}` with
/// `c = 3^{p-1} C_B(T)^p (E‖ξ‖^p + 2^{p-1} η^p (1 + C_conv) T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallCheck {
    pub empirical: Estimate,
    pub xi_moment: f64,
    pub c: f64,
    /// `ln(T c e^{cT})`; the bound itself overflows easily.
    pub log_bound: f64,
    /// `empirical ≤ slack · T c e^{cT}`.
    pub holds: bool,
    pub slack: f64,
}

pub fn gronwall_check(
    sc: &InclusionScenario,
    x: &PathEnsemble,
    c_conv: f64,
    slack: f64,
) -> Result<GronwallCheck, DiagnosticsError> {
    require_paths(x)?;
    let p = sc.hyp.p;
    let t = sc.horizon;
    let empirical = integrated_moment(x, p)?;
    let xi_moment = sum((0..x.paths()).map(|i| norm(x.state(i, 0)).powf(p))) / x.paths() as f64;
    let cb = sc.op.c_b(t);
    let c = 3f64.powf(p - 1.0)
        * cb.powf(p)
        * (xi_moment + 2f64.powf(p - 1.0) * sc.hyp.eta.powf(p) * (1.0 + c_conv) * t);
    let log_bound = t.ln() + c.ln() + c * t;
    let holds = empirical.value <= 0.0 || empirical.value.ln() <= slack.ln() + log_bound;
    Ok(GronwallCheck {
        empirical,
        xi_moment,
        c,
        log_bound,
        holds,
        slack,
    })
}

/// Summary of `‖Z_n(T)‖` over paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub n: u64,
    pub mean: f64,
    pub std_error: f64,
    pub p90: f64,
}

/// Row for one Tonelli index from a residual array
/// (`paths × (steps + 1) × dE`).
pub fn residual_row(n: u64, x: &PathEnsemble, z: &[f64]) -> Result<ResidualRow, DiagnosticsError> {
    require_paths(x)?;
    let de = x.de();
    let per = (x.steps() + 1) * de;
    if z.len() != x.paths() * per {
        return Err(DiagnosticsError::Mismatch(format!(
            "residual has {} values, ensemble needs {}",
            z.len(),
            x.paths() * per
        )));
    }
    let terminal: Vec<f64> = (0..x.paths())
        .map(|i| norm(&z[i * per + per - de..(i + 1) * per]))
        .collect();
    let est = Estimate::from_samples(&terminal).expect("nonempty");
    Ok(ResidualRow {
        n,
        mean: est.value,
        std_error: est.std_error,
        p90: quantile(&terminal, 0.9).expect("nonempty"),
    })
}

/// Fraction of paths with `‖Z(T)‖ > eps`.
pub fn residual_exceedance(x: &PathEnsemble, z: &[f64], eps: f64) -> f64 {
    let de = x.de();
    let per = (x.steps() + 1) * de;
    let hits = (0..x.paths())
        .filter(|i| norm(&z[i * per + per - de..(i + 1) * per]) > eps)
        .count();
    hits as f64 / x.paths() as f64
}
