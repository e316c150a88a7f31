//! Numerical test of the Osgood implication
//! `R(t) ≤ k ∫₀ᵗ L(s, R(s)) ds  ⇒  R ≡ 0`
//! by the Picard iteration `R_{m+1}(t) = k ∫₀ᵗ L(s, R_m(s)) ds` started from
//! a constant `R₀` with `R₁ ≤ R₀`. The iterates then decrease to the maximal
//! solution of the integral equation; a positive limit is a nonzero solution
//! and refutes the implication, while a vanishing limit is (only) numerical
//! evidence for it.

use serde::Serialize;

use super::{CoefficientError, OsgoodModulus};

pub const PASS_FRACTION: f64 = 1e-8;
pub const FAIL_FRACTION: f64 = 1e-4;
pub const STABLE_CHANGE: f64 = 1e-6;
const MAX_DOUBLINGS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OsgoodVerdict {
    OsgoodPass,
    OsgoodFail,
    Inconclusive,
}

impl OsgoodVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            OsgoodVerdict::OsgoodPass => "osgood_pass",
            OsgoodVerdict::OsgoodFail => "osgood_fail",
            OsgoodVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OsgoodOutcome {
    /// `sup_t R_iters(t)`.
    pub limit_sup: f64,
    pub verdict: OsgoodVerdict,
    pub r0_requested: f64,
    /// Starting constant actually used (after inflation).
    pub r0: f64,
    /// Whether `R₁ ≤ R₀` holds on the grid, i.e. the iteration is monotone.
    pub dominating: bool,
    /// Relative sup-change between the last two iterates.
    pub last_change: f64,
    pub note: Option<String>,
    /// `R_m` on the grid for `m = 0..=iters`.
    #[serde(skip)]
    pub iterates: Vec<Vec<f64>>,
}

fn picard_step(l: &OsgoodModulus, k: f64, times: &[f64], r: &[f64]) -> Result<Vec<f64>, CoefficientError> {
    let vals: Vec<f64> = times
        .iter()
        .zip(r)
        .map(|(&t, &u)| {
            let v = l.eval(t, u);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(CoefficientError::NonFiniteModulus { t, u })
            }
        })
        .collect::<Result<_, _>>()?;
    let mut out = Vec::with_capacity(r.len());
    let mut acc = 0.0;
    out.push(0.0);
    for j in 1..times.len() {
        acc += 0.5 * (times[j] - times[j - 1]) * (vals[j] + vals[j - 1]);
        out.push(k * acc);
    }
    Ok(out)
}

fn sup(r: &[f64]) -> f64 {
    r.iter().copied().fold(0.0, f64::max)
}

pub fn osgood_iterate(
    l: &OsgoodModulus,
    k: f64,
    horizon: f64,
    r0: f64,
    grid: usize,
    iters: usize,
) -> Result<OsgoodOutcome, CoefficientError> {
    let finite_pos = |v: f64| v > 0.0 && v.is_finite();
    if !(finite_pos(k) && finite_pos(horizon) && finite_pos(r0)) || grid == 0 || iters == 0 {
        return Err(CoefficientError::InvalidParameter(format!(
            "osgood iteration needs k, T, R0 > 0 and grid, iters ≥ 1 (got k = {k}, T = {horizon}, R0 = {r0}, grid = {grid}, iters = {iters})"
        )));
    }
    let times: Vec<f64> = (0..=grid).map(|j| horizon * j as f64 / grid as f64).collect();

    let mut start = r0;
    let mut dominating = false;
    for _ in 0..=MAX_DOUBLINGS {
        let r1 = picard_step(l, k, &times, &vec![start; times.len()])?;
        if sup(&r1) <= start {
            dominating = true;
            break;
        }
        start *= 2.0;
    }
    let note = if !dominating {
        start = r0;
        Some(format!(
            "no constant R0 ≤ {:e} dominates its first iterate; iterating from R0 = {r0} without monotonicity",
            r0 * 2f64.powi(MAX_DOUBLINGS as i32)
        ))
    } else if start != r0 {
        Some(format!("R0 inflated from {r0} to {start} so that R1 ≤ R0"))
    } else {
        None
    };

    let mut iterates = vec![vec![start; times.len()]];
    for _ in 0..iters {
        let next = picard_step(l, k, &times, iterates.last().unwrap())?;
        iterates.push(next);
    }
    let last = sup(&iterates[iters]);
    let prev = sup(&iterates[iters - 1]);
    let last_change = if prev > 0.0 { (prev - last).abs() / prev } else { 0.0 };
    let verdict = if last <= PASS_FRACTION * start {
        OsgoodVerdict::OsgoodPass
    } else if last > FAIL_FRACTION * start && last_change < STABLE_CHANGE {
        OsgoodVerdict::OsgoodFail
    } else {
        OsgoodVerdict::Inconclusive
    };
    Ok(OsgoodOutcome {
        limit_sup: last,
        verdict,
        r0_requested: r0,
        r0: start,
        dominating,
        last_change,
        note,
        iterates,
    })
}
