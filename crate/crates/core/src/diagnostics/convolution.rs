//! Empirical constant in the maximal inequality for stochastic convolutions,
//!
//! ```text
//! E sup_{s ≤ t} ‖∫₀ˢ S(s − r) g(r) dW(r)‖^p ≤ C_p t^{p/2 − 1} ∫₀ᵗ ‖g(r)‖^p dr,
//! ```
//!
//! for deterministic step integrands. The convolution is advanced by the
//! exponential Euler recursion `Y_{k+1} = S(dt)(Y_k + g(t_k) ΔW_k)`, which is
//! exact in law for `g` constant on grid cells. `‖g‖` is the Frobenius norm.

use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::driver::rng::{GaussianStream, DOMAIN_CONVOLUTION};
use crate::driver::grid_steps;
use crate::semigroup::SemigroupOperator;
use crate::stats::Estimate;
use crate::{map_indexed, Matrix, Vector};

/// Ratio `max/min` of the fitted constants allowed across the `t`-ladder.
pub const STABILITY_FACTOR: f64 = 3.0;

/// `g(s) = values[i]` for `s ∈ [breakpoints[i], breakpoints[i+1])`; the last
/// piece extends to infinity. `breakpoints[0]` must be 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProcess {
    breakpoints: Vec<f64>,
    values: Vec<Matrix>,
}

impl StepProcess {
    pub fn new(breakpoints: Vec<f64>, values: Vec<Matrix>) -> Result<Self, DiagnosticsError> {
        let bad = |m: &str| Err(DiagnosticsError::InvalidParameter(m.to_string()));
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return bad("step process needs one value per breakpoint");
        }
        if breakpoints[0] != 0.0 || breakpoints.windows(2).any(|w| w[1].is_nan() || w[1] <= w[0]) {
            return bad("breakpoints must start at 0 and increase strictly");
        }
        let shape = values[0].shape();
        if values.iter().any(|v| v.shape() != shape || v.iter().any(|x| !x.is_finite())) {
            return bad("step values must be finite and share one shape");
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(value: Matrix) -> Self {
        Self {
            breakpoints: vec![0.0],
            values: vec![value],
        }
    }

    /// `(dE, dH)`.
    pub fn shape(&self) -> (usize, usize) {
        self.values[0].shape()
    }

    pub fn at(&self, s: f64) -> &Matrix {
        let i = self.breakpoints.partition_point(|b| *b <= s).max(1) - 1;
        &self.values[i]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `∫₀ᵗ ‖g(s)‖_F^p ds`, exactly.
    pub fn integral_norm_p(&self, t: f64, p: f64) -> f64 {
        let mut total = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let a = self.breakpoints[i];
            if a >= t {
                break;
            }
            let b = self.breakpoints.get(i + 1).copied().unwrap_or(f64::INFINITY).min(t);
            total += v.norm().powf(p) * (b - a);
        }
        total
    }
}

/// One rung of the `t`-ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionRow {
    pub t: f64,
    pub lhs: Estimate,
    pub rhs: f64,
    /// `lhs / rhs`; `None` when `rhs = 0`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionFit {
    pub p: f64,
    pub rows: Vec<ConvolutionRow>,
    /// Largest ratio over the ladder.
    pub fit_cp: f64,
    /// `max ratio / min ratio` (1 when fewer than two ratios exist).
    pub spread: f64,
    pub stable: bool,
}

/// Monte Carlo estimate of `E sup_{s ≤ t} ‖Y(s)‖^p` at every `t` of the
/// ladder (each must be a grid point of `dt`).
fn sup_moments(
    op: &SemigroupOperator,
    g: &StepProcess,
    p: f64,
    t_ladder: &[f64],
    paths: usize,
    seed: u64,
    dt: f64,
) -> Result<Vec<Estimate>, DiagnosticsError> {
    let (de, dh) = g.shape();
    if op.dim() != de {
        return Err(DiagnosticsError::Mismatch(format!(
            "operator acts on R^{}, g has {de} rows",
            op.dim()
        )));
    }
    let t_max = t_ladder.iter().copied().fold(0.0, f64::max);
    let steps = grid_steps(t_max, dt)?;
    let marks: Vec<usize> = t_ladder
        .iter()
        .map(|t| grid_steps(*t, dt))
        .collect::<Result<_, _>>()?;
    let s_dt = op.exp_at(dt)?;
    let sq = dt.sqrt();
    let gs: Vec<&Matrix> = (0..steps).map(|k| g.at(k as f64 * dt)).collect();
    // Per path: running sup of ‖Y‖^p read off at each mark.
    let per_path = map_indexed(paths, |path| {
        let mut w = GaussianStream::new(seed, DOMAIN_CONVOLUTION, path as u64);
        let mut y = Vector::zeros(de);
        let mut running = vec![0.0; steps + 1];
        let mut sup = 0.0_f64;
        for k in 0..steps {
            let dw = Vector::from_fn(dh, |_, _| sq * w.next_gaussian());
            y = &*s_dt * (y + gs[k] * dw);
            sup = sup.max(y.norm());
            running[k + 1] = sup;
        }
        marks.iter().map(|m| running[*m].powf(p)).collect::<Vec<f64>>()
    });
    Ok((0..marks.len())
        .map(|j| {
            let col: Vec<f64> = per_path.iter().map(|r| r[j]).collect();
            Estimate::from_samples(&col).expect("paths > 0")
        })
        .collect())
}

fn check_inputs(p: f64, t_ladder: &[f64], paths: usize) -> Result<(), DiagnosticsError> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(DiagnosticsError::InvalidParameter(format!("p must exceed 2, got {p}")));
    }
    if t_ladder.is_empty() || t_ladder.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(DiagnosticsError::InvalidParameter("t-ladder must be nonempty and positive".into()));
    }
    if paths == 0 {
        return Err(DiagnosticsError::Empty);
    }
    Ok(())
}

/// Fits `C_p` over `t_ladder` and judges whether one constant serves the
/// whole ladder (spread within [`STABILITY_FACTOR`]).
pub fn convolution_inequality_check(
    op: &SemigroupOperator,
    g: &StepProcess,
    p: f64,
    t_ladder: &[f64],
    paths: usize,
    seed: u64,
    dt: f64,
) -> Result<ConvolutionFit, DiagnosticsError> {
    check_inputs(p, t_ladder, paths)?;
    let lhs = sup_moments(op, g, p, t_ladder, paths, seed, dt)?;
    let rows: Vec<ConvolutionRow> = t_ladder
        .iter()
        .zip(lhs)
        .map(|(&t, lhs)| {
            let rhs = t.powf(p / 2.0 - 1.0) * g.integral_norm_p(t, p);
            ConvolutionRow {
                t,
                lhs,
                rhs,
                ratio: (rhs > 0.0).then(|| lhs.value / rhs),
            }
        })
        .collect();
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let fit_cp = ratios.iter().copied().fold(0.0, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if ratios.len() < 2 {
        1.0
    } else if min > 0.0 {
        fit_cp / min
    } else {
        f64::INFINITY
    };
    // Where the right side vanishes the left side must too.
    let trivial_ok = rows.iter().all(|r| r.rhs > 0.0 || r.lhs.value == 0.0);
    Ok(ConvolutionFit {
        p,
        rows,
        fit_cp,
        spread,
        stable: trivial_ok && spread <= STABILITY_FACTOR,
    })
}

/// `LHS(2g) / (2^p LHS(g))` at each `t` on shared noise; 1 for an exactly
/// homogeneous estimator. Rungs with `LHS(g) = 0` are skipped.
pub fn homogeneity_ratios(
    op: &SemigroupOperator,
    g: &StepProcess,
    p: f64,
    t_ladder: &[f64],
    paths: usize,
    seed: u64,
    dt: f64,
) -> Result<Vec<f64>, DiagnosticsError> {
    check_inputs(p, t_ladder, paths)?;
    let one = sup_moments(op, g, p, t_ladder, paths, seed, dt)?;
    let two = sup_moments(op, &g.scaled(2.0), p, t_ladder, paths, seed, dt)?;
    Ok(one
        .iter()
        .zip(&two)
        .filter(|(a, _)| a.value > 0.0)
        .map(|(a, b)| b.value / (a.value * 2f64.powf(p)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::{scaled_identity, zero};

    fn ladder(t: f64) -> Vec<f64> {
        vec![t / 8.0, t / 4.0, t / 2.0, t]
    }

    #[test]
    fn step_integral_is_exact() {
        let g = StepProcess::new(
            vec![0.0, 0.5],
            vec![Matrix::from_element(1, 1, 2.0), Matrix::from_element(1, 1, 1.0)],
        )
        .unwrap();
        assert_eq!(g.integral_norm_p(1.0, 4.0), 16.0 * 0.5 + 0.5);
        assert_eq!(g.integral_norm_p(0.25, 4.0), 4.0);
        assert_eq!(g.at(0.5)[(0, 0)], 1.0);
        assert_eq!(g.at(0.49)[(0, 0)], 2.0);
        assert!(StepProcess::new(vec![0.1], vec![Matrix::zeros(1, 1)]).is_err());
    }

    #[test]
    fn zero_integrand_is_trivially_fine() {
        let op = SemigroupOperator::new(zero(2), 1.0).unwrap();
        let g = StepProcess::constant(Matrix::zeros(2, 1));
        let fit = convolution_inequality_check(&op, &g, 4.0, &ladder(1.0), 50, 1, 1.0 / 64.0).unwrap();
        assert!(fit.stable);
        assert_eq!(fit.fit_cp, 0.0);
        assert!(fit.rows.iter().all(|r| r.lhs.value == 0.0 && r.ratio.is_none()));
    }

    #[test]
    fn brownian_fourth_moment_constant() {
        // A = 0, g = 1: LHS = E sup|W|^4 ≈ c·t², RHS = t², so the ratio is
        // flat in t. Doob gives E sup|W|^4 ≤ (4/3)^4 · 3t² ≈ 9.48 t².
        let op = SemigroupOperator::new(zero(1), 1.0).unwrap();
        let g = StepProcess::constant(Matrix::identity(1, 1));
        let fit = convolution_inequality_check(&op, &g, 4.0, &ladder(1.0), 4000, 7, 1.0 / 256.0).unwrap();
        assert!(fit.stable, "spread {}", fit.spread);
        assert!(fit.fit_cp > 3.0 * 0.8 && fit.fit_cp < 9.49);
    }

    #[test]
    fn homogeneity_is_exact_on_shared_noise() {
        let op = SemigroupOperator::new(scaled_identity(2, -1.0), 1.0).unwrap();
        let g = StepProcess::new(
            vec![0.0, 0.3],
            vec![
                Matrix::from_row_slice(2, 1, &[1.0, 0.5]),
                Matrix::from_row_slice(2, 1, &[0.2, -1.0]),
            ],
        )
        .unwrap();
        for r in homogeneity_ratios(&op, &g, 3.0, &ladder(1.0), 200, 3, 1.0 / 64.0).unwrap() {
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_across_calls() {
        let op = SemigroupOperator::new(scaled_identity(1, -0.5), 1.0).unwrap();
        let g = StepProcess::constant(Matrix::identity(1, 1));
        let a = convolution_inequality_check(&op, &g, 4.0, &[0.5, 1.0], 300, 9, 1.0 / 32.0).unwrap();
        let b = convolution_inequality_check(&op, &g, 4.0, &[0.5, 1.0], 300, 9, 1.0 / 32.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_small_p_and_off_grid_times() {
        let op = SemigroupOperator::new(zero(1), 1.0).unwrap();
        let g = StepProcess::constant(Matrix::identity(1, 1));
        assert!(convolution_inequality_check(&op, &g, 2.0, &[1.0], 10, 0, 0.25).is_err());
        assert!(convolution_inequality_check(&op, &g, 4.0, &[0.3], 10, 0, 0.25).is_err());
    }
}
