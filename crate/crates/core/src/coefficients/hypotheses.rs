//! Sampling checks of the growth bound `Hausd({0}, F(t,x)) ≤ η(1 + ‖x‖)` and
//! the modulus bound `Hausd(F(t,x), F(t,y))^p ≤ L(t, ‖x - y‖^p)`.
//!
//! Both conditions are universally quantified; these checks only look at a
//! finite sample, so a clean report is evidence, not proof.

use rand_core::RngCore;
use serde::Serialize;

use super::{CoefficientError, MultiMap, OsgoodModulus};
use crate::convexset::{hausdorff_distance, ConvexBody};
use crate::driver::rng::{keyed, unit, DOMAIN_SAMPLING};
use crate::Vector;

/// Ratios above `1 + RATIO_SLACK` count as violations; the slack absorbs
/// rounding in families that attain their bound exactly.
pub const RATIO_SLACK: f64 = 1e-9;

const HAUSDORFF_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct CoefficientHypotheses {
    pub eta: f64,
    pub modulus: OsgoodModulus,
    pub p: f64,
}

impl CoefficientHypotheses {
    pub fn new(eta: f64, modulus: OsgoodModulus, p: f64) -> Result<Self, CoefficientError> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(CoefficientError::InvalidParameter(format!("eta must be > 0, got {eta}")));
        }
        if !(p > 2.0 && p.is_finite()) {
            return Err(CoefficientError::InvalidParameter(format!("p must be > 2, got {p}")));
        }
        Ok(Self { eta, modulus, p })
    }
}

/// Where and how many states are sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec {
    pub samples: usize,
    /// States are uniform in `[-half_width, half_width]^d`.
    pub half_width: f64,
    pub horizon: f64,
    pub seed: u64,
}

impl SamplingSpec {
    pub fn new(horizon: f64, seed: u64) -> Self {
        Self {
            samples: 1000,
            half_width: 5.0,
            horizon,
            seed,
        }
    }
}

fn uniform_state(rng: &mut impl RngCore, dim: usize, half_width: f64) -> Vector {
    Vector::from_fn(dim, |_, _| half_width * (2.0 * unit(rng.next_u64()) - 1.0))
}

/// `(t, x)` samples, `t` uniform on `[0, T]`.
pub fn sample_points(dim: usize, spec: &SamplingSpec) -> Vec<(f64, Vector)> {
    let mut rng = keyed(spec.seed, DOMAIN_SAMPLING, 0);
    (0..spec.samples)
        .map(|_| {
            let t = spec.horizon * unit(rng.next_u64());
            (t, uniform_state(&mut rng, dim, spec.half_width))
        })
        .collect()
}

/// `(t, x, y)` samples. Half of the pairs are local (`y` within `10⁻²` of
/// `x` in each coordinate) so that small-`u` behaviour of `L` is exercised.
pub fn sample_pairs(dim: usize, spec: &SamplingSpec) -> Vec<(f64, Vector, Vector)> {
    let mut rng = keyed(spec.seed, DOMAIN_SAMPLING, 1);
    (0..spec.samples)
        .map(|i| {
            let t = spec.horizon * unit(rng.next_u64());
            let x = uniform_state(&mut rng, dim, spec.half_width);
            let y = if i % 2 == 0 {
                uniform_state(&mut rng, dim, spec.half_width)
            } else {
                &x + uniform_state(&mut rng, dim, 1e-2)
            };
            (t, x, y)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub samples: usize,
    pub violations: usize,
    pub worst_ratio: f64,
    pub worst_t: f64,
    pub worst_x: Vec<f64>,
}

/// `Hausd({0}, K) = max_{y ∈ K} ‖y‖`.
pub fn farthest_norm(k: &ConvexBody) -> Result<f64, CoefficientError> {
    let origin = ConvexBody::point(Vector::zeros(k.dim()))?;
    Ok(hausdorff_distance(&origin, k, HAUSDORFF_TOL)?)
}

pub fn check_growth(
    f: &MultiMap,
    hyp: &CoefficientHypotheses,
    samples: &[(f64, Vector)],
) -> Result<GrowthReport, CoefficientError> {
    if samples.is_empty() {
        return Err(CoefficientError::EmptySamples);
    }
    let mut report = GrowthReport {
        samples: samples.len(),
        violations: 0,
        worst_ratio: f64::NEG_INFINITY,
        worst_t: samples[0].0,
        worst_x: samples[0].1.iter().copied().collect(),
    };
    for (t, x) in samples {
        let h = farthest_norm(&f.eval(*t, x)?)?;
        let ratio = h / (hyp.eta * (1.0 + x.norm()));
        if ratio > 1.0 + RATIO_SLACK {
            report.violations += 1;
        }
        if ratio > report.worst_ratio {
            report.worst_ratio = ratio;
            report.worst_t = *t;
            report.worst_x = x.iter().copied().collect();
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusReport {
    pub pairs: usize,
    pub violations: usize,
    pub worst_ratio: f64,
    pub worst_t: f64,
    pub worst_x: Vec<f64>,
    pub worst_y: Vec<f64>,
    /// Pairs where `L` was `+∞` (bound holds trivially).
    pub infinite_rhs: usize,
}

pub fn check_modulus(
    f: &MultiMap,
    hyp: &CoefficientHypotheses,
    pairs: &[(f64, Vector, Vector)],
) -> Result<ModulusReport, CoefficientError> {
    if pairs.is_empty() {
        return Err(CoefficientError::EmptySamples);
    }
    let mut report = ModulusReport {
        pairs: pairs.len(),
        violations: 0,
        worst_ratio: f64::NEG_INFINITY,
        worst_t: pairs[0].0,
        worst_x: pairs[0].1.iter().copied().collect(),
        worst_y: pairs[0].2.iter().copied().collect(),
        infinite_rhs: 0,
    };
    for (t, x, y) in pairs {
        let h = hausdorff_distance(&f.eval(*t, x)?, &f.eval(*t, y)?, HAUSDORFF_TOL)?;
        let lhs = h.powf(hyp.p);
        let u = (x - y).norm().powf(hyp.p);
        let rhs = hyp.modulus.eval(*t, u);
        if rhs.is_nan() {
            return Err(CoefficientError::NonFiniteModulus { t: *t, u });
        }
        if rhs == f64::INFINITY {
            report.infinite_rhs += 1;
            continue;
        }
        // Both sides vanish for x = y; within Hausdorff tolerance, equal.
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if h <= HAUSDORFF_TOL {
            0.0
        } else {
            f64::INFINITY
        };
        if ratio > 1.0 + RATIO_SLACK {
            report.violations += 1;
        }
        if ratio > report.worst_ratio {
            report.worst_ratio = ratio;
            report.worst_t = *t;
            report.worst_x = x.iter().copied().collect();
            report.worst_y = y.iter().copied().collect();
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{constant, osgood_scalar, tube, RadiusFn};
    use crate::Matrix;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn doubling() -> MultiMap {
        MultiMap::from_fn(2, 2, "2x", |_, x| ConvexBody::point(x * 2.0).unwrap())
    }

    fn hyp(eta: f64, l: OsgoodModulus, p: f64) -> CoefficientHypotheses {
        CoefficientHypotheses::new(eta, l, p).unwrap()
    }

    #[test]
    fn unit_ball_has_no_growth_violation() {
        let f = constant(2, ConvexBody::ball(v(&[0.0, 0.0]), 1.0).unwrap());
        let s = sample_points(2, &SamplingSpec::new(1.0, 3));
        let r = check_growth(&f, &hyp(1.0, OsgoodModulus::zero(), 4.0), &s).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.worst_ratio <= 1.0);
    }

    #[test]
    fn doubling_violates_growth_with_ratio_four_thirds() {
        let r = check_growth(
            &doubling(),
            &hyp(1.0, OsgoodModulus::zero(), 4.0),
            &[(0.0, v(&[2.0, 0.0]))],
        )
        .unwrap();
        assert_eq!(r.violations, 1);
        assert_abs_diff_eq!(r.worst_ratio, 4.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_map_has_zero_ratio() {
        let f = constant(1, ConvexBody::point(v(&[0.0])).unwrap());
        let r = check_growth(&f, &hyp(1.0, OsgoodModulus::zero(), 4.0), &[(0.0, v(&[3.0]))]).unwrap();
        assert_eq!(r.worst_ratio, 0.0);
    }

    #[test]
    fn translated_ball_attains_linear_modulus() {
        let f = tube(
            v(&[0.0, 0.0]),
            Matrix::identity(2, 2),
            ConvexBody::ball(v(&[0.0, 0.0]), 1.0).unwrap(),
            RadiusFn::Const(1.0),
        )
        .unwrap();
        let pairs = sample_pairs(2, &SamplingSpec::new(1.0, 9));
        let r = check_modulus(&f, &hyp(10.0, OsgoodModulus::linear(1.0), 4.0), &pairs).unwrap();
        assert_eq!(r.violations, 0);
        assert_abs_diff_eq!(r.worst_ratio, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn doubling_violates_modulus_by_sixteen() {
        let r = check_modulus(
            &doubling(),
            &hyp(1.0, OsgoodModulus::linear(1.0), 4.0),
            &[(0.0, v(&[1.0, 0.0]), v(&[0.0, 0.5]))],
        )
        .unwrap();
        assert_eq!(r.violations, 1);
        assert_abs_diff_eq!(r.worst_ratio, 16.0, epsilon = 1e-9);
    }

    #[test]
    fn equal_states_give_zero() {
        let r = check_modulus(
            &doubling(),
            &hyp(1.0, OsgoodModulus::linear(1.0), 4.0),
            &[(0.0, v(&[1.0, 2.0]), v(&[1.0, 2.0]))],
        )
        .unwrap();
        assert_eq!(r.worst_ratio, 0.0);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn osgood_family_meets_declared_constants() {
        let (a, rad, p) = (1.5, 0.25, 4.0);
        let f = osgood_scalar(a, rad, p).unwrap();
        let h = hyp(a + rad, OsgoodModulus::loglinear(a.powf(p)), p);
        let spec = SamplingSpec::new(1.0, 21);
        let g = check_growth(&f, &h, &sample_points(1, &spec)).unwrap();
        assert_eq!(g.violations, 0, "{g:?}");
        let m = check_modulus(&f, &h, &sample_pairs(1, &spec)).unwrap();
        assert_eq!(m.violations, 0, "{m:?}");
    }

    #[test]
    fn invalid_hypotheses() {
        assert!(CoefficientHypotheses::new(0.0, OsgoodModulus::zero(), 4.0).is_err());
        assert!(CoefficientHypotheses::new(1.0, OsgoodModulus::zero(), 2.0).is_err());
        assert!(check_growth(&doubling(), &hyp(1.0, OsgoodModulus::zero(), 4.0), &[]).is_err());
    }
}
