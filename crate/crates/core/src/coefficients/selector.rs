//! Selections `(t, x) ↦ σ(F(t, x)) ∈ F(t, x)`.
//!
//! - `Steiner`: the Steiner point, Lipschitz in the Hausdorff metric, so the
//!   selection inherits the regularity of `F`;
//! - `Support(u)`: the (lexicographically tie-broken) maximiser of `⟨·, u⟩`;
//! - `VertexRandom`: the maximiser in a direction drawn from a counter-based
//!   stream keyed by `(seed, path, slot, step)`, so concurrent evaluation
//!   stays deterministic.
//!
//! Singleton values are returned as-is under every rule.

use rand_core::RngCore;

use super::{CoefficientError, MultiMap};
use crate::convexset::{distance_to_point, steiner_point, ConvexBody, Direction, QuadratureSpec};
use crate::driver::rng::{keyed, standard_normal_pair, DOMAIN_SELECTION};
use crate::Vector;

#[derive(Debug, Clone, PartialEq)]
pub enum SelectorRule {
    Steiner,
    Support(Direction),
    VertexRandom { seed: u64 },
}

/// Identifies one selection within a simulation: the path, the grid step,
/// and which coefficient (`slot` 0 for drift, 1 for diffusion).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SelectionKey {
    pub path: u64,
    pub step: u64,
    pub slot: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selector {
    pub rule: SelectorRule,
    pub quad: QuadratureSpec,
}

impl Selector {
    pub fn new(rule: SelectorRule, quad: QuadratureSpec) -> Self {
        Self { rule, quad }
    }

    pub fn steiner() -> Self {
        Self::new(SelectorRule::Steiner, QuadratureSpec::default())
    }

    /// Rejects a `Support` direction whose dimension differs from `dim`.
    pub fn validate(&self, dim: usize) -> Result<(), CoefficientError> {
        match &self.rule {
            SelectorRule::Support(u) if u.dim() != dim => Err(CoefficientError::DimensionMismatch {
                what: "selector direction",
                expected: dim,
                found: u.dim(),
            }),
            _ => Ok(()),
        }
    }

    pub fn select(&self, body: &ConvexBody, key: SelectionKey) -> Result<Vector, CoefficientError> {
        let d = body.dim();
        if body.is_singleton() {
            let mut e = vec![0.0; d];
            e[0] = 1.0;
            return Ok(body.maximizer(&e));
        }
        match &self.rule {
            SelectorRule::Steiner => Ok(steiner_point(body, &self.quad)?),
            SelectorRule::Support(u) => Ok(body.support_point(u)?),
            SelectorRule::VertexRandom { seed } => {
                let mut rng = keyed(*seed, DOMAIN_SELECTION, key.path.wrapping_mul(2).wrapping_add(key.slot));
                let pairs = d.div_ceil(2) as u128;
                rng.set_word_pos(u128::from(key.step) * pairs * 4);
                let mut u = Vec::with_capacity(d + 1);
                while u.len() < d {
                    let (a, b) = standard_normal_pair(&mut rng);
                    u.push(a);
                    u.push(b);
                }
                u.truncate(d);
                // Probability zero, but keep the rule total.
                if u.iter().all(|v| *v == 0.0) {
                    u[0] = 1.0;
                    let _ = rng.next_u64();
                }
                Ok(body.maximizer(&u))
            }
        }
    }
}

/// The selection `(t, x, key) ↦ σ(F(t, x))` as a closure.
pub fn caratheodory_selector(
    f: &MultiMap,
    selector: Selector,
) -> Result<impl Fn(f64, &Vector, SelectionKey) -> Result<Vector, CoefficientError>, CoefficientError> {
    selector.validate(f.codomain_dim())?;
    let f = f.clone();
    Ok(move |t: f64, x: &Vector, key: SelectionKey| selector.select(&f.eval(t, x)?, key))
}

/// Worst distance from the selection to the value set over `samples`;
/// errors if it exceeds `tol`.
pub fn certify_selector(
    f: &MultiMap,
    selector: &Selector,
    samples: &[(f64, Vector)],
    tol: f64,
) -> Result<f64, CoefficientError> {
    let mut worst = 0.0_f64;
    for (i, (t, x)) in samples.iter().enumerate() {
        let k = f.eval(*t, x)?;
        let s = selector.select(
            &k,
            SelectionKey {
                path: 0,
                step: i as u64,
                slot: 0,
            },
        )?;
        let r = distance_to_point(&k, &s, tol)?.distance;
        if r > tol {
            return Err(CoefficientError::Membership {
                residual: r,
                tol,
                t: *t,
            });
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{constant, sample_points, tube, RadiusFn, SamplingSpec};
    use crate::Matrix;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn triangle() -> ConvexBody {
        ConvexBody::hull(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap()
    }

    #[test]
    fn steiner_of_moving_ball_is_the_centre() {
        let f = tube(
            v(&[0.0, 0.0]),
            Matrix::identity(2, 2),
            ConvexBody::ball(v(&[0.0, 0.0]), 1.0).unwrap(),
            RadiusFn::Const(1.0),
        )
        .unwrap();
        let sel = caratheodory_selector(&f, Selector::steiner()).unwrap();
        let x = v(&[0.3, -2.0]);
        assert_eq!(sel(0.0, &x, SelectionKey::default()).unwrap(), x);
    }

    #[test]
    fn steiner_of_constant_triangle() {
        let f = constant(2, triangle());
        let sel = caratheodory_selector(&f, Selector::steiner()).unwrap();
        let s = sel(0.4, &v(&[9.0, 9.0]), SelectionKey::default()).unwrap();
        assert_abs_diff_eq!(s[0], 0.375, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1], 0.375, epsilon = 1e-15);
    }

    #[test]
    fn singleton_ignores_the_rule() {
        let f = MultiMap::from_fn(2, 2, "a", |t, x| ConvexBody::point(x * t).unwrap());
        let x = v(&[1.0, 2.0]);
        for rule in [
            SelectorRule::Steiner,
            SelectorRule::Support(Direction::new(v(&[0.0, 1.0])).unwrap()),
            SelectorRule::VertexRandom { seed: 4 },
        ] {
            let sel = caratheodory_selector(&f, Selector::new(rule, QuadratureSpec::default())).unwrap();
            assert_eq!(sel(2.0, &x, SelectionKey::default()).unwrap(), v(&[2.0, 4.0]));
        }
    }

    #[test]
    fn vertex_random_is_keyed() {
        let sel = Selector::new(SelectorRule::VertexRandom { seed: 1 }, QuadratureSpec::default());
        let k = triangle();
        let picks: Vec<Vector> = (0..64)
            .map(|step| sel.select(&k, SelectionKey { path: 3, step, slot: 0 }).unwrap())
            .collect();
        let again = sel.select(&k, SelectionKey { path: 3, step: 17, slot: 0 }).unwrap();
        assert_eq!(again, picks[17]);
        // All three vertices are reached.
        for vert in [v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])] {
            assert!(picks.contains(&vert));
        }
    }

    #[test]
    fn support_rule_dimension_is_checked() {
        let f = constant(2, triangle());
        let rule = SelectorRule::Support(Direction::new(v(&[1.0, 0.0, 0.0])).unwrap());
        assert!(caratheodory_selector(&f, Selector::new(rule, QuadratureSpec::default())).is_err());
    }

    #[test]
    fn certified_membership_for_all_rules() {
        let hull3 = ConvexBody::hull(vec![
            v(&[0.0, 0.0, 0.0]),
            v(&[1.0, 0.0, 0.0]),
            v(&[0.0, 1.0, 0.0]),
            v(&[0.0, 0.0, 1.0]),
        ])
        .unwrap();
        let f = tube(v(&[0.0, 0.0, 0.0]), Matrix::identity(3, 3) * 0.5, hull3, RadiusFn::Const(2.0)).unwrap();
        let samples = sample_points(3, &SamplingSpec { samples: 20, ..SamplingSpec::new(1.0, 2) });
        for rule in [
            SelectorRule::Steiner,
            SelectorRule::Support(Direction::normalize(v(&[1.0, 1.0, 0.0])).unwrap()),
            SelectorRule::VertexRandom { seed: 5 },
        ] {
            let worst =
                certify_selector(&f, &Selector::new(rule, QuadratureSpec::default()), &samples, 1e-6).unwrap();
            assert!(worst <= 1e-6);
        }
    }
}
