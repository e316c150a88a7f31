//! Comparison moduli `L(t, u)`.

use std::fmt;
use std::sync::Arc;

type ModulusFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Kind {
    Linear(f64),
    LogLinear(f64),
    Sqrt(f64),
    Zero,
    Custom(Arc<ModulusFn>),
}

/// `L(t, u)` for `u ≥ 0`.
#[derive(Clone)]
pub struct OsgoodModulus {
    kind: Kind,
    label: String,
}

impl fmt::Debug for OsgoodModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OsgoodModulus({})", self.label)
    }
}

impl PartialEq for OsgoodModulus {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (Kind::Linear(a), Kind::Linear(b))
            | (Kind::LogLinear(a), Kind::LogLinear(b))
            | (Kind::Sqrt(a), Kind::Sqrt(b)) => a == b,
            (Kind::Zero, Kind::Zero) => true,
            (Kind::Custom(a), Kind::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// Result of a finite-difference shape check on a grid of `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusShape {
    pub zero_at_origin: bool,
    pub nondecreasing: bool,
    pub convex: bool,
    /// Largest violation of convexity, `max(-Δ²L)` relative to the scale of L.
    pub convexity_defect: f64,
}

impl OsgoodModulus {
    /// `L(u) = C·u`.
    pub fn linear(c: f64) -> Self {
        Self {
            kind: Kind::Linear(c),
            label: format!("linear(C={c})"),
        }
    }

    /// `L(u) = C·u(1 - ln u)` for `u < 1`, `C·u` for `u ≥ 1`.
    pub fn loglinear(c: f64) -> Self {
        Self {
            kind: Kind::LogLinear(c),
            label: format!("loglinear(C={c})"),
        }
    }

    /// `L(u) = C·√u`; not an Osgood modulus.
    pub fn sqrt(c: f64) -> Self {
        Self {
            kind: Kind::Sqrt(c),
            label: format!("sqrt(C={c})"),
        }
    }

    pub fn zero() -> Self {
        Self {
            kind: Kind::Zero,
            label: "zero".into(),
        }
    }

    pub fn from_fn(label: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            kind: Kind::Custom(Arc::new(f)),
            label: label.into(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Constant of the built-in kinds (`None` for custom and zero).
    pub fn constant(&self) -> Option<f64> {
        match self.kind {
            Kind::Linear(c) | Kind::LogLinear(c) | Kind::Sqrt(c) => Some(c),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64, u: f64) -> f64 {
        let u = u.max(0.0);
        match &self.kind {
            Kind::Linear(c) => c * u,
            Kind::LogLinear(c) => {
                if u == 0.0 {
                    0.0
                } else if u < 1.0 {
                    c * u * (1.0 - u.ln())
                } else {
                    c * u
                }
            }
            Kind::Sqrt(c) => c * u.sqrt(),
            Kind::Zero => 0.0,
            Kind::Custom(f) => f(t, u),
        }
    }

    /// Finite-difference check of `L(t, 0) = 0`, monotonicity and convexity
    /// of `L(t, ·)` on `[0, u_max]` with `grid` intervals, for each `t` in
    /// `times`.
    pub fn shape(&self, times: &[f64], u_max: f64, grid: usize) -> ModulusShape {
        let mut out = ModulusShape {
            zero_at_origin: true,
            nondecreasing: true,
            convex: true,
            convexity_defect: 0.0,
        };
        let h = u_max / grid as f64;
        for &t in times {
            let vals: Vec<f64> = (0..=grid).map(|k| self.eval(t, k as f64 * h)).collect();
            let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            if vals[0].abs() > 1e-14 * scale {
                out.zero_at_origin = false;
            }
            for w in vals.windows(2) {
                if w[1] < w[0] - 1e-12 * scale {
                    out.nondecreasing = false;
                }
            }
            for w in vals.windows(3) {
                let second = w[2] - 2.0 * w[1] + w[0];
                let defect = -second / scale;
                if defect > 1e-12 {
                    out.convex = false;
                    out.convexity_defect = out.convexity_defect.max(defect);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(OsgoodModulus::linear(2.0).eval(0.0, 3.0), 6.0);
        let ll = OsgoodModulus::loglinear(1.0);
        assert_eq!(ll.eval(0.0, 0.0), 0.0);
        assert!((ll.eval(0.0, (-1.0f64).exp()) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(ll.eval(0.0, 4.0), 4.0);
        assert_eq!(OsgoodModulus::sqrt(3.0).eval(0.0, 4.0), 6.0);
        assert_eq!(OsgoodModulus::zero().eval(1.0, 5.0), 0.0);
    }

    #[test]
    fn loglinear_is_continuous_at_one() {
        let ll = OsgoodModulus::loglinear(1.5);
        assert!((ll.eval(0.0, 1.0 - 1e-12) - ll.eval(0.0, 1.0)).abs() < 1e-11);
    }

    #[test]
    fn shapes() {
        let times = [0.0, 1.0];
        let lin = OsgoodModulus::linear(2.0).shape(&times, 4.0, 400);
        assert!(lin.zero_at_origin && lin.nondecreasing && lin.convex);
        // u(1 - ln u) and √u are concave near 0.
        let ll = OsgoodModulus::loglinear(1.0).shape(&times, 4.0, 400);
        assert!(ll.zero_at_origin && ll.nondecreasing && !ll.convex);
        let sq = OsgoodModulus::sqrt(1.0).shape(&times, 4.0, 400);
        assert!(sq.nondecreasing && !sq.convex);
        let shifted = OsgoodModulus::from_fn("1+u", |_, u| 1.0 + u).shape(&times, 1.0, 10);
        assert!(!shifted.zero_at_origin);
        let dec = OsgoodModulus::from_fn("-u", |_, u| -u).shape(&times, 1.0, 10);
        assert!(!dec.nondecreasing);
    }
}
