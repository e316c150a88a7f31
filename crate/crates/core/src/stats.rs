//! Small, order-stable statistical reductions.

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated sum of `values` in iteration order.
pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Sample mean together with the standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Mean and standard error (`sd / sqrt(N)`, unbiased variance) of
    /// `samples`. Returns `None` for an empty slice.
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let n = samples.len() as f64;
        let mean = sum(samples.iter().copied()) / n;
        let std_error = if samples.len() > 1 {
            let ss = sum(samples.iter().map(|x| (x - mean) * (x - mean)));
            (ss / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        Some(Self {
            value: mean,
            std_error,
        })
    }

    /// Sample variance with the delta-method standard error
    /// `sqrt((m4 - s^4) / N)`.
    pub fn variance_of(samples: &[f64]) -> Option<Self> {
        if samples.len() < 2 {
            return None;
        }
        let n = samples.len() as f64;
        let mean = sum(samples.iter().copied()) / n;
        let var = sum(samples.iter().map(|x| (x - mean).powi(2))) / (n - 1.0);
        let m4 = sum(samples.iter().map(|x| (x - mean).powi(4))) / n;
        Some(Self {
            value: var,
            std_error: ((m4 - var * var).max(0.0) / n).sqrt(),
        })
    }
}

/// Nearest-rank empirical quantile (`q` in `[0, 1]`).
pub fn quantile(samples: &[f64], q: f64) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Some(sorted[rank - 1])
}
