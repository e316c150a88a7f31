//! Seeded Brownian drivers on uniform grids.
//!
//! Increment `(step, coord)` of path `path_index` is Gaussian variate
//! `step·dH + coord` of the Brownian stream keyed by `(seed, path_index)`,
//! scaled by `sqrt(dt)`. Paths are therefore reproducible independently of
//! generation order, and a coarser path is obtained from a finer one by
//! exact block summation.

pub mod rng;

use thiserror::Error;

use rng::{GaussianStream, DOMAIN_BROWNIAN};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DriverError {
    #[error("step {dt} does not divide horizon {horizon}")]
    NonDivisibleGrid { horizon: f64, dt: f64 },
    #[error("coarse step {coarse} is not an integer multiple of the fine step {fine}")]
    NotMultiple { fine: f64, coarse: f64 },
    #[error("invalid driver parameter: {0}")]
    Invalid(String),
}

/// Number of grid steps `horizon / dt`, if it is an integer within
/// `1e-12` relative.
pub fn grid_steps(horizon: f64, dt: f64) -> Result<usize, DriverError> {
    if !(horizon > 0.0 && dt > 0.0 && horizon.is_finite() && dt.is_finite()) {
        return Err(DriverError::Invalid(format!(
            "horizon {horizon} and step {dt} must be positive"
        )));
    }
    let ratio = horizon / dt;
    let steps = ratio.round();
    if steps < 1.0 || (steps * dt - horizon).abs() > 1e-12 * horizon {
        return Err(DriverError::NonDivisibleGrid { horizon, dt });
    }
    Ok(steps as usize)
}

/// One Brownian trajectory on the grid `k·dt`, `k = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    dh: usize,
    horizon: f64,
    dt: f64,
    seed: u64,
    path_index: u64,
    /// `steps × dh`, row-major by step.
    increments: Vec<f64>,
    /// `(steps + 1) × dh` running sums in ascending step order.
    values: Vec<f64>,
}

/// Brownian path for `(seed, path_index)` with step `dt_fine`.
pub fn generate(
    seed: u64,
    path_index: u64,
    dh: usize,
    horizon: f64,
    dt_fine: f64,
) -> Result<BrownianPath, DriverError> {
    if dh == 0 {
        return Err(DriverError::Invalid("noise dimension must be positive".into()));
    }
    let steps = grid_steps(horizon, dt_fine)?;
    let scale = dt_fine.sqrt();
    let mut stream = GaussianStream::new(seed, DOMAIN_BROWNIAN, path_index);
    let increments: Vec<f64> = (0..steps * dh).map(|_| scale * stream.next_gaussian()).collect();
    let values = running_sums(&increments, dh, steps);
    Ok(BrownianPath {
        dh,
        horizon,
        dt: dt_fine,
        seed,
        path_index,
        increments,
        values,
    })
}

fn running_sums(increments: &[f64], dh: usize, steps: usize) -> Vec<f64> {
    let mut values = vec![0.0; (steps + 1) * dh];
    for k in 0..steps {
        for c in 0..dh {
            values[(k + 1) * dh + c] = values[k * dh + c] + increments[k * dh + c];
        }
    }
    values
}

impl BrownianPath {
    pub fn dh(&self) -> usize {
        self.dh
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    pub fn steps(&self) -> usize {
        self.increments.len() / self.dh
    }

    /// `W(t_{k+1}) - W(t_k)`.
    pub fn increment(&self, k: usize) -> &[f64] {
        &self.increments[k * self.dh..(k + 1) * self.dh]
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `W(t_k)`.
    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dh..(k + 1) * self.dh]
    }

    /// `W(T)`.
    pub fn terminal(&self) -> &[f64] {
        self.value(self.steps())
    }

    /// The same path observed on the coarser grid `dt_coarse`. Coarse
    /// increments are block sums in ascending step order; the coarse values
    /// are the fine values at coarse nodes, so `W(T)` is carried over
    /// bit-for-bit.
    pub fn restrict(&self, dt_coarse: f64) -> Result<BrownianPath, DriverError> {
        let ratio = dt_coarse / self.dt;
        let factor = ratio.round();
        if factor < 1.0 || (factor * self.dt - dt_coarse).abs() > 1e-12 * dt_coarse {
            return Err(DriverError::NotMultiple {
                fine: self.dt,
                coarse: dt_coarse,
            });
        }
        let factor = factor as usize;
        let steps = self.steps();
        if !steps.is_multiple_of(factor) {
            return Err(DriverError::NonDivisibleGrid {
                horizon: self.horizon,
                dt: dt_coarse,
            });
        }
        let coarse_steps = steps / factor;
        let dh = self.dh;
        let mut increments = vec![0.0; coarse_steps * dh];
        for j in 0..coarse_steps {
            for c in 0..dh {
                let mut acc = 0.0;
                for k in j * factor..(j + 1) * factor {
                    acc += self.increments[k * dh + c];
                }
                increments[j * dh + c] = acc;
            }
        }
        let mut values = Vec::with_capacity((coarse_steps + 1) * dh);
        for j in 0..=coarse_steps {
            values.extend_from_slice(self.value(j * factor));
        }
        Ok(BrownianPath {
            dh,
            horizon: self.horizon,
            dt: self.dt * factor as f64,
            seed: self.seed,
            path_index: self.path_index,
            increments,
            values,
        })
    }
}
