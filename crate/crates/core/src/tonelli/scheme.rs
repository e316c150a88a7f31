use nalgebra::DVectorView;

use super::{InclusionScenario, PathEnsemble, SchemeError};
use crate::coefficients::{SelectionKey, Selector};
use crate::convexset::{distance_to_point, ConvexBody};
use crate::driver::{self, BrownianPath};
use crate::{map_indexed, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOptions {
    /// Keep `f_k, g_k` in the ensemble (needed by the residual).
    pub store_selections: bool,
    /// A state norm above this aborts the path.
    pub norm_cap: f64,
    /// Number of `(path, step)` positions whose selections are re-checked
    /// for membership after a run.
    pub spot_checks: usize,
    pub membership_tol: f64,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self {
            store_selections: true,
            norm_cap: 1e12,
            spot_checks: 8,
            membership_tol: 1e-6,
        }
    }
}

/// Where `phi_apply` takes its selections from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionSource {
    /// Select afresh along the input trajectories.
    Recompute,
    /// Reuse the selections stored in the input ensemble.
    Stored,
}

/// Number of grid steps in the lag `1/n`.
fn lag_steps(n: u64, dt: f64) -> Result<usize, SchemeError> {
    if n == 0 {
        return Err(SchemeError::Grid("Tonelli index n must be at least 1".into()));
    }
    let lag = 1.0 / n as f64;
    let l = (lag / dt).round();
    if l < 1.0 || (l * dt - lag).abs() > 1e-12 * lag {
        return Err(SchemeError::Grid(format!(
            "lag 1/{n} is not an integer multiple of dt = {dt}"
        )));
    }
    Ok(l as usize)
}

struct PathRun {
    traj: Vec<f64>,
    sel_f: Vec<f64>,
    sel_g: Vec<f64>,
}

struct Run<'a> {
    sc: &'a InclusionScenario,
    dt: f64,
    steps: usize,
    lag: usize,
    seed: u64,
    norm_cap: f64,
    single_valued: bool,
    input: Option<(&'a PathEnsemble, SelectionSource)>,
}

fn select(
    which: &'static str,
    body: ConvexBody,
    key: SelectionKey,
    single_valued: bool,
    selector: &Selector,
) -> Result<Vector, SchemeError> {
    if single_valued && !body.is_singleton() {
        return Err(SchemeError::NotSingleValued {
            which,
            path: key.path,
            step: key.step as usize,
        });
    }
    Ok(selector.select(&body, key)?)
}

impl Run<'_> {
    fn path(&self, p: usize) -> Result<PathRun, SchemeError> {
        let sc = self.sc;
        let (de, dh) = (sc.de, sc.dh);
        let w: BrownianPath = driver::generate(self.seed, p as u64, dh, sc.horizon, self.dt)?;
        let xi: Vector = match self.input {
            None => sc.xi.sample(self.seed, p as u64),
            Some((ens, _)) => Vector::from_column_slice(ens.state(p, 0)),
        };
        let s_dt = sc.op.exp_at(self.dt)?;
        let s_lag = sc.op.exp_at((self.lag + 1) as f64 * self.dt)?;

        let mut traj = Vec::with_capacity((self.steps + 1) * de);
        let mut sel_f = Vec::with_capacity(self.steps * de);
        let mut sel_g = Vec::with_capacity(self.steps * de * dh);
        traj.extend_from_slice(xi.as_slice());
        let mut x = xi.clone();
        for k in 0..self.steps {
            let t = k as f64 * self.dt;
            let key = |slot| SelectionKey {
                path: p as u64,
                step: k as u64,
                slot,
            };
            match self.input {
                Some((ens, SelectionSource::Stored)) => {
                    let (f, g) = ens
                        .selection_f(p, k)
                        .zip(ens.selection_g(p, k))
                        .ok_or(SchemeError::MissingSelections)?;
                    sel_f.extend_from_slice(f);
                    sel_g.extend_from_slice(g);
                }
                _ => {
                    let base = match self.input {
                        Some((ens, _)) => Vector::from_column_slice(ens.state(p, k)),
                        None => x.clone(),
                    };
                    let f = select("F", sc.f.eval(t, &base)?, key(0), self.single_valued, &sc.selector)?;
                    let g = select("G", sc.g.eval(t, &base)?, key(1), self.single_valued, &sc.selector)?;
                    sel_f.extend_from_slice(f.as_slice());
                    sel_g.extend_from_slice(g.as_slice());
                }
            }
            let next = if k < self.lag {
                xi.clone()
            } else {
                let j = k - self.lag;
                let f = DVectorView::from_slice(&sel_f[j * de..(j + 1) * de], de);
                let g = &sel_g[j * de * dh..(j + 1) * de * dh];
                let dw = w.increment(j);
                let mut kick = f * self.dt;
                for i in 0..de {
                    let row = &g[i * dh..(i + 1) * dh];
                    kick[i] += row.iter().zip(dw).map(|(a, b)| a * b).sum::<f64>();
                }
                &*s_dt * &x + &*s_lag * kick
            };
            let norm = next.norm();
            if !norm.is_finite() || norm > self.norm_cap {
                return Err(SchemeError::BlowUp {
                    path: p as u64,
                    step: k + 1,
                    norm,
                });
            }
            traj.extend_from_slice(next.as_slice());
            x = next;
        }
        Ok(PathRun { traj, sel_f, sel_g })
    }

    fn ensemble(&self, paths: usize, n: Option<u64>, store: bool) -> Result<PathEnsemble, SchemeError> {
        if paths == 0 {
            return Err(SchemeError::InvalidScenario("paths must be positive".into()));
        }
        let runs = map_indexed(paths, |p| self.path(p));
        let sc = self.sc;
        let mut out = PathEnsemble {
            scenario_hash: sc.hash,
            n,
            dt: self.dt,
            horizon: sc.horizon,
            steps: self.steps,
            paths,
            de: sc.de,
            dh: sc.dh,
            seed: self.seed,
            trajectories: Vec::with_capacity(paths * (self.steps + 1) * sc.de),
            selections_f: store.then(Vec::new),
            selections_g: store.then(Vec::new),
        };
        for run in runs {
            let run = run?;
            out.trajectories.extend_from_slice(&run.traj);
            if let (Some(f), Some(g)) = (out.selections_f.as_mut(), out.selections_g.as_mut()) {
                f.extend_from_slice(&run.sel_f);
                g.extend_from_slice(&run.sel_g);
            }
        }
        Ok(out)
    }
}

fn check_grid(sc: &InclusionScenario, dt: f64) -> Result<usize, SchemeError> {
    sc.validate()?;
    driver::grid_steps(sc.horizon, dt).map_err(|e| SchemeError::Grid(e.to_string()))
}

/// Re-derives a few stored selections and checks they lie in their value
/// sets. Positions are spread deterministically over paths and steps.
fn spot_check(sc: &InclusionScenario, ens: &PathEnsemble, checks: usize, tol: f64) -> Result<(), SchemeError> {
    if !ens.has_selections() || ens.steps == 0 {
        return Ok(());
    }
    for c in 0..checks {
        let p = (c * 7919) % ens.paths;
        let k = (c * 104_729 + c * c) % ens.steps;
        let t = ens.time(k);
        let x = Vector::from_column_slice(ens.state(p, k));
        let pairs: [(&'static str, ConvexBody, &[f64]); 2] = [
            ("F", sc.f.eval(t, &x)?, ens.selection_f(p, k).expect("stored")),
            ("G", sc.g.eval(t, &x)?, ens.selection_g(p, k).expect("stored")),
        ];
        for (which, body, s) in pairs {
            let r = distance_to_point(&body, &Vector::from_column_slice(s), tol)
                .map_err(crate::coefficients::CoefficientError::from)?
                .distance;
            if r > tol {
                return Err(SchemeError::Membership {
                    which,
                    path: p as u64,
                    step: k,
                    residual: r,
                });
            }
        }
    }
    Ok(())
}

/// Tonelli ensemble with lag `1/n` on the grid `dt`, paths `0..paths`.
pub fn tonelli_step_ensemble(
    sc: &InclusionScenario,
    n: u64,
    dt: f64,
    paths: usize,
    seed: u64,
    opts: &SchemeOptions,
) -> Result<PathEnsemble, SchemeError> {
    let steps = check_grid(sc, dt)?;
    let lag = lag_steps(n, dt)?;
    let run = Run {
        sc,
        dt,
        steps,
        lag,
        seed,
        norm_cap: opts.norm_cap,
        single_valued: false,
        input: None,
    };
    let ens = run.ensemble(paths, Some(n), true)?;
    spot_check(sc, &ens, opts.spot_checks, opts.membership_tol)?;
    Ok(if opts.store_selections {
        ens
    } else {
        ens.without_selections()
    })
}

/// Lag-free exponential Euler `X_{k+1} = S(dt)(X_k + f_k dt + g_k ΔW_k)` for
/// single-valued coefficients; errors on the first set-valued evaluation.
pub fn mild_euler_reference(
    sc: &InclusionScenario,
    dt: f64,
    paths: usize,
    seed: u64,
    opts: &SchemeOptions,
) -> Result<PathEnsemble, SchemeError> {
    let steps = check_grid(sc, dt)?;
    let run = Run {
        sc,
        dt,
        steps,
        lag: 0,
        seed,
        norm_cap: opts.norm_cap,
        single_valued: true,
        input: None,
    };
    run.ensemble(paths, None, opts.store_selections)
}

/// One application of `Φ` (`lag = None`) or `Φ_n` (`lag = Some(n)`) to an
/// ensemble: the mild convolution of selections taken along the input
/// trajectories, driven by the input's Brownian paths and started from its
/// initial values.
pub fn phi_apply(
    sc: &InclusionScenario,
    x: &PathEnsemble,
    lag: Option<u64>,
    source: SelectionSource,
) -> Result<PathEnsemble, SchemeError> {
    let steps = check_grid(sc, x.dt)?;
    if steps != x.steps || sc.de != x.de || sc.dh != x.dh || sc.horizon != x.horizon {
        return Err(SchemeError::Mismatch(format!(
            "ensemble grid (dt {}, steps {}, dE {}, dH {}) does not fit the scenario",
            x.dt, x.steps, x.de, x.dh
        )));
    }
    if source == SelectionSource::Stored && !x.has_selections() {
        return Err(SchemeError::MissingSelections);
    }
    let l = match lag {
        Some(n) => lag_steps(n, x.dt)?,
        None => 0,
    };
    let run = Run {
        sc,
        dt: x.dt,
        steps,
        lag: l,
        seed: x.seed,
        norm_cap: f64::INFINITY,
        single_valued: false,
        input: Some((x, source)),
    };
    run.ensemble(x.paths, lag, true)
}

/// Residual `Z(t_k) = Φ(X)(t_k) - X(t_k)` with the selections that produced
/// `X` (`paths × (steps + 1) × dE`).
pub fn residual_z(sc: &InclusionScenario, x: &PathEnsemble, source: SelectionSource) -> Result<Vec<f64>, SchemeError> {
    let y = phi_apply(sc, x, None, source)?;
    Ok(y.trajectories
        .iter()
        .zip(&x.trajectories)
        .map(|(a, b)| a - b)
        .collect())
}
