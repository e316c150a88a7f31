use super::SchemeError;

/// Simulated trajectories on the grid `k·dt`, `k = 0..=steps`, together with
/// the selections that drove them.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub(crate) scenario_hash: u64,
    /// Tonelli index (lag `1/n`); `None` for lag-free schemes.
    pub(crate) n: Option<u64>,
    pub(crate) dt: f64,
    pub(crate) horizon: f64,
    pub(crate) steps: usize,
    pub(crate) paths: usize,
    pub(crate) de: usize,
    pub(crate) dh: usize,
    pub(crate) seed: u64,
    /// `paths × (steps + 1) × de`.
    pub(crate) trajectories: Vec<f64>,
    /// `paths × steps × de`; `f_k` selected at `(t_k, X_k)`.
    pub(crate) selections_f: Option<Vec<f64>>,
    /// `paths × steps × (de·dh)`.
    pub(crate) selections_g: Option<Vec<f64>>,
}

impl PathEnsemble {
    /// Wraps externally produced trajectories (no selections).
    #[allow(clippy::too_many_arguments)]
    pub fn from_trajectories(
        scenario_hash: u64,
        n: Option<u64>,
        dt: f64,
        horizon: f64,
        de: usize,
        dh: usize,
        seed: u64,
        trajectories: Vec<f64>,
    ) -> Result<Self, SchemeError> {
        let steps = crate::driver::grid_steps(horizon, dt)?;
        let per_path = (steps + 1) * de;
        if de == 0 || per_path == 0 || !trajectories.len().is_multiple_of(per_path) {
            return Err(SchemeError::Mismatch(format!(
                "{} values do not form whole paths of {} steps in R^{de}",
                trajectories.len(),
                steps
            )));
        }
        let paths = trajectories.len() / per_path;
        Ok(Self {
            scenario_hash,
            n,
            dt,
            horizon,
            steps,
            paths,
            de,
            dh,
            seed,
            trajectories,
            selections_f: None,
            selections_g: None,
        })
    }

    pub fn scenario_hash(&self) -> u64 {
        self.scenario_hash
    }

    pub fn n(&self) -> Option<u64> {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn de(&self) -> usize {
        self.de
    }

    pub fn dh(&self) -> usize {
        self.dh
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn trajectories(&self) -> &[f64] {
        &self.trajectories
    }

    /// The whole trajectory of path `p`, `(steps + 1) × de`.
    pub fn trajectory(&self, p: usize) -> &[f64] {
        let len = (self.steps + 1) * self.de;
        &self.trajectories[p * len..(p + 1) * len]
    }

    /// `X_p(t_k)`.
    pub fn state(&self, p: usize, k: usize) -> &[f64] {
        let off = (p * (self.steps + 1) + k) * self.de;
        &self.trajectories[off..off + self.de]
    }

    pub fn terminal(&self, p: usize) -> &[f64] {
        self.state(p, self.steps)
    }

    pub fn has_selections(&self) -> bool {
        self.selections_f.is_some() && self.selections_g.is_some()
    }

    pub fn selection_f(&self, p: usize, k: usize) -> Option<&[f64]> {
        let off = (p * self.steps + k) * self.de;
        self.selections_f.as_ref().map(|s| &s[off..off + self.de])
    }

    pub fn selection_g(&self, p: usize, k: usize) -> Option<&[f64]> {
        let w = self.de * self.dh;
        let off = (p * self.steps + k) * w;
        self.selections_g.as_ref().map(|s| &s[off..off + w])
    }

    /// Drops stored selections.
    pub fn without_selections(mut self) -> Self {
        self.selections_f = None;
        self.selections_g = None;
        self
    }

    /// Checks that two ensembles live on the same grid and paths.
    pub fn check_compatible(&self, other: &PathEnsemble) -> Result<(), SchemeError> {
        let same = self.dt == other.dt
            && self.steps == other.steps
            && self.paths == other.paths
            && self.de == other.de;
        if same {
            Ok(())
        } else {
            Err(SchemeError::Mismatch(format!(
                "grids differ: (dt {}, steps {}, paths {}, dE {}) vs (dt {}, steps {}, paths {}, dE {})",
                self.dt, self.steps, self.paths, self.de, other.dt, other.steps, other.paths, other.de
            )))
        }
    }
}
