//! Statistical checks on path ensembles: sup-moments and the Gronwall
//! bound, the stochastic-convolution constant, the Aldous increment
//! statistic, bounded-Lipschitz distances, a covering proxy for
//! noncompactness, and residual summaries.
//!
//! Every statistic is a reduction over immutable ensembles in ascending path
//! order, so results do not depend on the worker count.

mod aldous;
mod bl;
mod convolution;
mod moments;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use aldous::{aldous_statistic, AldousRow};
pub use bl::{bl_distance, bl_distance_with_dictionary, noncompactness_proxy, sup_distance, BlEstimate, CoveringCurve};
pub use convolution::{
    convolution_inequality_check, homogeneity_ratios, ConvolutionFit, ConvolutionRow, StepProcess, STABILITY_FACTOR,
};
pub use moments::{
    gronwall_check, integrated_moment, residual_exceedance, residual_row, sup_moment, GronwallCheck, ResidualRow,
};

use crate::driver::DriverError;
use crate::semigroup::SemigroupError;
use crate::stats::Estimate;
use crate::tonelli::SchemeError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("empty ensemble")]
    Empty,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("ensembles do not match: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("report: {0}")]
    Report(String),
}

/// A named pass/fail judgement with the number it was decided on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallEntry {
    pub n: u64,
    pub check: GronwallCheck,
}

/// BL distances between consecutive or arbitrary rungs of the `n`-ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlMatrix {
    pub ladder: Vec<u64>,
    /// Symmetric, zero diagonal.
    pub values: Vec<Vec<f64>>,
}

/// Everything a convergence study reports. Sections left empty were not
/// computed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub scenario_hash: u64,
    pub p: f64,
    /// Sup-moment per ladder rung.
    pub sup_moment_p: Vec<(u64, Estimate)>,
    pub gronwall: Vec<GronwallEntry>,
    pub conv_constant_fit: Option<ConvolutionFit>,
    pub aldous_table: Vec<AldousRow>,
    pub bl_matrix: Option<BlMatrix>,
    pub residual_table: Vec<ResidualRow>,
    pub covering: Option<CoveringCurve>,
    pub verdicts: Vec<Verdict>,
}

pub const REPORT_CSV_HEADER: &str = "metric,param,value,std_error";

impl DiagnosticsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, DiagnosticsError> {
        serde_json::from_str(text).map_err(|e| DiagnosticsError::Report(e.to_string()))
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// Long-format CSV under [`REPORT_CSV_HEADER`]; empty `std_error` where
    /// none applies.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# scenario {:016x}", self.scenario_hash);
        s.push_str(REPORT_CSV_HEADER);
        s.push('\n');
        let mut row = |metric: &str, param: String, value: f64, se: Option<f64>| {
            let se = se.map(|e| format!("{e:e}")).unwrap_or_default();
            let _ = writeln!(s, "{metric},{param},{value:e},{se}");
        };
        for (n, e) in &self.sup_moment_p {
            row("sup_moment_p", format!("n={n}"), e.value, Some(e.std_error));
        }
        for g in &self.gronwall {
            row("gronwall_empirical", format!("n={}", g.n), g.check.empirical.value, Some(g.check.empirical.std_error));
            row("gronwall_log_bound", format!("n={}", g.n), g.check.log_bound, None);
        }
        if let Some(c) = &self.conv_constant_fit {
            for r in &c.rows {
                row("conv_lhs", format!("t={}", r.t), r.lhs.value, Some(r.lhs.std_error));
            }
            row("conv_constant_fit", format!("p={}", c.p), c.fit_cp, None);
            row("conv_spread", format!("p={}", c.p), c.spread, None);
        }
        for a in &self.aldous_table {
            row("aldous", format!("delta={}", a.delta), a.value, None);
        }
        if let Some(m) = &self.bl_matrix {
            for (i, a) in m.ladder.iter().enumerate() {
                for (j, b) in m.ladder.iter().enumerate().skip(i + 1) {
                    row("bl", format!("{a}-{b}"), m.values[i][j], None);
                }
            }
        }
        for r in &self.residual_table {
            row("residual_mean", format!("n={}", r.n), r.mean, Some(r.std_error));
            row("residual_p90", format!("n={}", r.n), r.p90, None);
        }
        if let Some(c) = &self.covering {
            for (eps, u) in c.radii.iter().zip(&c.pooled) {
                row("uncovered_pooled", format!("eps={eps}"), *u, None);
            }
        }
        for v in &self.verdicts {
            row("verdict", v.name.clone(), if v.pass { 1.0 } else { 0.0 }, None);
        }
        s
    }
}
