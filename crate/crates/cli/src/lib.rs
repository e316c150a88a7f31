//! The `sdinc` command surface.
//!
//! ```text
//! sdinc --config <file> [--seed <u64>] [--threads <n>] [--out <dir>] simulate
//! sdinc --config <file> ... convergence
//! sdinc --config <file> ... verify
//! sdinc [--out <dir>] plotdata <report.json | ensemble_<n>.bin>
//! ```
//!
//! Exit codes: 0 success, 2 configuration error, 3 simulation blow-up,
//! 4 I/O failure, 5 a hypothesis check failed.
//!
//! Every command can also be called as a library function on a parsed
//! [`ScenarioConfig`]; the binary is a thin wrapper around [`main_with`].

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use sdinc::coefficients::{
    check_growth, check_modulus, osgood_iterate, sample_pairs, sample_points, OsgoodVerdict,
};
use sdinc::config::{fmt_f64, ScenarioConfig};
use sdinc::diagnostics::{
    aldous_statistic, bl_distance, convolution_inequality_check, gronwall_check, noncompactness_proxy,
    residual_exceedance, residual_row, sup_moment, BlMatrix, DiagnosticsReport, GronwallEntry, StepProcess,
    Verdict,
};
use sdinc::io::{self, csv_text, IoError};
use sdinc::semigroup::operator_norm;
use sdinc::stats::Estimate;
use sdinc::tonelli::{residual_z, tonelli_step_ensemble, PathEnsemble, SchemeError, SelectionSource};
use sdinc::{Matrix, Vector};

pub const SUMMARY_HEADER: &str = "n,component,mean,mean_se,var,var_se";
pub const CONVERGENCE_HEADER: &str = "n,dt,paths,seed,res_mean,res_p90,bl_to_prev,sup_moment_p";
pub const HYPOTHESES_HEADER: &str = "hypothesis,check,statistic,threshold,verdict";

#[derive(Debug, Parser)]
#[command(name = "sdinc", version, about = "Simulate and check stochastic differential inclusions")]
pub struct Cli {
    /// Scenario file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the scheme seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory (overrides `[output] dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the scheme for every n of the ladder; write ensembles and summary.csv.
    Simulate,
    /// Residuals, law distances and moment bounds down the ladder.
    Convergence,
    /// Check the hypotheses on the coefficients and the generator.
    Verify,
    /// Turn a report or an ensemble file into plot-ready .dat files.
    Plotdata {
        /// `report.json` or an ensemble `.bin` file.
        input: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    BlowUp(String),
    Io(String),
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::BlowUp(_) => 3,
            CliError::Io(_) => 4,
            CliError::Verify(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::BlowUp(m) => write!(f, "simulation failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Verify(m) => write!(f, "hypothesis check failed: {m}"),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Io(e.to_string())
    }
}

fn scheme_err(e: SchemeError) -> CliError {
    match e {
        SchemeError::InvalidScenario(_) | SchemeError::Grid(_) => CliError::Config(e.to_string()),
        other => CliError::BlowUp(other.to_string()),
    }
}

fn diag_err(e: sdinc::diagnostics::DiagnosticsError) -> CliError {
    CliError::BlowUp(e.to_string())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn num(x: f64) -> String {
    fmt_f64(x)
}

// ------------------------------------------------------------------ simulate

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: u64,
    pub component: usize,
    pub mean: Estimate,
    pub var: Estimate,
}

/// Runs every rung of the ladder; returns the ensembles and the terminal
/// mean/variance per component.
pub fn simulate(cfg: &ScenarioConfig, out: &Path) -> Result<(Vec<PathEnsemble>, Vec<SummaryRow>), CliError> {
    let sc = cfg.build().map_err(|e| CliError::Config(e.to_string()))?;
    ensure_dir(out)?;
    let opts = cfg.scheme_options();
    let mut ensembles = Vec::new();
    let mut rows = Vec::new();
    for &n in &cfg.scheme.n_ladder {
        let x = tonelli_step_ensemble(&sc, n, cfg.scheme.dt, cfg.scheme.paths, cfg.scheme.seed, &opts)
            .map_err(scheme_err)?;
        if cfg.output.write_ensembles {
            io::write_ensemble(&out.join(format!("ensemble_{n}.bin")), &x)?;
        }
        for c in 0..x.de() {
            let xs: Vec<f64> = (0..x.paths()).map(|p| x.terminal(p)[c]).collect();
            let mean = Estimate::from_samples(&xs).expect("paths ≥ 1");
            let var = Estimate::variance_of(&xs).unwrap_or(Estimate {
                value: 0.0,
                std_error: 0.0,
            });
            rows.push(SummaryRow { n, component: c, mean, var });
        }
        ensembles.push(x);
    }
    let lines: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{}",
                r.n,
                r.component,
                num(r.mean.value),
                num(r.mean.std_error),
                num(r.var.value),
                num(r.var.std_error)
            )
        })
        .collect();
    io::write_text(&out.join("summary.csv"), &csv_text(sc.hash, SUMMARY_HEADER, &lines))?;
    Ok((ensembles, rows))
}

// --------------------------------------------------------------- convergence

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: u64,
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
    pub res_mean: f64,
    pub res_p90: f64,
    pub bl_to_prev: Option<f64>,
    pub sup_moment_p: f64,
}

/// Step integrand for the convolution fit: `G`'s matrix at the mean initial
/// state, or a uniform unit-norm matrix when that vanishes.
fn conv_integrand(cfg: &ScenarioConfig) -> Matrix {
    let (de, dh) = (cfg.space.de, cfg.space.dh);
    let g = cfg
        .coefficients
        .g
        .matrix_fn()
        .build()
        .eval(&Vector::from_column_slice(cfg.coefficients.xi.mean()));
    if g.norm() > 0.0 {
        g
    } else {
        Matrix::from_element(de, dh, 1.0 / ((de * dh) as f64).sqrt())
    }
}

/// Grid for the convolution fit: the coarsest refinement of `dt` on which
/// `T/8` is a grid point.
fn conv_dt(horizon: f64, dt: f64) -> f64 {
    let m = (horizon / 8.0 / dt * (1.0 - 1e-12)).ceil().max(1.0);
    horizon / (8.0 * m)
}

pub fn convergence(cfg: &ScenarioConfig, out: &Path) -> Result<(Vec<ConvergenceRow>, DiagnosticsReport), CliError> {
    let sc = cfg.build().map_err(|e| CliError::Config(e.to_string()))?;
    ensure_dir(out)?;
    let s = &cfg.scheme;
    let d = &cfg.diagnostics;
    let p = cfg.coefficients.p;
    let opts = cfg.scheme_options();
    let t = cfg.space.horizon;

    let mut report = DiagnosticsReport {
        scenario_hash: sc.hash,
        p,
        ..Default::default()
    };

    let ladder_t = [t / 8.0, t / 4.0, t / 2.0, t];
    let fit = convolution_inequality_check(
        &sc.op,
        &StepProcess::constant(conv_integrand(cfg)),
        p,
        &ladder_t,
        d.conv_paths,
        s.seed,
        conv_dt(t, s.dt),
    )
    .map_err(diag_err)?;
    let c_conv = fit.fit_cp;

    let mut ensembles = Vec::new();
    let mut exceedance = Vec::new();
    for &n in &s.n_ladder {
        let x = tonelli_step_ensemble(&sc, n, s.dt, s.paths, s.seed, &opts).map_err(scheme_err)?;
        let source = if x.has_selections() {
            SelectionSource::Stored
        } else {
            SelectionSource::Recompute
        };
        let z = residual_z(&sc, &x, source).map_err(scheme_err)?;
        report.residual_table.push(residual_row(n, &x, &z).map_err(diag_err)?);
        exceedance.push(residual_exceedance(&x, &z, d.residual_eps));
        report.sup_moment_p.push((n, sup_moment(&x, p).map_err(diag_err)?));
        report.gronwall.push(GronwallEntry {
            n,
            check: gronwall_check(&sc, &x, c_conv, d.gronwall_slack).map_err(diag_err)?,
        });
        ensembles.push(x.without_selections());
    }

    let k = ensembles.len();
    let mut bl = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let v = bl_distance(&ensembles[i], &ensembles[j], d.bl_anchors, s.seed)
                .map_err(diag_err)?
                .value;
            bl[i][j] = v;
            bl[j][i] = v;
        }
    }
    let last = ensembles.last().expect("ladder is nonempty");
    report.aldous_table = aldous_statistic(last, &d.aldous_deltas, d.aldous_eta).map_err(diag_err)?;
    let refs: Vec<&PathEnsemble> = ensembles.iter().collect();
    report.covering = Some(noncompactness_proxy(&refs, &d.cover_radii, d.cover_anchors).map_err(diag_err)?);
    report.bl_matrix = Some(BlMatrix {
        ladder: s.n_ladder.clone(),
        values: bl.clone(),
    });

    let rows: Vec<ConvergenceRow> = (0..k)
        .map(|i| ConvergenceRow {
            n: s.n_ladder[i],
            dt: s.dt,
            paths: s.paths,
            seed: s.seed,
            res_mean: report.residual_table[i].mean,
            res_p90: report.residual_table[i].p90,
            bl_to_prev: (i > 0).then(|| bl[i - 1][i]),
            sup_moment_p: report.sup_moment_p[i].1.value,
        })
        .collect();

    // Verdicts.
    if k > 1 {
        let rises = rows.windows(2).filter(|w| w[1].res_mean.partial_cmp(&w[0].res_mean) != Some(std::cmp::Ordering::Less)).count();
        report.verdicts.push(Verdict {
            name: "residual_mean_decreasing".into(),
            statistic: rises as f64,
            threshold: 0.0,
            pass: rises == 0,
        });
        let rises = exceedance.windows(2).filter(|w| w[1] > w[0]).count();
        report.verdicts.push(Verdict {
            name: format!("residual_exceedance_nonincreasing(eps={})", num(d.residual_eps)),
            statistic: rises as f64,
            threshold: 0.0,
            pass: rises == 0,
        });
    }
    for g in &report.gronwall {
        report.verdicts.push(Verdict {
            name: format!("gronwall(n={})", g.n),
            statistic: g.check.empirical.value.ln(),
            threshold: d.gronwall_slack.ln() + g.check.log_bound,
            pass: g.check.holds,
        });
    }
    report.verdicts.push(Verdict {
        name: "convolution_constant_stable".into(),
        statistic: fit.spread,
        threshold: sdinc::diagnostics::STABILITY_FACTOR,
        pass: fit.stable,
    });
    report.conv_constant_fit = Some(fit);

    let lines: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{}",
                r.n,
                num(r.dt),
                r.paths,
                r.seed,
                num(r.res_mean),
                num(r.res_p90),
                r.bl_to_prev.map(num).unwrap_or_default(),
                num(r.sup_moment_p)
            )
        })
        .collect();
    io::write_text(&out.join("convergence.csv"), &csv_text(sc.hash, CONVERGENCE_HEADER, &lines))?;
    io::write_text(&out.join("report.csv"), &report.to_csv())?;
    io::write_text(&out.join("report.json"), &report.to_json())?;
    Ok((rows, report))
}

// -------------------------------------------------------------------- verify

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisRow {
    pub hypothesis: &'static str,
    pub check: String,
    pub statistic: f64,
    pub threshold: f64,
    /// `pass`, `fail`, `warn` (advisory), or the Osgood verdict.
    pub verdict: String,
}

impl HypothesisRow {
    pub fn passed(&self) -> bool {
        matches!(self.verdict.as_str(), "pass" | "warn" | "osgood_pass")
    }
}

fn pass_fail(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

/// Runs every check and writes `hypotheses.csv`. Failing checks are reported
/// in the rows, not as an error.
pub fn verify(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<HypothesisRow>, CliError> {
    let sc = cfg.build().map_err(|e| CliError::Config(e.to_string()))?;
    ensure_dir(out)?;
    let coef = |e: sdinc::coefficients::CoefficientError| CliError::Config(e.to_string());
    let t = cfg.space.horizon;
    let mut rows = Vec::new();

    // Generator: the fitted envelope dominates ‖S(t)‖ on a grid finer than
    // the fitting grid.
    let env = sc
        .op
        .growth_envelope(t, cfg.operator.envelope_grid)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let fine = 10 * cfg.operator.envelope_grid;
    let mut worst = 0.0_f64;
    for j in 0..=fine {
        let s = t * j as f64 / fine as f64;
        let m = sc.op.exp_at(s).map_err(|e| CliError::Config(e.to_string()))?;
        worst = worst.max(operator_norm(&m) / env.bound(s));
    }
    rows.push(HypothesisRow {
        hypothesis: "generator",
        check: format!("growth_envelope(M={},omega={})", num(env.m), num(env.omega)),
        statistic: worst,
        threshold: 1.0,
        verdict: pass_fail(worst <= 1.0 + 1e-9),
    });

    let spec = cfg.sampling_spec();
    let points = sample_points(sc.de, &spec);
    let pairs = sample_pairs(sc.de, &spec);
    for (name, map) in [("F", &sc.f), ("G", &sc.g)] {
        let g = check_growth(map, &sc.hyp, &points).map_err(coef)?;
        rows.push(HypothesisRow {
            hypothesis: "growth",
            check: format!("check_growth({name})"),
            statistic: g.worst_ratio,
            threshold: 1.0,
            verdict: pass_fail(g.violations == 0),
        });
    }
    for (name, map) in [("F", &sc.f), ("G", &sc.g)] {
        let m = check_modulus(map, &sc.hyp, &pairs).map_err(coef)?;
        rows.push(HypothesisRow {
            hypothesis: "modulus",
            check: format!("check_modulus({name})"),
            statistic: m.worst_ratio,
            threshold: 1.0,
            verdict: pass_fail(m.violations == 0),
        });
    }
    let u_max = (2.0 * spec.half_width * (sc.de as f64).sqrt()).powf(sc.hyp.p);
    let shape = sc.hyp.modulus.shape(&[0.0, t / 2.0, t], u_max, 400);
    let ok = shape.zero_at_origin && shape.nondecreasing;
    rows.push(HypothesisRow {
        hypothesis: "modulus",
        check: format!("shape({})", sc.hyp.modulus.label()),
        statistic: if ok { 1.0 } else { 0.0 },
        threshold: 1.0,
        verdict: pass_fail(ok),
    });
    rows.push(HypothesisRow {
        hypothesis: "modulus",
        check: "convexity(advisory)".into(),
        statistic: shape.convexity_defect,
        threshold: 0.0,
        verdict: if shape.convex { "pass" } else { "warn" }.into(),
    });

    let d = &cfg.diagnostics;
    let o = osgood_iterate(&sc.hyp.modulus, d.osgood_k, t, d.osgood_r0, d.osgood_grid, d.osgood_iters).map_err(coef)?;
    if let Some(note) = &o.note {
        eprintln!("note: {note}");
    }
    rows.push(HypothesisRow {
        hypothesis: "osgood",
        check: format!("osgood_iterate(k={},iters={})", num(d.osgood_k), d.osgood_iters),
        statistic: o.limit_sup,
        threshold: 1e-8 * o.r0,
        verdict: match o.verdict {
            OsgoodVerdict::OsgoodPass => "osgood_pass",
            OsgoodVerdict::OsgoodFail => "osgood_fail",
            OsgoodVerdict::Inconclusive => "inconclusive",
        }
        .into(),
    });

    let xs: Vec<f64> = (0..d.samples as u64)
        .map(|i| sc.xi.sample(cfg.scheme.seed, i).norm().powf(sc.hyp.p))
        .collect();
    let m = Estimate::from_samples(&xs).expect("samples ≥ 1").value;
    rows.push(HypothesisRow {
        hypothesis: "initial",
        check: "p_moment".into(),
        statistic: m,
        threshold: f64::INFINITY,
        verdict: pass_fail(m.is_finite()),
    });

    let lines: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{}",
                r.hypothesis,
                r.check.replace(',', ";"),
                num(r.statistic),
                num(r.threshold),
                r.verdict
            )
        })
        .collect();
    io::write_text(&out.join("hypotheses.csv"), &csv_text(sc.hash, HYPOTHESES_HEADER, &lines))?;
    Ok(rows)
}

// ------------------------------------------------------------------ plotdata

fn dat(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = format!("# {header}\n");
    for r in rows {
        let cols: Vec<String> = r.into_iter().map(num).collect();
        let _ = writeln!(s, "{}", cols.join(" "));
    }
    s
}

/// Writes `.dat` files for every non-empty section of a report, or the
/// mean state norm of an ensemble. Returns the files written.
pub fn plotdata(input: &Path, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let bytes = std::fs::read(input).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    ensure_dir(out)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, text: Option<String>| -> Result<(), CliError> {
        match text {
            Some(t) => {
                let p = out.join(name);
                io::write_text(&p, &t)?;
                written.push(p);
            }
            None => eprintln!("note: section for {name} is empty; file omitted"),
        }
        Ok(())
    };
    if bytes.starts_with(io::MAGIC) {
        let x = io::decode_ensemble(&bytes)?;
        let rows = (0..=x.steps()).map(|k| {
            let norms: Vec<f64> = (0..x.paths()).map(|p| Vector::from_column_slice(x.state(p, k)).norm()).collect();
            let e = Estimate::from_samples(&norms).expect("paths ≥ 1");
            vec![x.time(k), e.value, e.std_error]
        });
        emit("mean_norm_vs_t.dat", Some(dat("t mean_norm std_error", rows)))?;
        return Ok(written);
    }
    let text = String::from_utf8(bytes).map_err(|_| CliError::Io(format!("{}: not a report", input.display())))?;
    let r = DiagnosticsReport::from_json(&text).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;

    let mut res = r.residual_table.clone();
    res.sort_by_key(|x| x.n);
    emit(
        "residual_vs_n.dat",
        (!res.is_empty()).then(|| dat("n res_mean std_error", res.iter().map(|x| vec![x.n as f64, x.mean, x.std_error]))),
    )?;
    let mut al = r.aldous_table.clone();
    al.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    emit(
        "aldous_vs_delta.dat",
        (!al.is_empty()).then(|| dat("delta probability", al.iter().map(|a| vec![a.delta, a.value]))),
    )?;
    let mut sm = r.sup_moment_p.clone();
    sm.sort_by_key(|x| x.0);
    emit(
        "sup_moment_vs_n.dat",
        (!sm.is_empty()).then(|| dat("n sup_moment std_error", sm.iter().map(|(n, e)| vec![*n as f64, e.value, e.std_error]))),
    )?;
    emit(
        "uncovered_vs_eps.dat",
        r.covering.as_ref().filter(|c| !c.radii.is_empty()).map(|c| {
            let mut pts: Vec<(f64, f64)> = c.radii.iter().copied().zip(c.pooled.iter().copied()).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            dat("eps uncovered_fraction", pts.into_iter().map(|(a, b)| vec![a, b]))
        }),
    )?;
    emit(
        "conv_ratio_vs_t.dat",
        r.conv_constant_fit.as_ref().filter(|c| c.rows.iter().any(|x| x.ratio.is_some())).map(|c| {
            dat("t lhs_over_rhs", c.rows.iter().filter_map(|x| x.ratio.map(|q| vec![x.t, q])))
        }),
    )?;
    Ok(written)
}

// ---------------------------------------------------------------------- main

fn load(cli: &Cli) -> Result<(ScenarioConfig, PathBuf), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let mut cfg = ScenarioConfig::load(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(seed) = cli.seed {
        cfg.scheme.seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    Ok((cfg, out))
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate => {
            let (cfg, out) = load(cli)?;
            simulate(&cfg, &out).map(|_| ())
        }
        Command::Convergence => {
            let (cfg, out) = load(cli)?;
            convergence(&cfg, &out).map(|_| ())
        }
        Command::Verify => {
            let (cfg, out) = load(cli)?;
            let rows = verify(&cfg, &out)?;
            let failed: Vec<String> = rows
                .iter()
                .filter(|r| !r.passed())
                .map(|r| format!("{} [{}: {}]", r.hypothesis, r.check, r.verdict))
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verify(failed.join(", ")))
            }
        }
        Command::Plotdata { input } => {
            let out = cli
                .out
                .clone()
                .unwrap_or_else(|| input.parent().map(Path::to_path_buf).unwrap_or_default());
            plotdata(input, &out).map(|_| ())
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match cli.threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code; diagnostics go to standard error.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("sdinc: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_grid_hits_eighths() {
        for (t, dt) in [(2.0, 2.0 / 1024.0), (1.0, 0.3), (1.0, 1.0 / 64.0)] {
            let h = conv_dt(t, dt);
            assert!(h <= dt * (1.0 + 1e-12));
            let m = t / 8.0 / h;
            assert!((m - m.round()).abs() < 1e-9, "{t} {dt} {h}");
        }
        assert_eq!(conv_dt(2.0, 2.0 / 1024.0), 2.0 / 1024.0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(String::new()).exit_code(), 2);
        assert_eq!(CliError::BlowUp(String::new()).exit_code(), 3);
        assert_eq!(CliError::Io(String::new()).exit_code(), 4);
        assert_eq!(CliError::Verify(String::new()).exit_code(), 5);
    }

    #[test]
    fn missing_config_flag_is_a_config_error() {
        assert_eq!(main_with(["sdinc", "verify"]), 2);
        assert_eq!(main_with(["sdinc", "--bogus"]), 2);
    }
}
