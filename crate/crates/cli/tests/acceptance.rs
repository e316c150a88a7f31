//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use sdinc::coefficients::{osgood_iterate, OsgoodModulus, OsgoodVerdict};
use sdinc::config::ScenarioConfig;
use sdinc::convexset::{distance_to_point, hausdorff_distance, steiner_point, ConvexBody, QuadratureSpec};
use sdinc::diagnostics::{convolution_inequality_check, homogeneity_ratios, StepProcess};
use sdinc::driver::rng::{unit, GaussianStream};
use sdinc::semigroup::SemigroupOperator;
use sdinc::stats::Estimate;
use sdinc::tonelli::tonelli_step_ensemble;
use sdinc::{Matrix, Vector};

const TOL: f64 = 1e-6;

struct Rng(GaussianStream);

impl Rng {
    fn new(stream: u64) -> Self {
        Rng(GaussianStream::new(0xacce97, 0, stream))
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * unit(self.0.next_word())
    }

    fn below(&mut self, n: usize) -> usize {
        (self.0.next_word() % n as u64) as usize
    }

    fn vector(&mut self, d: usize, half: f64) -> Vector {
        Vector::from_fn(d, |_, _| self.uniform(-half, half))
    }

    fn matrix(&mut self, d: usize, half: f64) -> Matrix {
        Matrix::from_fn(d, d, |_, _| self.uniform(-half, half))
    }

    fn body(&mut self, d: usize, depth: usize) -> ConvexBody {
        let kinds = if depth == 0 { 3 } else { 6 };
        match self.below(kinds) {
            0 => ConvexBody::point(self.vector(d, 2.0)).unwrap(),
            1 => ConvexBody::ball(self.vector(d, 2.0), self.uniform(0.0, 1.5)).unwrap(),
            2 => {
                let m = 1 + self.below(7);
                ConvexBody::hull((0..m).map(|_| self.vector(d, 2.0)).collect()).unwrap()
            }
            3 => ConvexBody::minkowski_sum(self.body(d, depth - 1), self.body(d, depth - 1)).unwrap(),
            4 => ConvexBody::scaled(self.uniform(0.0, 1.5), self.body(d, depth - 1)).unwrap(),
            _ => ConvexBody::translated(self.vector(d, 1.0), self.body(d, depth - 1)).unwrap(),
        }
    }
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    if elapsed <= Duration::from_secs(limit_secs) {
        Ok(())
    } else {
        Err(format!("took {elapsed:.1?}, limit {limit_secs} s"))
    }
}

fn convex_sets() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = Rng::new(1);
    let (mut worst_tri, mut worst_member, mut worst_self) = (f64::NEG_INFINITY, 0.0_f64, 0.0_f64);
    let mut bodies = Vec::new();
    for i in 0..500 {
        let d = 2 + i % 2;
        let (a, b, c) = (rng.body(d, 2), rng.body(d, 2), rng.body(d, 2));
        let h = |x: &ConvexBody, y: &ConvexBody| {
            hausdorff_distance(x, y, TOL).map_err(|e| format!("pair {i}: {e}\n{x:?}\n{y:?}"))
        };
        let ab = h(&a, &b)?;
        let ba = h(&b, &a)?;
        if ab != ba {
            return Err(format!("pair {i}: H(a,b) = {ab} but H(b,a) = {ba}"));
        }
        let ac = h(&a, &c)?;
        let bc = h(&b, &c)?;
        worst_tri = worst_tri.max(ac - ab - bc);
        worst_self = worst_self.max(h(&a, &a)?);
        bodies.extend([a, b, c]);
    }
    let quad = QuadratureSpec::default();
    for k in &bodies {
        let s = steiner_point(k, &quad).map_err(|e| format!("{e}: {k:?}"))?;
        worst_member = worst_member.max(distance_to_point(k, &s, 1e-9).map_err(|e| format!("{e}: {k:?}"))?.distance);
    }
    // Exterior-angle weights of the unit right triangle: π/2 at the origin,
    // 3π/4 at the other two vertices.
    let verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let weights = [0.25, 0.375, 0.375];
    let oracle: Vec<f64> = (0..2).map(|j| (0..3).map(|i| weights[i] * verts[i][j]).sum()).collect();
    let tri = ConvexBody::hull(verts.iter().map(|v| Vector::from_row_slice(v)).collect()).unwrap();
    let s = steiner_point(&tri, &quad).map_err(|e| e.to_string())?;
    let tri_err = ((s[0] - oracle[0]).abs()).max((s[1] - oracle[1]).abs());

    if worst_tri > 3.0 * TOL {
        return Err(format!("triangle inequality violated by {worst_tri:e}"));
    }
    if worst_self > TOL {
        return Err(format!("H(a, a) = {worst_self:e}"));
    }
    if worst_member > TOL {
        return Err(format!("Steiner point {worst_member:e} outside its body"));
    }
    if (oracle[0] - 0.375).abs() > 1e-15 || tri_err > 1e-6 {
        return Err(format!("triangle Steiner point {s:?} vs oracle {oracle:?}"));
    }
    within(start.elapsed(), 30)?;
    Ok(format!(
        "500 pairs, symmetry exact, triangle slack {worst_tri:.1e}, membership {worst_member:.1e}, steiner error {tri_err:.1e}, {:.1?}",
        start.elapsed()
    ))
}

fn semigroup() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = Rng::new(2);
    let mut worst_law = 0.0_f64;
    for _ in 0..100 {
        let d = 1 + rng.below(4);
        let op = SemigroupOperator::new(rng.matrix(d, 2.0), 2.0).map_err(|e| e.to_string())?;
        let (s, t) = (rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0));
        let x = rng.vector(d, 1.0);
        let lhs = op.evolve(s, &op.evolve(t, &x).unwrap()).unwrap();
        worst_law = worst_law.max((lhs - op.evolve(s + t, &x).unwrap()).norm());
    }
    let mut rises = 0;
    for _ in 0..50 {
        let d = 1 + rng.below(4);
        let b = rng.matrix(d, 1.0);
        let rho = b.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let a = if rho > 0.0 { b * (rng.uniform(0.0, 4.0) / rho) } else { b };
        let x = rng.vector(d, 1.0);
        let op = SemigroupOperator::new(a.clone(), 1.0).map_err(|e| e.to_string())?;
        let mut prev = f64::INFINITY;
        for n in [4u64, 16, 64, 256] {
            let e = ((op.yosida(n).map_err(|e| e.to_string())?.generator() - &a) * &x).norm();
            if e > prev + 1e-9 {
                rises += 1;
            }
            prev = e;
        }
    }
    if worst_law > 1e-8 {
        return Err(format!("semigroup law defect {worst_law:e}"));
    }
    if rises > 0 {
        return Err(format!("{rises} Yosida ladder increases"));
    }
    within(start.elapsed(), 10)?;
    Ok(format!("law defect {worst_law:.1e}, Yosida ladders monotone, {:.1?}", start.elapsed()))
}

fn osgood() -> Result<String, String> {
    let start = Instant::now();
    let (k, c, t, r0) = (1.0, 1.0, 1.0, 1.0);
    let lin = osgood_iterate(&OsgoodModulus::linear(c), k, t, r0, 400, 60).map_err(|e| e.to_string())?;
    if lin.verdict != OsgoodVerdict::OsgoodPass || lin.limit_sup > 1e-8 * lin.r0 {
        return Err(format!("linear modulus: {:?}, sup {:e}", lin.verdict, lin.limit_sup));
    }
    // Closed form R_m(T) = R0 (kCT)^m / m!. The trapezoid rule overestimates
    // the convex integrands, by a relative O(m³h²) after m steps.
    let h = t / 400.0;
    let mut fact = 1.0;
    for m in 1..=60 {
        fact *= m as f64;
        let exact = lin.r0 * (k * c * t).powi(m) / fact;
        let got = *lin.iterates[m as usize].last().unwrap();
        let rel = got / exact - 1.0;
        if !(-1e-12..=f64::from(m).powi(3) * h * h / 6.0).contains(&rel) {
            return Err(format!("iterate {m}: {got:e} vs closed form {exact:e}"));
        }
    }
    let sq = osgood_iterate(&OsgoodModulus::sqrt(1.0), k, t, r0, 400, 60).map_err(|e| e.to_string())?;
    let maximal = (k * t / 2.0).powi(2);
    if sq.verdict != OsgoodVerdict::OsgoodFail || (sq.limit_sup - maximal).abs() > 0.1 * maximal {
        return Err(format!("sqrt modulus: {:?}, sup {} vs {maximal}", sq.verdict, sq.limit_sup));
    }
    within(start.elapsed(), 5)?;
    Ok(format!(
        "linear sup {:.1e}·R0, sqrt sup {:.4} vs {maximal} (osgood_fail), {:.1?}",
        lin.limit_sup / lin.r0,
        sq.limit_sup,
        start.elapsed()
    ))
}

fn ornstein_uhlenbeck() -> Result<String, String> {
    let start = Instant::now();
    let cfg = ScenarioConfig::load(&scenario("ou.cfg")).map_err(|e| e.to_string())?;
    let sc = cfg.build().map_err(|e| e.to_string())?;
    let s = &cfg.scheme;
    let (lambda, sigma, x0, t) = (0.5f64, 1.0f64, 1.0f64, cfg.space.horizon);
    if s.paths != 10_000 || s.dt != t / 1024.0 || s.n_ladder != [64] {
        return Err("ou.cfg does not hold n = 64, dt = T/1024, 10^4 paths".into());
    }
    let x = tonelli_step_ensemble(&sc, 64, s.dt, s.paths, s.seed, &cfg.scheme_options()).map_err(|e| e.to_string())?;
    let xt: Vec<f64> = (0..x.paths()).map(|p| x.terminal(p)[0]).collect();
    let mean = Estimate::from_samples(&xt).unwrap();
    let var = Estimate::variance_of(&xt).unwrap();
    let want_mean = (-lambda * t).exp() * x0;
    let want_var = sigma * sigma * (1.0 - (-2.0 * lambda * t).exp()) / (2.0 * lambda);
    let zm = (mean.value - want_mean) / mean.std_error;
    let zv = (var.value - want_var) / var.std_error;
    if zm.abs() > 3.0 || zv.abs() > 3.0 {
        return Err(format!("mean {mean:?} vs {want_mean}, variance {var:?} vs {want_var}"));
    }
    within(start.elapsed(), 120)?;
    Ok(format!("mean off by {zm:+.2} SE, variance by {zv:+.2} SE, {:.1?}", start.elapsed()))
}

/// Criteria 5 and 6 share the ladder run on the multivalued benchmark.
fn residual_and_gronwall() -> (Result<String, String>, Result<String, String>) {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| -> Result<_, String> {
        let cfg = ScenarioConfig::load(&scenario(name)).map_err(|e| e.to_string())?;
        let out = sdinc_cli::convergence(&cfg, &tmp.path().join(name)).map_err(|e| e.to_string())?;
        Ok((cfg, out))
    };
    let tube = run("tube_ball.cfg");
    let drift = run("constant_drift.cfg");

    let residual = (|| {
        let (cfg, (rows, _)) = tube.as_ref().map_err(Clone::clone)?;
        if cfg.scheme.n_ladder != [2, 4, 8, 16, 32] || cfg.scheme.selector != sdinc::config::SelectorSpec::Steiner {
            return Err("tube_ball.cfg ladder or selector changed".to_string());
        }
        let means: Vec<f64> = rows.iter().map(|r| r.res_mean).collect();
        if means.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Less)) {
            return Err(format!("residual means not strictly decreasing: {means:?}"));
        }
        let (_, (rows, _)) = drift.as_ref().map_err(Clone::clone)?;
        let worst = rows
            .iter()
            .map(|r| (r.res_mean - 0.5 / r.n as f64).abs())
            .fold(0.0, f64::max);
        if worst > 1e-8 {
            return Err(format!("constant drift residual off ‖a‖/n by {worst:e}"));
        }
        within(start.elapsed(), 300)?;
        Ok(format!(
            "E‖Z_n(T)‖ = {} down the ladder; constant drift within {worst:.1e} of ‖a‖/n, {:.1?}",
            means.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>().join(" > "),
            start.elapsed()
        ))
    })();

    let gronwall = (|| {
        let (cfg, (_, report)) = tube.as_ref().map_err(Clone::clone)?;
        if cfg.diagnostics.gronwall_slack != 2.0 || report.gronwall.len() != cfg.scheme.n_ladder.len() {
            return Err("Gronwall checks do not cover the ladder with slack 2".to_string());
        }
        let mut margin = f64::INFINITY;
        for g in &report.gronwall {
            let gap = 2f64.ln() + g.check.log_bound - g.check.empirical.value.ln();
            if !g.check.holds || gap < 0.0 {
                return Err(format!("n = {}: E∫‖X‖^p = {:e} above the bound", g.n, g.check.empirical.value));
            }
            margin = margin.min(gap);
        }
        Ok(format!("all {} rungs below 2·T·c·e^(cT), smallest log margin {margin:.2}", report.gronwall.len()))
    })();
    (residual, gronwall)
}

fn convolution() -> Result<String, String> {
    let start = Instant::now();
    let cfg = ScenarioConfig::load(&scenario("tube_ball.cfg")).map_err(|e| e.to_string())?;
    let sc = cfg.build().map_err(|e| e.to_string())?;
    let t = cfg.space.horizon;
    let ladder = [t / 8.0, t / 4.0, t / 2.0, t];
    let col = |a: f64, b: f64| Matrix::from_column_slice(2, 1, &[a, b]);
    let gs = [
        StepProcess::constant(col(0.3, 0.2)),
        StepProcess::new(vec![0.0, 0.5 * t], vec![col(1.0, 0.0), col(0.2, -0.4)]).map_err(|e| e.to_string())?,
        StepProcess::new(
            vec![0.0, 0.25 * t, 0.625 * t],
            vec![col(0.5, 0.3), col(-0.6, 0.3), col(0.4, 0.5)],
        )
        .map_err(|e| e.to_string())?,
    ];
    let (p, paths, seed, dt) = (cfg.coefficients.p, 2000, 17, t / 64.0);
    let mut spreads = Vec::new();
    let mut worst_h = 0.0_f64;
    for (i, g) in gs.iter().enumerate() {
        let fit = convolution_inequality_check(&sc.op, g, p, &ladder, paths, seed, dt).map_err(|e| e.to_string())?;
        if !fit.stable {
            return Err(format!("g{i}: constant spread {:.2} over the t-ladder", fit.spread));
        }
        spreads.push(fit.spread);
        for r in homogeneity_ratios(&sc.op, g, p, &ladder, paths, seed, dt).map_err(|e| e.to_string())? {
            worst_h = worst_h.max((r - 1.0).abs());
        }
    }
    if worst_h > 0.05 {
        return Err(format!("homogeneity off by {worst_h:.3}"));
    }
    within(start.elapsed(), 60)?;
    Ok(format!(
        "spreads {}, homogeneity within {worst_h:.1e}, {:.1?}",
        spreads.iter().map(|s| format!("{s:.2}")).collect::<Vec<_>>().join(", "),
        start.elapsed()
    ))
}

fn determinism() -> Result<String, String> {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("tube_ball.cfg")).unwrap().replace("paths = 1000", "paths = 150");
    let cfg = tmp.path().join("tube_ball.cfg");
    std::fs::write(&cfg, text).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = tmp.path().join(format!("t{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_sdinc"))
            .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads, "convergence"])
            .status()
            .unwrap();
        if !status.success() {
            return Err(format!("convergence with {threads} thread(s) exited with {status}"));
        }
        let read = |f: &str| std::fs::read(out.join(f)).unwrap();
        outputs.push((read("convergence.csv"), read("report.csv")));
    }
    if outputs[0] != outputs[1] {
        return Err("CSV output differs between 1 and 4 threads".into());
    }
    Ok(format!("convergence.csv and report.csv identical ({} bytes)", outputs[0].0.len()))
}

fn main() {
    let mut results: Vec<(usize, &str, Result<String, String>)> = vec![
        (1, "convex sets", convex_sets()),
        (2, "semigroup", semigroup()),
        (3, "osgood", osgood()),
        (4, "ornstein-uhlenbeck", ornstein_uhlenbeck()),
    ];
    let (residual, gronwall) = residual_and_gronwall();
    results.push((5, "residual", residual));
    results.push((6, "gronwall", gronwall));
    results.push((7, "convolution", convolution()));
    results.push((8, "determinism", determinism()));

    let mut failed = 0;
    for (i, name, r) in &results {
        match r {
            Ok(m) => println!("criterion {i} ({name}): PASS — {m}"),
            Err(m) => {
                failed += 1;
                println!("criterion {i} ({name}): FAIL — {m}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
