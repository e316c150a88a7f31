use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

/// Copy of a shipped scenario with `key = value` lines replaced or appended
/// to their section.
fn variant(dir: &Path, name: &str, edits: &[(&str, &str, &str)]) -> PathBuf {
    let mut text = std::fs::read_to_string(scenario(name)).unwrap();
    for &(section, key, value) in edits {
        let lines: Vec<String> = text.lines().map(str::to_owned).collect();
        let prefix = format!("{key} =");
        let replaced: Vec<String> = lines
            .iter()
            .map(|l| if l.trim_start().starts_with(&prefix) { format!("{key} = {value}") } else { l.clone() })
            .collect();
        text = if replaced != lines {
            replaced.join("\n")
        } else {
            let header = format!("[{section}]");
            if text.contains(&header) {
                text.replacen(&header, &format!("{header}\n{key} = {value}"), 1)
            } else {
                format!("{text}\n{header}\n{key} = {value}\n")
            }
        };
    }
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn sdinc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdinc")).args(args).output().unwrap()
}

fn run(cfg: &Path, out: &Path, cmd: &str) -> Output {
    sdinc(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), cmd])
}

fn csv_rows(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# scenario "));
    let header = lines.next().unwrap().to_owned();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

#[test]
fn ou_summary_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = variant(tmp.path(), "ou.cfg", &[("scheme", "paths", "3000")]);
    let out = run(&cfg, tmp.path(), "simulate");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("ensemble_64.bin").exists());
    let (header, rows) = csv_rows(&tmp.path().join("summary.csv"));
    assert_eq!(header, "n,component,mean,mean_se,var,var_se");
    let r = &rows[0];
    let f = |i: usize| r[i].parse::<f64>().unwrap();
    let mean = (-1.0f64).exp();
    let var = 1.0 - (-2.0f64).exp();
    assert!((f(2) - mean).abs() <= 3.0 * f(3), "{r:?}");
    assert!((f(4) - var).abs() <= 3.0 * f(5), "{r:?}");
}

#[test]
fn constant_drift_convergence_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&scenario("constant_drift.cfg"), tmp.path(), "convergence");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&tmp.path().join("convergence.csv"));
    assert_eq!(header, "n,dt,paths,seed,res_mean,res_p90,bl_to_prev,sup_moment_p");
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][6], "");
    for r in &rows {
        let n: f64 = r[0].parse().unwrap();
        let res: f64 = r[4].parse().unwrap();
        assert!((res - 0.5 / n).abs() <= 1e-8, "{r:?}");
        assert!(!r[6].is_empty() || r[0] == "2");
    }
    for f in ["report.csv", "report.json"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
}

#[test]
fn single_rung_ladder_has_no_law_distance() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = variant(tmp.path(), "constant_drift.cfg", &[("scheme", "n_ladder", "[8]")]);
    assert!(run(&cfg, tmp.path(), "convergence").status.success());
    let (_, rows) = csv_rows(&tmp.path().join("convergence.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][6], "");
}

#[test]
fn invalid_configurations_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    for (key, value, section) in [("paths", "0", "scheme"), ("eta", "0", "coefficients"), ("p", "2", "coefficients")] {
        let cfg = variant(tmp.path(), "constant_drift.cfg", &[(section, key, value)]);
        let out = run(&cfg, tmp.path(), "simulate");
        assert_eq!(out.status.code(), Some(2), "{key} = {value}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(key));
    }
    let cfg = variant(tmp.path(), "constant_drift.cfg", &[("scheme", "slector", "steiner")]);
    let out = run(&cfg, tmp.path(), "simulate");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    assert_eq!(sdinc(&["verify"]).status.code(), Some(2));
    let missing = tmp.path().join("nope.cfg");
    assert_eq!(run(&missing, tmp.path(), "verify").status.code(), Some(2));
}

#[test]
fn verify_rows_and_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&scenario("lipschitz_tube.cfg"), tmp.path(), "verify");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&tmp.path().join("hypotheses.csv"));
    assert_eq!(header, "hypothesis,check,statistic,threshold,verdict");
    for r in &rows {
        assert_eq!(r.len(), 5, "{r:?}");
        assert!(["generator", "growth", "modulus", "osgood", "initial"].contains(&r[0].as_str()), "{r:?}");
    }
    for h in ["generator", "growth", "modulus", "osgood", "initial"] {
        assert!(rows.iter().any(|r| r[0] == h), "{h}");
    }

    let out = run(&scenario("sqrt_modulus.cfg"), tmp.path(), "verify");
    assert_eq!(out.status.code(), Some(5));
    let (_, rows) = csv_rows(&tmp.path().join("hypotheses.csv"));
    assert!(rows.iter().any(|r| r[0] == "osgood" && r[4] == "osgood_fail"));
}

#[test]
fn plotdata_from_report_and_ensemble() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = variant(
        tmp.path(),
        "tube_ball.cfg",
        &[("scheme", "paths", "60"), ("scheme", "n_ladder", "[2, 4]"), ("diagnostics", "conv_paths", "200")],
    );
    assert!(run(&cfg, tmp.path(), "convergence").status.success());
    let plots = tmp.path().join("plots");
    let report = tmp.path().join("report.json");
    let out = sdinc(&["--out", plots.to_str().unwrap(), "plotdata", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["residual_vs_n.dat", "aldous_vs_delta.dat", "sup_moment_vs_n.dat", "uncovered_vs_eps.dat"] {
        let text = std::fs::read_to_string(plots.join(f)).unwrap();
        assert!(text.lines().filter(|l| !l.starts_with('#')).count() >= 2, "{f}");
    }

    assert!(run(&cfg, tmp.path(), "simulate").status.success());
    let bin = tmp.path().join("ensemble_4.bin");
    let out = sdinc(&["--out", plots.to_str().unwrap(), "plotdata", bin.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(plots.join("mean_norm_vs_t.dat").exists());

    let out = sdinc(&["plotdata", tmp.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn seed_override_changes_the_ensemble() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = variant(tmp.path(), "tube_ball.cfg", &[("scheme", "paths", "20"), ("scheme", "n_ladder", "[4]")]);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(run(&cfg, &a, "simulate").status.success());
    let out = sdinc(&["--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--seed", "8", "simulate"]);
    assert!(out.status.success());
    let ea = std::fs::read(a.join("ensemble_4.bin")).unwrap();
    let eb = std::fs::read(b.join("ensemble_4.bin")).unwrap();
    assert_eq!(ea.len(), eb.len());
    assert_ne!(ea, eb);
}
