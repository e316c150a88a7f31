use sdinc::config::ScenarioConfig;
use sdinc::stats::Estimate;
use sdinc::tonelli::{
    mild_euler_reference, phi_apply, residual_z, tonelli_step_ensemble, PathEnsemble, SchemeOptions,
    SelectionSource,
};

const LIPSCHITZ: &str = "
[space]
dE = 2
dH = 1
T = 1
[operator]
A = matrix([[-1, 0.5], [0, -1]])
[coefficients]
F = affine(center=[0.2, 0], matrix=[[-0.3, 0.1], [0.1, -0.3]])
G = singleton(matrix_fn=affine(base=[[0.3], [0.2]], slope=[[0.1], [0]]))
L = linear(C=1)
p = 4
eta = 1
xi = point([1, 0])
[scheme]
n_ladder = [2, 4, 8, 16, 32]
dt = 0.0078125
paths = 200
seed = 99
";

fn sup_gap(a: &PathEnsemble, b: &PathEnsemble, p: usize) -> f64 {
    a.trajectory(p)
        .iter()
        .zip(b.trajectory(p))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn tonelli_approaches_mild_euler_along_the_ladder() {
    let cfg = ScenarioConfig::parse(LIPSCHITZ).unwrap();
    let sc = cfg.build().unwrap();
    let s = &cfg.scheme;
    let opts = SchemeOptions::default();
    let euler = mild_euler_reference(&sc, s.dt, s.paths, s.seed, &opts).unwrap();
    let mut prev = f64::INFINITY;
    let mut first = None;
    for &n in &s.n_ladder {
        let x = tonelli_step_ensemble(&sc, n, s.dt, s.paths, s.seed, &opts).unwrap();
        let gaps: Vec<f64> = (0..s.paths).map(|p| sup_gap(&x, &euler, p)).collect();
        let mean = Estimate::from_samples(&gaps).unwrap().value;
        assert!(mean < prev, "n = {n}: {mean} ≥ {prev}");
        first.get_or_insert(mean);
        prev = mean;
    }
    // The lagged diffusion makes the gap shrink like n^{-1/2}: 16× more
    // rungs should cut it at least by 2.5.
    assert!(prev <= 0.4 * first.unwrap(), "{prev} vs {first:?}");
}

#[test]
fn tonelli_ensemble_is_a_fixed_point_of_its_lagged_map() {
    let cfg = ScenarioConfig::load(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/tube_ball.cfg"))
        .unwrap();
    let sc = cfg.build().unwrap();
    let s = &cfg.scheme;
    let x = tonelli_step_ensemble(&sc, 8, s.dt, 20, s.seed, &cfg.scheme_options()).unwrap();
    let y = phi_apply(&sc, &x, Some(8), SelectionSource::Stored).unwrap();
    let worst = x
        .trajectories()
        .iter()
        .zip(y.trajectories())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn residual_shrinks_with_the_lag() {
    let cfg = ScenarioConfig::load(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/tube_ball.cfg"))
        .unwrap();
    let sc = cfg.build().unwrap();
    let s = &cfg.scheme;
    let mut prev = f64::INFINITY;
    for n in [2, 8, 32] {
        let x = tonelli_step_ensemble(&sc, n, s.dt, 100, s.seed, &cfg.scheme_options()).unwrap();
        let z = residual_z(&sc, &x, SelectionSource::Stored).unwrap();
        let sup: Vec<f64> = z
            .chunks(x.trajectory(0).len())
            .map(|c| c.chunks(2).map(|v| v[0].hypot(v[1])).fold(0.0, f64::max))
            .collect();
        let mean = Estimate::from_samples(&sup).unwrap().value;
        assert!(mean < prev, "n = {n}: {mean} ≥ {prev}");
        prev = mean;
    }
}

#[test]
fn ou_terminal_mean_and_variance() {
    let mut cfg = ScenarioConfig::load(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/ou.cfg")).unwrap();
    cfg.scheme.paths = 4000;
    let sc = cfg.build().unwrap();
    let x = tonelli_step_ensemble(&sc, 64, cfg.scheme.dt, cfg.scheme.paths, cfg.scheme.seed, &cfg.scheme_options()).unwrap();
    let xt: Vec<f64> = (0..x.paths()).map(|p| x.terminal(p)[0]).collect();
    let (lambda, t) = (0.5f64, 2.0f64);
    let mean = Estimate::from_samples(&xt).unwrap();
    let var = Estimate::variance_of(&xt).unwrap();
    let want_mean = (-lambda * t).exp();
    let want_var = (1.0 - (-2.0 * lambda * t).exp()) / (2.0 * lambda);
    assert!((mean.value - want_mean).abs() <= 3.0 * mean.std_error, "{mean:?} vs {want_mean}");
    assert!((var.value - want_var).abs() <= 3.0 * var.std_error, "{var:?} vs {want_var}");
}

#[cfg(feature = "parallel")]
#[test]
fn ensembles_do_not_depend_on_the_thread_count() {
    let cfg = ScenarioConfig::parse(LIPSCHITZ).unwrap();
    let sc = cfg.build().unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| tonelli_step_ensemble(&sc, 4, cfg.scheme.dt, 64, 5, &SchemeOptions::default()).unwrap())
    };
    assert_eq!(run(1), run(4));
}
