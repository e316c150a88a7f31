//! Browser bindings for the demo page in `www/`. Every entry point returns a
//! JSON string; failures come back as `{"error": "..."}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use sdinc::coefficients::{osgood_iterate, OsgoodModulus};
use sdinc::config::ScenarioConfig;
use sdinc::convexset::{convex_hull, distance_to_point, planar_steiner_point, steiner_point, ConvexBody, QuadratureSpec};
use sdinc::stats::Estimate;
use sdinc::tonelli::{mild_euler_reference, tonelli_step_ensemble, PathEnsemble};
use sdinc::Vector;

const MAX_CURVE_POINTS: usize = 200;

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn terminal_stats(x: &PathEnsemble) -> Value {
    let xt: Vec<f64> = (0..x.paths()).map(|p| x.terminal(p)[0]).collect();
    let m = Estimate::from_samples(&xt).expect("paths > 0");
    let v = Estimate::variance_of(&xt).expect("paths > 0");
    json!({ "mean": m.value, "mean_se": m.std_error, "var": v.value, "var_se": v.std_error })
}

fn mean_curve(x: &PathEnsemble, ks: &[usize]) -> Vec<f64> {
    ks.iter()
        .map(|&k| (0..x.paths()).map(|p| x.state(p, k)[0]).sum::<f64>() / x.paths() as f64)
        .collect()
}

/// Ornstein–Uhlenbeck `dX = -λX dt + σ dW`: Tonelli scheme with lag `1/n`
/// against the lag-free exponential Euler scheme on the same Brownian paths.
#[allow(clippy::too_many_arguments)]
pub fn ou_compare_json(
    lambda: f64,
    sigma: f64,
    x0: f64,
    horizon: f64,
    n: u32,
    steps: u32,
    paths: u32,
    seed: u32,
) -> Result<Value, String> {
    if steps == 0 {
        return Err("steps must be at least 1".into());
    }
    let text = format!(
        "[space]\ndE = 1\ndH = 1\nT = {horizon:?}\n\
         [operator]\nA = scaled_identity(1, {:?})\n\
         [coefficients]\nF = affine(center=[0], matrix=[[0]])\nG = singleton(matrix_fn=const([[{sigma:?}]]))\n\
         L = linear(C=1)\np = 4\neta = 1\nxi = point([{x0:?}])\n\
         [scheme]\nn_ladder = [{n}]\ndt = {:?}\npaths = {paths}\nseed = {seed}\n",
        -lambda,
        horizon / f64::from(steps),
    );
    let cfg = ScenarioConfig::parse(&text).map_err(|e| e.to_string())?;
    let sc = cfg.build().map_err(|e| e.to_string())?;
    let s = &cfg.scheme;
    let opts = cfg.scheme_options();
    let tonelli = tonelli_step_ensemble(&sc, u64::from(n), s.dt, s.paths, s.seed, &opts).map_err(|e| e.to_string())?;
    let euler = mild_euler_reference(&sc, s.dt, s.paths, s.seed, &opts).map_err(|e| e.to_string())?;

    let stride = (tonelli.steps() / MAX_CURVE_POINTS).max(1);
    let mut ks: Vec<usize> = (0..=tonelli.steps()).step_by(stride).collect();
    if ks.last() != Some(&tonelli.steps()) {
        ks.push(tonelli.steps());
    }
    let times: Vec<f64> = ks.iter().map(|&k| tonelli.time(k)).collect();
    let exact: Vec<f64> = times.iter().map(|t| x0 * (-lambda * t).exp()).collect();
    let gap = (0..s.paths)
        .map(|p| {
            tonelli
                .trajectory(p)
                .iter()
                .zip(euler.trajectory(p))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .sum::<f64>()
        / s.paths as f64;
    let exact_var = if lambda == 0.0 {
        sigma * sigma * horizon
    } else {
        sigma * sigma * (1.0 - (-2.0 * lambda * horizon).exp()) / (2.0 * lambda)
    };
    Ok(json!({
        "times": times,
        "tonelli_mean": mean_curve(&tonelli, &ks),
        "euler_mean": mean_curve(&euler, &ks),
        "exact_mean": exact,
        "tonelli": terminal_stats(&tonelli),
        "euler": terminal_stats(&euler),
        "exact": { "mean": x0 * (-lambda * horizon).exp(), "var": exact_var },
        "mean_sup_gap": gap,
    }))
}

/// Hull and Steiner point of planar points given as `[x0, y0, x1, y1, …]`:
/// the exterior-angle formula and the general quadrature route side by side.
pub fn polygon_steiner_json(xy: &[f64]) -> Result<Value, String> {
    if xy.is_empty() || !xy.len().is_multiple_of(2) {
        return Err("expected a nonempty list of x, y pairs".into());
    }
    let pts: Vec<[f64; 2]> = xy.chunks(2).map(|c| [c[0], c[1]]).collect();
    let hull = convex_hull(&pts);
    let exact = planar_steiner_point(&pts);
    let body = ConvexBody::hull(pts.iter().map(|p| Vector::from_row_slice(p)).collect()).map_err(|e| e.to_string())?;
    let quad = steiner_point(&body, &QuadratureSpec::default()).map_err(|e| e.to_string())?;
    let member = distance_to_point(&body, &quad, 1e-9).map_err(|e| e.to_string())?;
    let centroid = [
        pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64,
        pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64,
    ];
    Ok(json!({
        "hull": hull,
        "steiner": exact,
        "steiner_quadrature": [quad[0], quad[1]],
        "distance_to_body": member.distance,
        "vertex_centroid": centroid,
    }))
}

/// Picard iterates `R_{m+1}(t) = k ∫_0^t L(R_m(s)) ds` for a comparison
/// function `kind ∈ {linear, loglinear, sqrt}` with constant `c`.
pub fn osgood_json(kind: &str, c: f64, k: f64, horizon: f64, r0: f64, grid: u32, iters: u32) -> Result<Value, String> {
    let l = match kind {
        "linear" => OsgoodModulus::linear(c),
        "loglinear" => OsgoodModulus::loglinear(c),
        "sqrt" => OsgoodModulus::sqrt(c),
        other => return Err(format!("unknown comparison function `{other}`")),
    };
    let out = osgood_iterate(&l, k, horizon, r0, grid as usize, iters as usize).map_err(|e| e.to_string())?;
    let sups: Vec<f64> = out.iterates.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).collect();
    let shown: Vec<usize> = [0, 1, 2, 3, 5, 10, out.iterates.len() - 1]
        .into_iter()
        .filter(|&m| m < out.iterates.len())
        .collect();
    let curves: Vec<Value> = shown
        .iter()
        .map(|&m| json!({ "m": m, "values": out.iterates[m] }))
        .collect();
    Ok(json!({
        "verdict": out.verdict.as_str(),
        "limit_sup": out.limit_sup,
        "r0": out.r0,
        "dominating": out.dominating,
        "note": out.note,
        "sups": sups,
        "times": (0..=grid).map(|j| horizon * f64::from(j) / f64::from(grid)).collect::<Vec<f64>>(),
        "curves": curves,
    }))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn ou_compare(lambda: f64, sigma: f64, x0: f64, horizon: f64, n: u32, steps: u32, paths: u32, seed: u32) -> String {
    respond(ou_compare_json(lambda, sigma, x0, horizon, n, steps, paths, seed))
}

#[wasm_bindgen]
pub fn polygon_steiner(xy: Vec<f64>) -> String {
    respond(polygon_steiner_json(&xy))
}

#[wasm_bindgen]
pub fn osgood(kind: &str, c: f64, k: f64, horizon: f64, r0: f64, grid: u32, iters: u32) -> String {
    respond(osgood_json(kind, c, k, horizon, r0, grid, iters))
}
