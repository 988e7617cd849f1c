//! Browser bindings: solve a configured problem, trace its branch, and
//! compare the quadrature operator with the spectral one.

use fraclap::continuation::{continue_arclength, locate_fold, ArclengthOptions};
use fraclap::expr::Expr;
use fraclap::io::{parse_config, ExperimentConfig, StartBranch};
use fraclap::operator::apply_fractional;
use fraclap::pv::{build_pv_kernel, pv_apply};
use fraclap::solver::{deflated_search, default_seeds, Solution};
use fraclap::SpectralField;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn search(cfg: &ExperimentConfig) -> Result<Vec<Solution>, JsValue> {
    let p = cfg.problem_spec().map_err(err)?;
    let seeds = default_seeds(cfg.grid(), cfg.solver.seed_count, cfg.solver.seeds, cfg.seed_range());
    let mut sols = deflated_search(&p, &seeds, &cfg.newton());
    sols.sort_by(|a, b| b.diagnostics.mean.total_cmp(&a.diagnostics.mean));
    Ok(sols)
}

/// All solutions found by deflation, as `{x, solutions: [{u, mean, residual}]}`.
pub fn solve_value(config: &str) -> Result<Value, JsValue> {
    let cfg = parse_config(config).map_err(err)?;
    let sols = search(&cfg)?;
    let list: Vec<Value> = sols
        .iter()
        .map(|s| json!({"u": s.u.values(), "mean": s.diagnostics.mean, "residual": s.residual_sup}))
        .collect();
    Ok(json!({"x": cfg.grid().nodes(), "solutions": list}))
}

#[wasm_bindgen]
pub fn solve(config: &str) -> Result<String, JsValue> {
    solve_value(config).map(|v| v.to_string())
}

/// Arclength branch `{t, mean, min, max}` per point plus fold indices and `t1`.
pub fn branch_value(config: &str) -> Result<Value, JsValue> {
    let cfg = parse_config(config).map_err(err)?;
    let p = cfg.problem_spec().map_err(err)?;
    let mut sols = search(&cfg)?;
    if cfg.continuation.start == StartBranch::Lower {
        sols.reverse();
    }
    let seed = sols.first().ok_or_else(|| err("no solution at the starting t"))?;
    let [t_min, t_max] = cfg.problem.t_range.unwrap_or([f64::NEG_INFINITY, f64::INFINITY]);
    let opts = ArclengthOptions {
        newton: cfg.newton(),
        ds: cfg.continuation.ds,
        max_steps: cfg.continuation.max_steps,
        direction: cfg.continuation.direction,
        t_min,
        t_max,
        ..Default::default()
    };
    let branch = continue_arclength(&p, seed, &opts).map_err(err)?;
    let t1 = locate_fold(&p, &branch, &cfg.newton()).ok().map(|f| f.t1);
    let pts: Vec<Value> = branch
        .points
        .iter()
        .map(|s| json!({"t": s.t, "mean": s.diagnostics.mean, "min": s.diagnostics.min, "max": s.diagnostics.max}))
        .collect();
    Ok(json!({"points": pts, "folds": branch.folds, "t1": t1}))
}

#[wasm_bindgen]
pub fn branch(config: &str) -> Result<String, JsValue> {
    branch_value(config).map(|v| v.to_string())
}

/// Quadrature and spectral evaluations of `(Δ)^s u` for `u` given as an
/// expression in `x`.
pub fn oracle_value(field: &str, s: f64, n: usize) -> Result<Value, JsValue> {
    let grid = fraclap::PeriodicGrid::new(n).map_err(err)?;
    let e = Expr::parse(field).map_err(err)?;
    let u = SpectralField::sample(grid, |x| e.eval(x, 0.0)).map_err(err)?;
    let kernel = build_pv_kernel(s, grid, 1e-9).map_err(err)?;
    let pv = pv_apply(&u, &kernel).map_err(err)?;
    let spectral = apply_fractional(&u, s).map_err(err)?;
    Ok(json!({
        "x": grid.nodes(),
        "u": u.values(),
        "pv": pv.values(),
        "spectral": spectral.values(),
        "max_diff": pv.dist_sup(&spectral),
        "panels": kernel.panels(),
        "images": kernel.image_count(),
    }))
}

#[wasm_bindgen]
pub fn oracle(field: &str, s: f64, n: usize) -> Result<String, JsValue> {
    oracle_value(field, s, n).map(|v| v.to_string())
}
