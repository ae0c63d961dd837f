//! Browser bindings for the optimizer: a 2-D trajectory viewer, the local
//! eigenvalue-decay experiment and data profiles on a small problem set.
//!
//! Every operation returns a JSON string. The plain Rust functions carry the
//! logic so they can be tested natively; the `wasm_*` wrappers only convert
//! errors for JavaScript.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use omorf::bench::eigen_decay::{problem_eigen_decay, random_center};
use omorf::bench::problems::{find, registry, Problem};
use omorf::bench::{run_benchmark, BenchmarkConfig, SolverSpec};
use omorf::solver::{infallible, minimize, SolverParams};
use omorf::Vector as DVector;

const GRID: usize = 60;

#[derive(Serialize)]
struct TrajectoryPoint {
    x: f64,
    y: f64,
    f: f64,
    branch: &'static str,
    accepted: bool,
    delta: f64,
}

#[derive(Serialize)]
struct Trajectory {
    problem: String,
    bounds: [f64; 4],
    grid_size: usize,
    /// Row-major `grid_size × grid_size` values, `y` varying slowest.
    grid: Vec<f64>,
    points: Vec<TrajectoryPoint>,
    best: [f64; 3],
    reason: String,
}

#[derive(Serialize)]
struct ProblemInfo {
    name: &'static str,
    formula: &'static str,
    two_dimensional: bool,
}

#[derive(Serialize)]
struct ProfileCurve {
    solver: String,
    /// Breakpoints `(κ, fraction)` of the step function.
    steps: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct Profiles {
    tau: f64,
    problems: Vec<String>,
    curves: Vec<ProfileCurve>,
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn problem(name: &str, dim: usize) -> Result<Problem, String> {
    let spec = find(name).ok_or_else(|| format!("unknown problem '{name}'"))?;
    spec.instance(dim).ok_or_else(|| format!("{name} has no {dim}-dimensional instance"))
}

/// Name, formula and 2-D availability of every registered problem.
pub fn list_problems() -> Result<String, String> {
    let infos: Vec<ProblemInfo> = registry()
        .iter()
        .map(|p| ProblemInfo { name: p.name, formula: p.formula, two_dimensional: p.instance(2).is_some() })
        .collect();
    to_json(&infos)
}

/// Plot window: the bounds when present, else a box around start and best.
fn window(p: &Problem, points: &[TrajectoryPoint]) -> [f64; 4] {
    if let Some(b) = &p.bounds {
        return [b.lower[0], b.upper[0], b.lower[1], b.upper[1]];
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for q in points {
        x0 = x0.min(q.x);
        x1 = x1.max(q.x);
        y0 = y0.min(q.y);
        y1 = y1.max(q.y);
    }
    let pad = 0.15 * (x1 - x0).max(y1 - y0).max(1.0);
    [x0 - pad, x1 + pad, y0 - pad, y1 + pad]
}

/// Runs the optimizer on the 2-D instance of `name` from `(x0, y0)` (or the
/// problem's standard start when either is NaN) and samples the objective
/// on a grid for a contour background.
pub fn optimize_2d(
    name: &str,
    subspace_dim: usize,
    budget: usize,
    seed: u64,
    x0: f64,
    y0: f64,
) -> Result<String, String> {
    let p = problem(name, 2)?;
    let start = if x0.is_finite() && y0.is_finite() { DVector::from_vec(vec![x0, y0]) } else { p.x0.clone() };
    if let Some(b) = &p.bounds {
        if !b.contains(&start) {
            return Err("start point lies outside the bounds".into());
        }
    }
    let params = SolverParams { max_evals: budget, subspace_dim, seed, ..SolverParams::default() };
    let res = minimize(infallible(|x| p.value(x)), &start, p.bounds.as_ref(), &params).map_err(|e| e.to_string())?;
    let points: Vec<TrajectoryPoint> = res
        .trace
        .iter()
        .map(|r| TrajectoryPoint {
            x: r.point[0],
            y: r.point[1],
            f: r.value,
            branch: r.branch.as_str(),
            accepted: r.accepted,
            delta: r.delta,
        })
        .collect();
    let bounds = window(&p, &points);
    let mut grid = Vec::with_capacity(GRID * GRID);
    for j in 0..GRID {
        let y = bounds[2] + (bounds[3] - bounds[2]) * j as f64 / (GRID - 1) as f64;
        for i in 0..GRID {
            let x = bounds[0] + (bounds[1] - bounds[0]) * i as f64 / (GRID - 1) as f64;
            grid.push(p.value(&DVector::from_vec(vec![x, y])));
        }
    }
    to_json(&Trajectory {
        problem: p.name.clone(),
        bounds,
        grid_size: GRID,
        grid,
        points,
        best: [res.x[0], res.x[1], res.f],
        reason: format!("{:?}", res.reason),
    })
}

/// Descending gradient-covariance eigenvalues over shrinking boxes around a
/// random center of the default instance of `name`.
pub fn eigen_decay(name: &str, deltas: &[f64], samples: usize, seed: u64) -> Result<String, String> {
    let spec = find(name).ok_or_else(|| format!("unknown problem '{name}'"))?;
    if samples == 0 || deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0)) {
        return Err("need positive deltas and at least one sample".into());
    }
    let p = spec.default_instance();
    let center = random_center(&p, seed);
    let rows = problem_eigen_decay(&p, &center, deltas, samples, seed);
    let out: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| serde_json::json!({ "delta": r.delta, "ratio": r.ratio(), "eigenvalues": r.eigenvalues }))
        .collect();
    to_json(&out)
}

/// Data profiles at tolerance `tau` for the listed problems and solvers.
pub fn data_profiles(
    names: &[String],
    solvers: &[String],
    budget_gradients: usize,
    tau: f64,
    seed: u64,
) -> Result<String, String> {
    if !(tau > 0.0) {
        return Err("tolerance must be positive".into());
    }
    let problems: Vec<Problem> = names
        .iter()
        .map(|n| find(n).map(|s| s.default_instance()).ok_or_else(|| format!("unknown problem '{n}'")))
        .collect::<Result<_, _>>()?;
    let specs: Vec<SolverSpec> =
        solvers.iter().map(|s| s.parse::<SolverSpec>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    let config = BenchmarkConfig { budget_gradients, taus: vec![tau], seed };
    let out = run_benchmark(&problems, &specs, &config);
    let curves = out
        .table
        .data_profiles(tau)
        .into_iter()
        .zip(&out.table.solvers)
        .map(|(p, s)| ProfileCurve { solver: s.clone(), steps: p.steps })
        .collect();
    to_json(&Profiles { tau, problems: out.table.problems.keys().cloned().collect(), curves })
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect()
}

fn js(result: Result<String, String>) -> Result<String, JsValue> {
    result.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = listProblems)]
pub fn wasm_list_problems() -> Result<String, JsValue> {
    js(list_problems())
}

#[wasm_bindgen(js_name = optimize2d)]
pub fn wasm_optimize_2d(
    name: &str,
    subspace_dim: usize,
    budget: usize,
    seed: u32,
    x0: f64,
    y0: f64,
) -> Result<String, JsValue> {
    js(optimize_2d(name, subspace_dim, budget, u64::from(seed), x0, y0))
}

#[wasm_bindgen(js_name = eigenDecay)]
pub fn wasm_eigen_decay(name: &str, deltas: &str, samples: usize, seed: u32) -> Result<String, JsValue> {
    let deltas: Result<Vec<f64>, String> =
        split_list(deltas).iter().map(|d| d.parse::<f64>().map_err(|e| format!("bad delta '{d}': {e}"))).collect();
    js(deltas.and_then(|d| eigen_decay(name, &d, samples, u64::from(seed))))
}

#[wasm_bindgen(js_name = dataProfiles)]
pub fn wasm_data_profiles(
    problems: &str,
    solvers: &str,
    budget_gradients: usize,
    tau: f64,
    seed: u32,
) -> Result<String, JsValue> {
    js(data_profiles(&split_list(problems), &split_list(solvers), budget_gradients, tau, u64::from(seed)))
}
