//! Budgeted head-to-head runs and result persistence.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead, NelderMeadParams, SimplexError};
use super::problems::Problem;
use super::profiles::{convergence_test, tau_key, ProblemEntry, ProfileTable, StepFunction};
use crate::error::{EvalError, InputError};
use crate::solver::{minimize, SolveError, SolverParams};

/// A solver the harness knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SolverSpec {
    Omorf { subspace_dim: usize },
    NelderMead,
}

impl fmt::Display for SolverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverSpec::Omorf { subspace_dim } => write!(f, "omorf:d={subspace_dim}"),
            SolverSpec::NelderMead => f.write_str("neldermead"),
        }
    }
}

impl FromStr for SolverSpec {
    type Err = InputError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        if s == "neldermead" || s == "nelder-mead" || s == "nm" {
            return Ok(SolverSpec::NelderMead);
        }
        if s == "omorf" {
            return Ok(SolverSpec::Omorf { subspace_dim: 1 });
        }
        s.strip_prefix("omorf:d=")
            .and_then(|d| d.parse().ok())
            .filter(|&d: &usize| d >= 1)
            .map(|subspace_dim| SolverSpec::Omorf { subspace_dim })
            .ok_or_else(|| InputError::InvalidParameter(format!("unknown solver '{s}'")))
    }
}

/// One evaluation as written to a trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub eval_index: usize,
    pub f_value: f64,
    /// Trust-region radius, or the simplex diameter for the baseline.
    pub delta: f64,
    /// Lower radius `ρ`; NaN for the baseline.
    pub rho: f64,
    pub branch: String,
    pub accepted: bool,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    /// Stopped normally with the given reason.
    Finished(String),
    /// The objective failed; the trace up to the failure is kept.
    EvaluationError(String),
    /// The solver panicked or rejected its input; counted as unsolved.
    Crashed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub solver: String,
    pub seed: u64,
    pub budget: usize,
    pub status: RunStatus,
    pub rows: Vec<TraceRow>,
}

impl RunRecord {
    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.f_value).collect()
    }

    pub fn best(&self) -> f64 {
        self.rows.iter().map(|r| r.f_value).fold(f64::INFINITY, f64::min)
    }

    pub fn crashed(&self) -> bool {
        matches!(self.status, RunStatus::Crashed(_))
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    /// Budget per problem in simplex gradients, `n + 1` evaluations each.
    pub budget_gradients: usize,
    pub taus: Vec<f64>,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self { budget_gradients: 20, taus: vec![1e-1, 1e-5], seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOutput {
    pub table: ProfileTable,
    /// Sorted by problem, then solver.
    pub runs: Vec<RunRecord>,
}

/// FNV-1a over the base seed and the run identity.
pub fn run_seed(base: u64, problem: &str, solver: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let bytes = base.to_le_bytes().into_iter().chain(problem.bytes()).chain([0u8]).chain(solver.bytes());
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Runs one solver on one problem with an exact evaluation cap.
///
/// The trace comes from a counting wrapper around the objective, not from
/// the solver's own bookkeeping.
pub fn run_single(problem: &Problem, solver: SolverSpec, budget: usize, seed: u64) -> RunRecord {
    let log: RefCell<Vec<(Vec<f64>, f64)>> = RefCell::new(Vec::new());
    let objective = |x: &DVector<f64>| -> Result<f64, EvalError> {
        let mut log = log.borrow_mut();
        if log.len() >= budget {
            return Err(EvalError::Stop);
        }
        let v = problem.value(x);
        log.push((x.iter().copied().collect(), v));
        Ok(v)
    };

    let outcome = catch_unwind(AssertUnwindSafe(|| match solver {
        SolverSpec::Omorf { subspace_dim } => {
            let params = SolverParams { subspace_dim, max_evals: budget, seed, ..SolverParams::default() };
            let (trace, status) = match minimize(objective, &problem.x0, problem.bounds.as_ref(), &params) {
                Ok(res) => (res.trace, RunStatus::Finished(reason_name(&res.reason))),
                Err(SolveError::Evaluation { message, partial }) => {
                    (partial.trace, RunStatus::EvaluationError(message))
                }
                Err(SolveError::Input(e)) => (Vec::new(), RunStatus::Crashed(e.to_string())),
            };
            let meta = trace.into_iter().map(|r| (r.delta, r.rho, r.branch.as_str().to_string(), r.accepted)).collect();
            (meta, status)
        }
        SolverSpec::NelderMead => {
            let params = NelderMeadParams {
                max_evals: budget,
                initial_step: Some(SolverParams::default().initial_radius(&problem.x0, problem.bounds.as_ref())),
                ..NelderMeadParams::default()
            };
            let (trace, status) = match nelder_mead(objective, &problem.x0, problem.bounds.as_ref(), &params) {
                Ok(res) => (res.trace, RunStatus::Finished(reason_name(&res.reason))),
                Err(SimplexError::Evaluation { message, partial }) => {
                    (partial.trace, RunStatus::EvaluationError(message))
                }
                Err(SimplexError::Input(e)) => (Vec::new(), RunStatus::Crashed(e.to_string())),
            };
            let meta: Vec<(f64, f64, String, bool)> =
                trace.into_iter().map(|r| (r.size, f64::NAN, r.op.as_str().to_string(), r.accepted)).collect();
            (meta, status)
        }
    }));

    let (meta, status) = match outcome {
        Ok(x) => x,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "solver panicked".into());
            (Vec::new(), RunStatus::Crashed(msg))
        }
    };

    let rows = log
        .into_inner()
        .into_iter()
        .enumerate()
        .map(|(i, (point, f_value))| {
            let (delta, rho, branch, accepted) =
                meta.get(i).cloned().unwrap_or((f64::NAN, f64::NAN, "unknown".to_string(), false));
            TraceRow { eval_index: i + 1, f_value, delta, rho, branch, accepted, point }
        })
        .collect();
    RunRecord { problem: problem.name.clone(), solver: solver.to_string(), seed, budget, status, rows }
}

fn reason_name<T: Serialize>(reason: &T) -> String {
    serde_json::to_value(reason).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

/// Runs every solver on every problem in parallel and tabulates the
/// convergence test for each tolerance.
///
/// `f_L` is the best value any non-crashed run reached on the problem.
/// Output order and content do not depend on thread scheduling.
pub fn run_benchmark(problems: &[Problem], solvers: &[SolverSpec], config: &BenchmarkConfig) -> BenchmarkOutput {
    if solvers.is_empty() || problems.is_empty() {
        return BenchmarkOutput { table: ProfileTable::default(), runs: Vec::new() };
    }
    let jobs: Vec<(&Problem, SolverSpec)> =
        problems.iter().flat_map(|p| solvers.iter().map(move |&s| (p, s))).collect();
    let mut runs: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(p, s)| {
            let budget = config.budget_gradients * (p.dim + 1);
            run_single(p, s, budget, run_seed(config.seed, &p.name, &s.to_string()))
        })
        .collect();
    runs.sort_by(|a, b| (&a.problem, &a.solver).cmp(&(&b.problem, &b.solver)));

    let mut table = ProfileTable {
        solvers: solvers.iter().map(ToString::to_string).collect(),
        taus: config.taus.clone(),
        ..ProfileTable::default()
    };
    for p in problems {
        let f0 = p.value(&p.x0);
        let mine: Vec<&RunRecord> = runs.iter().filter(|r| r.problem == p.name).collect();
        let f_l = mine.iter().filter(|r| !r.crashed()).map(|r| r.best()).fold(f0, f64::min);
        let degenerate = f_l >= f0;
        if degenerate {
            log::warn!("{}: no solver improved on f(x0); convergence test is degenerate", p.name);
        }
        table.problems.insert(
            p.name.clone(),
            ProblemEntry { dim: p.dim, budget: config.budget_gradients * (p.dim + 1), f0, f_l, degenerate },
        );
        let per_solver = table.t.entry(p.name.clone()).or_default();
        for r in mine {
            let values = r.values();
            let per_tau = config
                .taus
                .iter()
                .map(|&tau| {
                    let t = if r.crashed() { None } else { convergence_test(&values, f0, f_l, tau) };
                    (tau_key(tau), t)
                })
                .collect();
            per_solver.insert(r.solver.clone(), per_tau);
        }
    }
    BenchmarkOutput { table, runs }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// File stem for a run's trace files.
pub fn trace_stem(problem: &str, solver: &str) -> String {
    let clean: String = solver.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    format!("{problem}__{clean}")
}

pub fn write_trace_csv<W: Write>(mut w: W, run: &RunRecord) -> io::Result<()> {
    writeln!(w, "eval_index,f_value,delta,rho,branch,accepted")?;
    for r in &run.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.eval_index,
            fmt_float(r.f_value),
            fmt_float(r.delta),
            fmt_float(r.rho),
            r.branch,
            r.accepted
        )?;
    }
    Ok(())
}

pub fn write_points_csv<W: Write>(mut w: W, run: &RunRecord) -> io::Result<()> {
    let n = run.rows.first().map_or(0, |r| r.point.len());
    let header: Vec<String> =
        std::iter::once("eval_index".to_string()).chain((1..=n).map(|i| format!("x{i}"))).collect();
    writeln!(w, "{}", header.join(","))?;
    for r in &run.rows {
        let cells: Vec<String> =
            std::iter::once(r.eval_index.to_string()).chain(r.point.iter().map(|&v| fmt_float(v))).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Writes `profile_table.json`, `runs.csv` and per-run trace files under
/// `out/traces`. Writes nothing for an empty benchmark.
pub fn write_artifacts(out: &Path, output: &BenchmarkOutput) -> io::Result<()> {
    if output.table.is_empty() {
        return Ok(());
    }
    let traces = out.join("traces");
    fs::create_dir_all(&traces)?;
    for run in &output.runs {
        let stem = trace_stem(&run.problem, &run.solver);
        write_trace_csv(io::BufWriter::new(fs::File::create(traces.join(format!("{stem}.csv")))?), run)?;
        write_points_csv(io::BufWriter::new(fs::File::create(traces.join(format!("{stem}.points.csv")))?), run)?;
    }
    let mut summary = io::BufWriter::new(fs::File::create(out.join("runs.csv"))?);
    writeln!(summary, "problem,solver,seed,budget,evals,best_f,status")?;
    for run in &output.runs {
        let status = match &run.status {
            RunStatus::Finished(r) => r.clone(),
            RunStatus::EvaluationError(_) => "evaluation-error".into(),
            RunStatus::Crashed(_) => "crashed".into(),
        };
        writeln!(
            summary,
            "{},{},{},{},{},{},{}",
            run.problem,
            run.solver,
            run.seed,
            run.budget,
            run.rows.len(),
            fmt_float(run.best()),
            status
        )?;
    }
    summary.flush()?;
    fs::write(out.join("profile_table.json"), table_to_json(&output.table)?)
}

pub fn table_to_json(table: &ProfileTable) -> io::Result<String> {
    serde_json::to_string_pretty(table).map_err(io::Error::other)
}

pub fn read_table(path: &Path) -> io::Result<ProfileTable> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

/// Samples step functions on the union of their breakpoints.
pub fn profile_csv(label: &str, solvers: &[String], profiles: &[StepFunction]) -> String {
    let mut xs: Vec<f64> = profiles.iter().flat_map(|p| p.steps.iter().map(|s| s.0)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut out = format!("{label},{}\n", solvers.join(","));
    for x in xs {
        let vals: Vec<String> = profiles.iter().map(|p| fmt_float(p.value_at(x))).collect();
        out.push_str(&format!("{},{}\n", fmt_float(x), vals.join(",")));
    }
    out
}

/// Writes performance and data profile CSVs (and SVGs when asked) for every
/// tolerance in the table.
pub fn write_profiles(out: &Path, table: &ProfileTable, svg: bool) -> io::Result<Vec<String>> {
    let mut written = Vec::new();
    if table.is_empty() {
        return Ok(written);
    }
    fs::create_dir_all(out)?;
    for &tau in &table.taus {
        let key = tau_key(tau);
        let kinds: [(&str, &str, Vec<StepFunction>); 2] =
            [("performance", "alpha", table.performance_profiles(tau)), ("data", "kappa", table.data_profiles(tau))];
        for (kind, label, profiles) in kinds {
            let name = format!("{kind}_profile_tau{key}");
            fs::write(out.join(format!("{name}.csv")), profile_csv(label, &table.solvers, &profiles))?;
            written.push(format!("{name}.csv"));
            if svg {
                let title = format!("{kind} profile, tau = {key}");
                fs::write(
                    out.join(format!("{name}.svg")),
                    super::svg::step_plot(&title, label, &table.solvers, &profiles),
                )?;
                written.push(format!("{name}.svg"));
            }
        }
    }
    Ok(written)
}

/// Solved-problem counts per solver and tolerance, for quick summaries.
pub fn solved_counts(table: &ProfileTable) -> BTreeMap<String, BTreeMap<String, usize>> {
    let mut out: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for per_solver in table.t.values() {
        for (solver, per_tau) in per_solver {
            for (tau, t) in per_tau {
                *out.entry(solver.clone()).or_default().entry(tau.clone()).or_default() += usize::from(t.is_some());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::problems::find;

    #[test]
    fn solver_names_round_trip() {
        for s in ["omorf:d=1", "omorf:d=2", "neldermead"] {
            assert_eq!(s.parse::<SolverSpec>().unwrap().to_string(), s);
        }
        assert!("omorf:d=0".parse::<SolverSpec>().is_err());
        assert!("cobyla".parse::<SolverSpec>().is_err());
    }

    #[test]
    fn budget_cap_is_exact() {
        let p = find("DQDRTIC").unwrap().default_instance();
        for s in [SolverSpec::Omorf { subspace_dim: 1 }, SolverSpec::NelderMead] {
            let run = run_single(&p, s, 220, 1);
            assert!(run.rows.len() <= 220, "{s}");
            assert!(matches!(run.status, RunStatus::Finished(_)));
        }
    }

    #[test]
    fn empty_solver_list() {
        let out = run_benchmark(&[find("POWER").unwrap().default_instance()], &[], &BenchmarkConfig::default());
        assert!(out.table.is_empty() && out.runs.is_empty());
        let dir = tempfile::tempdir().unwrap();
        write_artifacts(dir.path(), &out).unwrap();
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn invalid_input_is_unsolved() {
        // n = 1 leaves no room for a proper subspace, so the solver rejects it.
        let mut p = find("POWER").unwrap().default_instance();
        p.dim = 1;
        p.x0 = DVector::zeros(1);
        let run = run_single(&p, SolverSpec::Omorf { subspace_dim: 1 }, 40, 0);
        assert!(run.crashed());
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, -391.659_913_3, 1e-300, 123_456_789.123_456_79] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn seeds_differ_by_identity() {
        assert_ne!(run_seed(0, "A", "omorf:d=1"), run_seed(0, "A", "omorf:d=2"));
        assert_eq!(run_seed(5, "A", "x"), run_seed(5, "A", "x"));
    }
}
