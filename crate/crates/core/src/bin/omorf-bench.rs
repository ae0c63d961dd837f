//! Command-line benchmark runner.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DVector;

use omorf::bench::eigen_decay::{problem_eigen_decay, random_center, EigenDecayRow};
use omorf::bench::harness::{fmt_float, read_table, solved_counts, write_artifacts, write_profiles};
use omorf::bench::problems::{find, registry, Problem};
use omorf::bench::svg::loglog_plot;
use omorf::bench::{run_benchmark, BenchmarkConfig, SolverSpec};

#[derive(Parser)]
#[command(name = "omorf-bench", about = "Benchmarks and experiments for the ridge-function trust-region optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run solvers on test problems and write traces plus a profile table.
    Run {
        /// Comma-separated problem names, or `all`.
        #[arg(long, default_value = "all")]
        problems: String,
        #[arg(long, default_value = "omorf:d=1,omorf:d=2,neldermead")]
        solvers: String,
        /// Budget in simplex gradients (`n + 1` evaluations each).
        #[arg(long, default_value_t = 20)]
        budget_gradients: usize,
        #[arg(long, default_value = "1e-1,1e-5")]
        tau: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute performance and data profiles from a `run` output directory.
    Profiles {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
    },
    /// Gradient-covariance eigenvalues over shrinking boxes around a center.
    EigenDecay {
        #[arg(long)]
        problem: String,
        /// `random`, or a path to a CSV file holding the center coordinates.
        #[arg(long, default_value = "random")]
        center: String,
        #[arg(long, default_value = "1,0.5,0.1,0.05,0.01")]
        deltas: String,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
    },
    /// List the registered test problems.
    ListProblems,
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| format!("bad number '{t}': {e}")))
        .collect()
}

fn select_problems(names: &str) -> Result<Vec<Problem>, String> {
    if names.trim().eq_ignore_ascii_case("all") {
        return Ok(registry().iter().map(|p| p.default_instance()).collect());
    }
    names
        .split(',')
        .map(str::trim)
        .filter(|n| !n.is_empty())
        .map(|n| find(n).map(|p| p.default_instance()).ok_or_else(|| format!("unknown problem '{n}'")))
        .collect()
}

fn run(problems: &str, solvers: &str, budget_gradients: usize, tau: &str, seed: u64, out: &Path) -> Result<(), String> {
    let problems = select_problems(problems)?;
    let solvers: Vec<SolverSpec> = solvers
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| format!("{e}")))
        .collect::<Result<_, _>>()?;
    let taus = parse_floats(tau)?;
    if taus.iter().any(|&t| !(t > 0.0)) {
        return Err("tolerances must be positive".into());
    }
    let config = BenchmarkConfig { budget_gradients, taus, seed };
    let output = run_benchmark(&problems, &solvers, &config);
    write_artifacts(out, &output).map_err(|e| e.to_string())?;
    if output.table.is_empty() {
        println!("nothing to run");
        return Ok(());
    }
    for (solver, per_tau) in solved_counts(&output.table) {
        let counts: Vec<String> = per_tau.iter().map(|(t, c)| format!("tau={t}: {c}/{}", problems.len())).collect();
        println!("{solver:12} solved {}", counts.join(", "));
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn profiles(input: &Path, out: &Path, svg: bool) -> Result<(), String> {
    let path = if input.is_dir() { input.join("profile_table.json") } else { input.to_path_buf() };
    let table = read_table(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let written = write_profiles(out, &table, svg).map_err(|e| e.to_string())?;
    for w in written {
        println!("{}", out.join(w).display());
    }
    Ok(())
}

fn read_center(spec: &str, problem: &Problem, seed: u64) -> Result<DVector<f64>, String> {
    if spec == "random" {
        return Ok(random_center(problem, seed));
    }
    let text = fs::read_to_string(spec).map_err(|e| format!("{spec}: {e}"))?;
    let values = parse_floats(&text)?;
    if values.len() != problem.dim {
        return Err(format!("center has {} entries, problem needs {}", values.len(), problem.dim));
    }
    Ok(DVector::from_vec(values))
}

fn eigen_csv(rows: &[EigenDecayRow]) -> String {
    let n = rows.first().map_or(0, |r| r.eigenvalues.len());
    let mut out = String::from("delta,ratio");
    for i in 1..=n {
        out.push_str(&format!(",lambda_{i}"));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{}", fmt_float(r.delta), fmt_float(r.ratio())));
        for &l in &r.eigenvalues {
            out.push_str(&format!(",{}", fmt_float(l)));
        }
        out.push('\n');
    }
    out
}

fn eigen_decay(
    problem: &str,
    center: &str,
    deltas: &str,
    samples: usize,
    seed: u64,
    out: &Path,
    svg: bool,
) -> Result<(), String> {
    let problem = find(problem).ok_or_else(|| format!("unknown problem '{problem}'"))?.default_instance();
    let deltas = parse_floats(deltas)?;
    if samples == 0 || deltas.iter().any(|&d| !(d > 0.0)) {
        return Err("need positive deltas and at least one sample".into());
    }
    let c = read_center(center, &problem, seed)?;
    let rows = problem_eigen_decay(&problem, &c, &deltas, samples, seed);
    fs::create_dir_all(out).map_err(|e| e.to_string())?;
    let stem = format!("eigen_decay_{}", problem.name);
    fs::write(out.join(format!("{stem}.csv")), eigen_csv(&rows)).map_err(|e| e.to_string())?;
    let center_line: Vec<String> = c.iter().map(|&v| fmt_float(v)).collect();
    fs::write(out.join(format!("{stem}.center.csv")), center_line.join(",") + "\n").map_err(|e| e.to_string())?;
    if svg {
        let series: Vec<(String, Vec<(f64, f64)>)> = (0..problem.dim)
            .map(|i| (format!("lambda_{}", i + 1), rows.iter().map(|r| (r.delta, r.eigenvalues[i])).collect()))
            .collect();
        let plot =
            loglog_plot(&format!("{} gradient covariance eigenvalues", problem.name), "delta", "eigenvalue", &series);
        fs::write(out.join(format!("{stem}.svg")), plot).map_err(|e| e.to_string())?;
    }
    for r in &rows {
        println!("delta={:<8} lambda2/lambda1={:.3e}", r.delta, r.ratio());
    }
    Ok(())
}

fn list_problems() {
    println!("{:10} {:>4} {:>16} {:>14}  formula", "name", "n", "bounds", "f(x0)");
    for spec in registry() {
        let p = spec.default_instance();
        let bounds = p.bounds.as_ref().map_or("-".to_string(), |b| format!("[{}, {}]", b.lower[0], b.upper[0]));
        let f0 = p.value(&p.x0);
        println!("{:10} {:>4} {:>16} {:>14.7e}  {}", spec.name, p.dim, bounds, f0, spec.formula);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { problems, solvers, budget_gradients, tau, seed, out } => {
            run(&problems, &solvers, budget_gradients, &tau, seed, &out)
        }
        Command::Profiles { input, out, svg } => profiles(&input, &out, svg),
        Command::EigenDecay { problem, center, deltas, samples, seed, out, svg } => {
            eigen_decay(&problem, &center, &deltas, samples, seed, &out, svg)
        }
        Command::ListProblems => {
            list_problems();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
