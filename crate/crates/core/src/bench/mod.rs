//! Benchmarking: analytic test problems, a Nelder-Mead baseline, budgeted
//! runs, Moré-Wild profiles, and local eigenvalue-decay experiments.

pub mod eigen_decay;
pub mod harness;
pub mod nelder_mead;
pub mod problems;
pub mod profiles;
pub mod svg;

pub use harness::{run_benchmark, run_single, BenchmarkConfig, BenchmarkOutput, RunRecord, SolverSpec};
pub use problems::{registry, Problem, ProblemSpec};
pub use profiles::{convergence_test, data_profile, performance_profile, ProfileTable, StepFunction};
