//! Derivative-free trust-region optimization with local ridge surrogates.
//!
//! The optimizer keeps two interpolation sets around the current iterate.
//! The first (`n + 1` points) estimates a local dimension-reducing subspace
//! `U`; the second (`(d + 1)(d + 2) / 2` points) fits a `d`-dimensional
//! quadratic `m(Uᵀx)`. Steps come from minimizing that ridge model over an
//! infinity-norm trust region intersected with the problem bounds.
//!
//! Module map:
//!
//! - [`geometry`]: natural polynomial bases, interpolation systems and the
//!   pivotal point-selection algorithm.
//! - [`subspace`]: active-subspace estimates and Grassmann variable
//!   projection ridge recovery.
//! - [`ridge`]: the quadratic ridge surrogate and its error diagnostics.
//! - [`trust_region`]: feasible boxes, the box-constrained subproblem and
//!   the radius bookkeeping.
//! - [`solver`]: the optimizer driver.
//! - [`bench`]: test problems, a Nelder-Mead baseline, performance and data
//!   profiles, and experiment runners.

pub mod bench;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod ridge;
pub mod solver;
pub mod subspace;
pub mod trust_region;

pub use error::{EvalError, GeometryError, InputError};
pub use geometry::{PolyBasis, SampleSet};
pub use ridge::RidgeModel;
pub use solver::{minimize, Bounds, SolveResult, SolverParams, TerminationReason};
pub use subspace::Subspace;
pub use trust_region::FeasibleBox;

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;
