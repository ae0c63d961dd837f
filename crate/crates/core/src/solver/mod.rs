//! The optimizer driver.
//!
//! [`minimize`] runs a full optimization; [`Solver`] exposes the same loop one
//! iteration at a time for callers that want to watch its state.

mod driver;

pub use crate::trust_region::Bounds;
pub use driver::{IterationOutcome, Solver, SolverState};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{EvalError, InputError};
use crate::linalg::inf_norm;

/// Algorithm constants. Defaults follow the published parameter set.
#[derive(Debug, Clone)]
pub struct SolverParams {
    /// Radius shrink factor `γ₁` on moderate or failed steps.
    pub gamma_dec: f64,
    /// Radius growth factor `γ₂` on very successful steps.
    pub gamma_inc: f64,
    /// Step-length growth factor `γ₃` on very successful steps.
    pub gamma_inc_step: f64,
    /// Acceptance threshold `η₁`.
    pub eta_low: f64,
    /// Very-successful threshold `η₂`.
    pub eta_high: f64,
    /// `ρ` reduction factor `α₁`.
    pub alpha_rho: f64,
    /// `Δ` reduction factor `α₂` applied alongside the `ρ` reduction.
    pub alpha_delta: f64,
    /// Safety-step threshold `γ_s`: steps with `‖s‖ ≤ γ_s ρ` are not evaluated.
    pub gamma_safety: f64,
    /// Radius reduction `ω_s` after a safety step.
    pub omega_safety: f64,
    /// Dimension `d` of the ridge subspace.
    pub subspace_dim: usize,
    /// Distance threshold `ε(Δ, ρ)` deciding whether a sample set is stale.
    pub epsilon: fn(f64, f64) -> f64,
    /// Total objective evaluations allowed.
    pub max_evals: usize,
    /// Stop once `ρ` falls below this.
    pub rho_end: f64,
    /// Initial radius; `None` picks `0.1·max(‖x₀‖∞, 1)`, capped by the bound
    /// widths when bounds are given.
    pub delta0: Option<f64>,
    /// Seed for the random completion of multi-dimensional subspaces.
    pub seed: u64,
}

/// `ε = max(2Δ, 10ρ)`.
pub fn default_epsilon(delta: f64, rho: f64) -> f64 {
    (2.0 * delta).max(10.0 * rho)
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            gamma_dec: 0.5,
            gamma_inc: 2.0,
            gamma_inc_step: 2.5,
            eta_low: 0.1,
            eta_high: 0.7,
            alpha_rho: 0.1,
            alpha_delta: 0.5,
            gamma_safety: 0.5,
            omega_safety: 0.5,
            subspace_dim: 1,
            epsilon: default_epsilon,
            max_evals: 1000,
            rho_end: 1e-8,
            delta0: None,
            seed: 0,
        }
    }
}

impl SolverParams {
    pub fn validate(&self, n: usize) -> Result<(), InputError> {
        let bad = |msg: &str| Err(InputError::InvalidParameter(msg.to_string()));
        if !(0.0 < self.gamma_dec
            && self.gamma_dec < 1.0
            && 1.0 <= self.gamma_inc
            && self.gamma_inc <= self.gamma_inc_step)
        {
            return bad("need 0 < gamma_dec < 1 <= gamma_inc <= gamma_inc_step");
        }
        if !(0.0 < self.eta_low && self.eta_low < self.eta_high && self.eta_high < 1.0) {
            return bad("need 0 < eta_low < eta_high < 1");
        }
        if !(0.0 < self.alpha_rho && self.alpha_rho < self.alpha_delta && self.alpha_delta < 1.0) {
            return bad("need 0 < alpha_rho < alpha_delta < 1");
        }
        if !(self.gamma_safety > 0.0 && 0.0 < self.omega_safety && self.omega_safety < 1.0) {
            return bad("need gamma_safety > 0 and 0 < omega_safety < 1");
        }
        if self.subspace_dim == 0 || self.subspace_dim >= n {
            return Err(InputError::InvalidParameter(format!(
                "subspace dimension {} must satisfy 1 <= d < n = {n}",
                self.subspace_dim
            )));
        }
        if let Some(d0) = self.delta0 {
            if !(d0 > 0.0 && d0.is_finite()) {
                return bad("delta0 must be positive and finite");
            }
        }
        if !(self.rho_end >= 0.0) {
            return bad("rho_end must be nonnegative");
        }
        Ok(())
    }

    /// The initial radius for a start point and optional bounds.
    pub fn initial_radius(&self, x0: &DVector<f64>, bounds: Option<&Bounds>) -> f64 {
        if let Some(d0) = self.delta0 {
            return d0;
        }
        let scale = inf_norm(x0).max(1.0);
        match bounds {
            None => 0.1 * scale,
            Some(b) => 0.1 * scale.min(inf_norm(&(&b.upper - &b.lower))),
        }
    }

    /// Evaluations spent before the first iteration: `n + 1` subspace
    /// samples plus the interpolation samples other than the shared start.
    pub fn initialization_cost(&self, n: usize) -> usize {
        let d = self.subspace_dim;
        n + (d + 1) * (d + 2) / 2
    }
}

/// Why an evaluation happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Init,
    Step,
    Safety,
    Geometry,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Init => "init",
            Branch::Step => "step",
            Branch::Safety => "safety",
            Branch::Geometry => "geometry",
        }
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    /// 1-based position in the evaluation sequence.
    pub eval_index: usize,
    pub point: Vec<f64>,
    pub value: f64,
    pub delta: f64,
    pub rho: f64,
    pub branch: Branch,
    /// Whether this point became the iterate.
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationReason {
    /// The evaluation budget was used up.
    Budget,
    /// No geometry-improving point could be found at the current radius.
    RadiusFloor,
    /// `ρ` fell below `rho_end`.
    Stationary,
    /// The objective returned [`EvalError::Stop`].
    UserStop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Lowest-valued evaluated point.
    pub x: DVector<f64>,
    pub f: f64,
    /// The iterate when the run stopped.
    pub final_iterate: DVector<f64>,
    pub evals: usize,
    pub iterations: usize,
    pub reason: TerminationReason,
    pub final_delta: f64,
    pub final_rho: f64,
    pub trace: Vec<EvalRecord>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Input(#[from] InputError),
    /// The objective failed; `partial` holds everything evaluated so far.
    #[error("objective evaluation failed: {message}")]
    Evaluation { message: String, partial: Box<SolveResult> },
}

/// Minimizes `objective` from `x0`, optionally subject to `bounds`.
pub fn minimize<F>(
    objective: F,
    x0: &DVector<f64>,
    bounds: Option<&Bounds>,
    params: &SolverParams,
) -> Result<SolveResult, SolveError>
where
    F: FnMut(&DVector<f64>) -> Result<f64, EvalError>,
{
    Solver::new(objective, x0, bounds, params.clone())?.run()
}

/// Wraps an infallible objective for [`minimize`].
pub fn infallible<F>(mut f: F) -> impl FnMut(&DVector<f64>) -> Result<f64, EvalError>
where
    F: FnMut(&DVector<f64>) -> f64,
{
    move |x| Ok(f(x))
}
