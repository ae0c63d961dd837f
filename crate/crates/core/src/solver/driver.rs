use nalgebra::{DMatrix, DVector};

use super::{Bounds, Branch, EvalRecord, SolveError, SolveResult, SolverParams, TerminationReason};
use crate::error::{EvalError, GeometryError, InputError};
use crate::geometry::{binomial, pivotal_update, pivotal_update_keeping, PivotMode, PolyBasis, Projection, SampleSet};
use crate::linalg::inf_norm;
use crate::ridge::RidgeModel;
use crate::subspace::{initial_subspace, linear_model_subspace, ridge_recovery_vp, Subspace};
use crate::trust_region::{acceptance_ratio, feasible_box, radius_update, safety_check, solve_subproblem, RadiusPair};

/// Everything the loop carries between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: DVector<f64>,
    pub f: f64,
    pub radii: RadiusPair,
    /// `n + 1` points used for the subspace estimate.
    pub subspace_set: SampleSet,
    /// `(d + 1)(d + 2) / 2` points used for the ridge model.
    pub model_set: SampleSet,
    pub subspace: Subspace,
    pub iterations: usize,
    pub last_outcome: Option<IterationOutcome>,
}

/// What one call to [`Solver::step`] did.
#[derive(Debug, Clone, PartialEq)]
pub enum IterationOutcome {
    /// The step was too short; the sets were updated instead.
    Safety,
    /// The candidate was accepted with ratio `ratio`.
    Success { ratio: f64, candidate: DVector<f64> },
    /// The candidate was rejected.
    Failure { ratio: f64, candidate: DVector<f64> },
    /// The model could not be built; the model set was improved.
    Repair,
}

enum Halt {
    Budget,
    User,
    Failed(String),
    Geometry,
}

type Objective<'a> = dyn FnMut(&DVector<f64>) -> Result<f64, EvalError> + 'a;

/// The optimizer, one iteration at a time.
pub struct Solver<'a> {
    objective: Box<Objective<'a>>,
    bounds: Option<Bounds>,
    params: SolverParams,
    state: SolverState,
    trace: Vec<EvalRecord>,
    done: Option<TerminationReason>,
    failure: Option<String>,
    n: usize,
}

impl<'a> Solver<'a> {
    /// Validates the inputs and spends the initialization budget. If the
    /// budget runs out during initialization the solver is returned already
    /// finished.
    pub fn new<F>(
        objective: F,
        x0: &DVector<f64>,
        bounds: Option<&Bounds>,
        params: SolverParams,
    ) -> Result<Self, SolveError>
    where
        F: FnMut(&DVector<f64>) -> Result<f64, EvalError> + 'a,
    {
        let n = x0.len();
        params.validate(n)?;
        if let Some(b) = bounds {
            if b.lower.len() != n || b.upper.len() != n {
                return Err(InputError::DimensionMismatch { expected: n, got: b.lower.len() }.into());
            }
            if (0..n).any(|i| !(b.lower[i] < b.upper[i])) {
                return Err(InputError::InvalidParameter("bounds need lower < upper".into()).into());
            }
            if !b.contains(x0) {
                return Err(InputError::InvalidParameter("x0 lies outside the bounds".into()).into());
            }
        }
        let delta0 = params.initial_radius(x0, bounds);
        let d = params.subspace_dim;
        let placeholder = SampleSet::new(x0.clone(), f64::NAN, n + 1);
        let mut solver = Solver {
            objective: Box::new(objective),
            bounds: bounds.cloned(),
            state: SolverState {
                x: x0.clone(),
                f: f64::NAN,
                radii: RadiusPair::new(delta0, delta0),
                subspace_set: placeholder.clone(),
                model_set: SampleSet::new(x0.clone(), f64::NAN, binomial(d + 2, 2)),
                subspace: Subspace::from_direction(&DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 })),
                iterations: 0,
                last_outcome: None,
            },
            params,
            trace: Vec::new(),
            done: None,
            failure: None,
            n,
        };
        if let Err(halt) = solver.initialize() {
            solver.halt(halt);
        }
        if let Some(message) = solver.failure.take() {
            return Err(SolveError::Evaluation { message, partial: Box::new(solver.result()) });
        }
        Ok(solver)
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn trace(&self) -> &[EvalRecord] {
        &self.trace
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    /// The termination reason once the run has stopped.
    pub fn finished(&self) -> Option<TerminationReason> {
        self.done
    }

    /// Runs one iteration. Returns the termination reason once the run
    /// stops; further calls are no-ops.
    pub fn step(&mut self) -> Result<Option<TerminationReason>, SolveError> {
        if self.done.is_some() {
            return Ok(self.done);
        }
        if self.trace.len() >= self.params.max_evals {
            self.done = Some(TerminationReason::Budget);
        } else if self.state.radii.rho < self.params.rho_end {
            self.done = Some(TerminationReason::Stationary);
        } else if let Err(halt) = self.iterate() {
            self.halt(halt);
        }
        if let Some(message) = self.failure.take() {
            return Err(SolveError::Evaluation { message, partial: Box::new(self.result()) });
        }
        Ok(self.done)
    }

    /// Iterates until termination.
    pub fn run(mut self) -> Result<SolveResult, SolveError> {
        while self.step()?.is_none() {}
        Ok(self.result())
    }

    /// Summary of the run so far.
    pub fn result(&self) -> SolveResult {
        let best = self
            .trace
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .map(|r| (DVector::from_column_slice(&r.point), r.value));
        let (x, f) = best.unwrap_or_else(|| (self.state.x.clone(), f64::NAN));
        SolveResult {
            x,
            f,
            final_iterate: self.state.x.clone(),
            evals: self.trace.len(),
            iterations: self.state.iterations,
            reason: self.done.unwrap_or(TerminationReason::Budget),
            final_delta: self.state.radii.delta,
            final_rho: self.state.radii.rho,
            trace: self.trace.clone(),
        }
    }

    fn halt(&mut self, halt: Halt) {
        self.done = Some(match halt {
            Halt::Budget => TerminationReason::Budget,
            Halt::User => TerminationReason::UserStop,
            Halt::Geometry => TerminationReason::RadiusFloor,
            Halt::Failed(message) => {
                self.failure = Some(message);
                TerminationReason::UserStop
            }
        });
    }

    fn evaluate(&mut self, x: &DVector<f64>, branch: Branch) -> Result<f64, Halt> {
        if self.trace.len() >= self.params.max_evals {
            return Err(Halt::Budget);
        }
        let value = match (self.objective)(x) {
            Ok(v) if v.is_finite() => v,
            Ok(v) => return Err(Halt::Failed(format!("objective returned non-finite value {v}"))),
            Err(EvalError::Stop) => return Err(Halt::User),
            Err(EvalError::Failed(msg)) => return Err(Halt::Failed(msg)),
        };
        self.trace.push(EvalRecord {
            eval_index: self.trace.len() + 1,
            point: x.as_slice().to_vec(),
            value,
            delta: self.state.radii.delta,
            rho: self.state.radii.rho,
            branch,
            accepted: false,
        });
        Ok(value)
    }

    fn mark_accepted(&mut self) {
        if let Some(last) = self.trace.last_mut() {
            last.accepted = true;
        }
    }

    fn model_basis(&self) -> PolyBasis {
        PolyBasis::quadratic(self.params.subspace_dim)
    }

    fn subspace_basis(&self) -> PolyBasis {
        PolyBasis::linear(self.n)
    }

    fn initialize(&mut self) -> Result<(), Halt> {
        let x0 = self.state.x.clone();
        let delta = self.state.radii.delta;
        let f0 = self.evaluate(&x0, Branch::Init)?;
        self.mark_accepted();
        self.state.f = f0;

        let mut points = vec![x0.clone()];
        let mut values = vec![f0];
        for i in 0..self.n {
            let mut p = x0.clone();
            p[i] += self.coordinate_step(i, delta);
            let v = self.evaluate(&p, Branch::Init)?;
            points.push(p);
            values.push(v);
        }
        self.state.subspace_set = SampleSet::from_parts(points, values, self.n + 1);
        self.state.subspace = self.build_subspace(None);

        let q = self.model_basis().size();
        self.state.model_set = SampleSet::new(x0, f0, q);
        self.improve_model_set(Branch::Init, None)
    }

    /// `+Δ` along coordinate `i` unless that leaves the bounds, in which case
    /// the step goes toward the side with more room.
    fn coordinate_step(&self, i: usize, delta: f64) -> f64 {
        let Some(b) = &self.bounds else { return delta };
        let x = self.state.x[i];
        let up = b.upper[i] - x;
        let down = x - b.lower[i];
        if up >= delta {
            delta
        } else if down >= delta {
            -delta
        } else if up >= down {
            up
        } else {
            -down
        }
    }

    /// A new subspace from the subspace set; falls back to `previous` (or a
    /// coordinate direction) when the linear fit is flat or degenerate.
    fn build_subspace(&self, previous: Option<&Subspace>) -> Subspace {
        let set = &self.state.subspace_set;
        let d = self.params.subspace_dim;
        let fallback = || {
            previous.cloned().unwrap_or_else(|| {
                let e1 = DVector::from_fn(self.n, |i, _| if i == 0 { 1.0 } else { 0.0 });
                initial_subspace(&e1, d, self.params.seed)
            })
        };
        let b = match linear_model_subspace(set) {
            Ok((b, _)) => b,
            Err(_) => return fallback(),
        };
        if d == 1 {
            return Subspace::from_direction(&b);
        }
        let start = initial_subspace(&b, d, self.params.seed);
        if set.len() > binomial(d + 2, 2) {
            if let Ok(rec) = ridge_recovery_vp(set.points(), set.values(), 2, &start) {
                return rec.subspace;
            }
        }
        start
    }

    fn projection(&self) -> DMatrix<f64> {
        self.state.subspace.u().transpose()
    }

    fn region(&self) -> crate::trust_region::FeasibleBox {
        feasible_box(&self.state.x, self.state.radii.delta, self.bounds.as_ref())
    }

    /// Runs the pivotal algorithm in improve mode on the model set and
    /// evaluates the proposed points. If that fails, rebuilds the set from
    /// the iterate alone once before giving up.
    fn improve_model_set(&mut self, branch: Branch, keep: Option<&DVector<f64>>) -> Result<(), Halt> {
        let proj = self.projection();
        let basis = self.model_basis();
        let set = self.state.model_set.clone();
        let attempt = self.improve(&set, &basis, Some(&proj), branch, keep);
        let updated = match attempt {
            Ok(s) => s,
            Err(Halt::Geometry) => {
                let fresh = SampleSet::new(self.state.x.clone(), self.state.f, set.capacity());
                self.improve(&fresh, &basis, Some(&proj), branch, None)?
            }
            Err(h) => return Err(h),
        };
        self.state.model_set = updated;
        Ok(())
    }

    fn improve_subspace_set(&mut self, branch: Branch, keep: Option<&DVector<f64>>) -> Result<(), Halt> {
        let basis = self.subspace_basis();
        let set = self.state.subspace_set.clone();
        let updated = match self.improve(&set, &basis, None, branch, keep) {
            Ok(s) => s,
            Err(Halt::Geometry) => {
                let fresh = SampleSet::new(self.state.x.clone(), self.state.f, set.capacity());
                self.improve(&fresh, &basis, None, branch, None)?
            }
            Err(h) => return Err(h),
        };
        self.state.subspace_set = updated;
        Ok(())
    }

    fn improve(
        &mut self,
        set: &SampleSet,
        basis: &PolyBasis,
        projection: Projection<'_>,
        branch: Branch,
        keep: Option<&DVector<f64>>,
    ) -> Result<SampleSet, Halt> {
        let region = self.region();
        let keep = keep.and_then(|k| set.index_of(k));
        let update =
            pivotal_update_keeping(set, self.state.radii.delta, basis, projection, &region, PivotMode::Improve, keep)
                .map_err(|_| Halt::Geometry)?;
        let mut values = Vec::new();
        for p in update.new_points() {
            values.push(self.evaluate(&p, branch)?);
        }
        Ok(update.assemble(set, &values))
    }

    /// Brings a set back to its capacity without evaluations: replace-only
    /// pivoting, or dropping the farthest points if the set is degenerate.
    fn trim(
        &self,
        set: &SampleSet,
        basis: &PolyBasis,
        projection: Projection<'_>,
        keep: Option<&DVector<f64>>,
    ) -> SampleSet {
        if set.len() <= set.capacity() {
            return set.clone();
        }
        let region = self.region();
        let keep = keep.and_then(|k| set.index_of(k));
        let delta = self.state.radii.delta;
        match pivotal_update_keeping(set, delta, basis, projection, &region, PivotMode::ReplaceOnly, keep) {
            Ok(update) => update.assemble(set, &[]),
            Err(_) => drop_farthest(set, keep),
        }
    }

    fn trim_model_set(&mut self, keep: Option<&DVector<f64>>) {
        let proj = self.projection();
        self.state.model_set = self.trim(&self.state.model_set, &self.model_basis(), Some(&proj), keep);
    }

    fn trim_subspace_set(&mut self, keep: Option<&DVector<f64>>) {
        self.state.subspace_set = self.trim(&self.state.subspace_set, &self.subspace_basis(), None, keep);
    }

    /// The model, or `None` if the model set is not poised on the current
    /// subspace.
    fn current_model(&self) -> Option<RidgeModel> {
        let proj = self.projection();
        let set = &self.state.model_set;
        let region = self.region();
        let ok = set.len() >= set.capacity()
            && pivotal_update(
                set,
                self.state.radii.delta,
                &self.model_basis(),
                Some(&proj),
                &region,
                PivotMode::ReplaceOnly,
            )
            .is_ok();
        if !ok {
            return None;
        }
        RidgeModel::fit(self.state.subspace.clone(), set).ok()
    }

    fn iterate(&mut self) -> Result<(), Halt> {
        self.state.iterations += 1;
        let Some(model) = self.current_model() else {
            self.state.last_outcome = Some(IterationOutcome::Repair);
            self.trim_subspace_set(None);
            return self.improve_model_set(Branch::Geometry, None);
        };

        let RadiusPair { delta, rho } = self.state.radii;
        let region = self.region();
        let solution = solve_subproblem(&model, &self.state.x, &region);
        let candidate = region.project(&(&self.state.x + &solution.step));
        let step_norm = inf_norm(&(&candidate - &self.state.x));
        let duplicate = self.state.model_set.contains_near(&candidate, 1e-12)
            || self.state.subspace_set.contains_near(&candidate, 1e-12);

        let (short, safety_delta) =
            safety_check(step_norm, delta, rho, self.params.gamma_safety, self.params.omega_safety);
        if short || duplicate {
            let epsilon = (self.params.epsilon)(delta, rho);
            self.state.radii.delta = if short { safety_delta } else { (self.params.omega_safety * delta).max(rho) };
            self.state.last_outcome = Some(IterationOutcome::Safety);
            return self.update_sets(epsilon, Branch::Safety, None);
        }

        let f_new = self.evaluate(&candidate, Branch::Step)?;
        let predicted_new = model.eval(&candidate);
        let ratio = acceptance_ratio(self.state.f, f_new, model.eval(&self.state.x), predicted_new);
        self.state.radii.delta = radius_update(ratio, delta, rho, step_norm, &self.params);

        let last = self.state.model_set.len();
        self.state.model_set = self.state.model_set.with_point(candidate.clone(), f_new);
        let last_sub = self.state.subspace_set.len();
        self.state.subspace_set = self.state.subspace_set.with_point(candidate.clone(), f_new);

        if ratio >= self.params.eta_low {
            self.mark_accepted();
            self.state.x = candidate.clone();
            self.state.f = f_new;
            self.state.model_set = self.state.model_set.recentered(last);
            self.state.subspace_set = self.state.subspace_set.recentered(last_sub);
            self.trim_model_set(None);
            self.trim_subspace_set(None);
            self.state.last_outcome = Some(IterationOutcome::Success { ratio, candidate });
            Ok(())
        } else {
            let epsilon = (self.params.epsilon)(delta, rho);
            let outcome = self.update_sets(epsilon, Branch::Geometry, Some(&candidate));
            self.state.last_outcome = Some(IterationOutcome::Failure { ratio, candidate });
            outcome
        }
    }

    /// Improves whichever sample set has gone stale, model set first; when
    /// neither has and `Δ` is already at `ρ`, shrinks both radii. `keep` is
    /// retained in both sets whenever the geometry allows.
    fn update_sets(&mut self, epsilon: f64, branch: Branch, keep: Option<&DVector<f64>>) -> Result<(), Halt> {
        let x = self.state.x.clone();
        if self.state.model_set.max_distance_inf(&x) > epsilon {
            self.improve_model_set(branch, keep)?;
            self.trim_subspace_set(keep);
        } else if self.state.subspace_set.max_distance_inf(&x) > epsilon {
            self.improve_subspace_set(branch, keep)?;
            let previous = self.state.subspace.clone();
            self.state.subspace = self.build_subspace(Some(&previous));
            self.trim_model_set(keep);
        } else {
            self.trim_model_set(keep);
            self.trim_subspace_set(keep);
            if self.state.radii.delta <= self.state.radii.rho {
                self.state.radii = self.state.radii.shrink(self.params.alpha_rho, self.params.alpha_delta);
            }
        }
        Ok(())
    }
}

/// Removes the points farthest from the center until the set is at
/// capacity, sparing `keep`.
fn drop_farthest(set: &SampleSet, keep: Option<usize>) -> SampleSet {
    let center = set.center();
    let mut order: Vec<usize> = (1..set.len()).collect();
    order.sort_by_key(|&i| Some(i) != keep);
    order[usize::from(keep.is_some_and(|k| k > 0))..].sort_by(|&a, &b| {
        let da = inf_norm(&(&set.points()[a] - center));
        let db = inf_norm(&(&set.points()[b] - center));
        da.total_cmp(&db)
    });
    order.truncate(set.capacity() - 1);
    order.sort_unstable();
    let mut points = vec![center.clone()];
    let mut values = vec![set.center_value()];
    for i in order {
        points.push(set.points()[i].clone());
        values.push(set.values()[i]);
    }
    SampleSet::from_parts(points, values, set.capacity())
}

impl From<GeometryError> for Halt {
    fn from(_: GeometryError) -> Self {
        Halt::Geometry
    }
}
