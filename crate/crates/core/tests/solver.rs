//! End-to-end behaviour of the optimizer driver.

use std::cell::Cell;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use omorf::bench::problems::find;
use omorf::solver::{infallible, minimize, Branch, IterationOutcome, SolveError, Solver, SolverParams};
use omorf::{Bounds, EvalError, Subspace, TerminationReason};

fn params(max_evals: usize, d: usize, seed: u64) -> SolverParams {
    SolverParams { max_evals, subspace_dim: d, seed, ..SolverParams::default() }
}

fn rotated_ridge(n: usize, d: usize, seed: u64) -> impl Fn(&DVector<f64>) -> f64 + Clone {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Subspace::from_span(&DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng))).u().clone();
    move |x: &DVector<f64>| {
        let y = u.transpose() * x;
        y.iter().enumerate().map(|(i, v)| (i + 1) as f64 * (v - 1.0).powi(2)).sum::<f64>()
    }
}

#[test]
fn initialization_shares_the_start_point() {
    let calls = Cell::new(0);
    let f = |x: &DVector<f64>| {
        calls.set(calls.get() + 1);
        x.norm_squared()
    };
    let solver = Solver::new(infallible(f), &DVector::from_vec(vec![1.0, 2.0]), None, params(100, 1, 0)).unwrap();
    let init = solver.trace().iter().filter(|r| r.branch == Branch::Init).count();
    assert!(init <= 6, "{init}");
    assert_eq!(init, solver.trace().len());
    assert_eq!(calls.get(), solver.trace().len());
    let state = solver.state();
    assert_eq!(state.subspace_set.len(), 3);
    assert_eq!(state.model_set.len(), 3);
    assert_eq!(state.subspace_set.center(), &state.x);
    assert_eq!(state.model_set.center(), &state.x);
}

#[test]
fn linear_objective_aligns_the_first_subspace() {
    let g = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0, -1.5]);
    let f = |x: &DVector<f64>| g.dot(x) + 4.0;
    let solver = Solver::new(infallible(f), &DVector::from_element(5, 0.3), None, params(200, 1, 2)).unwrap();
    let u = solver.state().subspace.u().column(0).into_owned();
    assert!((u.dot(&g) / g.norm()).abs() >= 1.0 - 1e-8);
}

#[test]
fn vertex_start_stays_feasible() {
    let n = 4;
    let bounds = Bounds::new(DVector::from_element(n, -1.0), DVector::from_element(n, 2.0));
    let x0 = bounds.upper.clone();
    for d in [1, 2] {
        let res = minimize(
            infallible(|x: &DVector<f64>| (x.sum() - 1.0).powi(2) + x[0]),
            &x0,
            Some(&bounds),
            &params(60, d, 1),
        )
        .unwrap();
        for r in &res.trace {
            assert!(bounds.contains(&DVector::from_column_slice(&r.point)), "{:?}", r.point);
        }
    }
}

#[test]
fn budget_equal_to_initialization_cost() {
    let n = 6;
    let p = params(0, 1, 0);
    let cost = p.initialization_cost(n);
    let f = |x: &DVector<f64>| (x - DVector::from_element(n, 0.5)).norm_squared();
    let res =
        minimize(infallible(f), &DVector::zeros(n), None, &SolverParams { max_evals: cost, ..p.clone() }).unwrap();
    assert_eq!(res.reason, TerminationReason::Budget);
    assert_eq!(res.evals, cost);
    assert!(res.trace.iter().all(|r| r.branch == Branch::Init));
    let best = res.trace.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    assert_eq!(res.f, best);

    let short = minimize(infallible(f), &DVector::zeros(n), None, &SolverParams { max_evals: 3, ..p }).unwrap();
    assert_eq!(short.reason, TerminationReason::Budget);
    assert_eq!(short.evals, 3);
    assert_eq!(short.f, short.trace.iter().map(|r| r.value).fold(f64::INFINITY, f64::min));
}

#[test]
fn exact_ridge_takes_a_successful_first_step() {
    // The ridge minimum lies inside the first trust region, away from the
    // box corners where geometry points are placed.
    let u = DVector::from_vec(vec![0.6, 0.8, 0.0]);
    let f = |x: &DVector<f64>| (u.dot(x) - 0.09).powi(2) + 3.0;
    let mut solver = Solver::new(infallible(f), &DVector::zeros(3), None, params(100, 1, 0)).unwrap();
    let delta0 = solver.state().radii.delta;
    loop {
        solver.step().unwrap();
        match solver.state().last_outcome.clone() {
            Some(IterationOutcome::Success { ratio, .. }) => {
                assert!((ratio - 1.0).abs() < 1e-6, "{ratio}");
                assert!(solver.state().radii.delta >= 2.0 * delta0);
                break;
            }
            Some(IterationOutcome::Repair) => continue,
            other => panic!("unexpected first outcome {other:?} radii {:?}", solver.state().radii),
        }
    }
}

#[test]
fn worse_candidate_is_rejected() {
    // A model built from a nearly flat neighbourhood points toward a cliff.
    let f = |x: &DVector<f64>| if x[0] > 0.05 { 100.0 + x[0] } else { -x[0] + 0.01 * x[1] * x[1] };
    let mut solver = Solver::new(infallible(f), &DVector::from_vec(vec![0.0, 1.0]), None, params(200, 1, 0)).unwrap();
    let mut saw_failure = false;
    for _ in 0..50 {
        let x_before = solver.state().x.clone();
        if solver.step().unwrap().is_some() {
            break;
        }
        if let Some(IterationOutcome::Failure { ratio, .. }) = &solver.state().last_outcome {
            assert!(*ratio < 0.1);
            assert_eq!(solver.state().x, x_before);
            saw_failure = true;
        }
    }
    assert!(saw_failure);
}

struct Audit {
    calls: usize,
    best: f64,
}

fn audited_run(f: impl Fn(&DVector<f64>) -> f64, x0: &DVector<f64>, bounds: Option<&Bounds>, p: SolverParams) {
    let audit = std::cell::RefCell::new(Audit { calls: 0, best: f64::INFINITY });
    let objective = |x: &DVector<f64>| {
        let mut a = audit.borrow_mut();
        a.calls += 1;
        let v = f(x);
        a.best = a.best.min(v);
        v
    };
    let mut solver = Solver::new(infallible(objective), x0, bounds, p.clone()).unwrap();
    let mut last_rho = solver.state().radii.rho;
    let mut last_best = f64::INFINITY;
    loop {
        let before = solver.state().clone();
        let done = solver.step().unwrap();
        let state = solver.state();
        assert!(state.radii.delta >= state.radii.rho);
        assert!(state.radii.rho <= last_rho);
        if state.radii.rho < last_rho {
            // Only the combined shrink of both radii lowers rho.
            assert!((state.radii.rho - p.alpha_rho * last_rho).abs() <= 1e-15 * last_rho);
        }
        last_rho = state.radii.rho;
        if let Some(IterationOutcome::Success { candidate, .. } | IterationOutcome::Failure { candidate, .. }) =
            &state.last_outcome
        {
            if done.is_none() && state.iterations > before.iterations {
                assert!(state.model_set.contains_near(candidate, 1e-12), "candidate missing from model set");
                assert!(state.subspace_set.contains_near(candidate, 1e-12), "candidate missing from subspace set");
            }
        }
        assert_eq!(state.subspace_set.center(), &state.x);
        assert_eq!(state.model_set.center(), &state.x);
        let trace_best = solver.trace().iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
        assert!(trace_best <= last_best);
        last_best = trace_best;
        assert!(solver.trace().len() <= p.max_evals);
        assert_eq!(solver.trace().len(), audit.borrow().calls);
        if let Some(b) = bounds {
            assert!(solver.trace().iter().all(|r| b.contains(&DVector::from_column_slice(&r.point))));
        }
        if done.is_some() {
            break;
        }
    }
    let res = solver.result();
    assert_eq!(res.evals, audit.borrow().calls);
    assert_eq!(res.f, audit.borrow().best);
    for (i, r) in res.trace.iter().enumerate() {
        assert_eq!(r.eval_index, i + 1);
    }
}

#[test]
fn loop_invariants_hold_on_assorted_problems() {
    for (name, d) in [("STYBTANG", 1), ("STYBTANG", 2), ("SCHMVETTB", 1), ("TRIDIA", 2), ("MCCORMCK", 1), ("NONDIA", 1)]
    {
        let p = find(name).unwrap().default_instance();
        let budget = 20 * (p.dim + 1);
        audited_run(|x| p.value(x), &p.x0, p.bounds.as_ref(), params(budget, d, 7));
    }
    audited_run(rotated_ridge(8, 2, 3), &DVector::zeros(8), None, params(180, 2, 3));
}

#[test]
fn same_seed_same_trace() {
    let f = rotated_ridge(6, 2, 9);
    let run = |seed| minimize(infallible(f.clone()), &DVector::zeros(6), None, &params(140, 2, seed)).unwrap();
    let (a, b) = (run(5), run(5));
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.x, b.x);
}

#[test]
fn failing_objective_keeps_the_partial_trace() {
    let calls = Cell::new(0);
    let f = |x: &DVector<f64>| {
        calls.set(calls.get() + 1);
        if calls.get() == 15 {
            Err(EvalError::Failed("simulator crashed".into()))
        } else {
            Ok(x.norm_squared())
        }
    };
    match minimize(f, &DVector::from_element(4, 1.0), None, &params(100, 1, 0)) {
        Err(SolveError::Evaluation { message, partial }) => {
            assert!(message.contains("simulator crashed"));
            assert_eq!(partial.evals, 14);
        }
        other => panic!("expected an evaluation error, got {other:?}"),
    }
}

#[test]
fn user_stop_ends_the_run() {
    let calls = Cell::new(0);
    let f = |x: &DVector<f64>| {
        calls.set(calls.get() + 1);
        if calls.get() > 20 {
            Err(EvalError::Stop)
        } else {
            Ok(x.norm_squared())
        }
    };
    let res = minimize(f, &DVector::from_element(3, 1.0), None, &params(100, 1, 0)).unwrap();
    assert_eq!(res.reason, TerminationReason::UserStop);
    assert_eq!(res.evals, 20);
}

#[test]
fn non_finite_values_are_failures() {
    let f = |x: &DVector<f64>| if x[0] < 0.9 { f64::NAN } else { x.norm_squared() };
    assert!(matches!(
        minimize(infallible(f), &DVector::from_element(3, 1.0), None, &params(100, 1, 0)),
        Err(SolveError::Evaluation { .. })
    ));
}

#[test]
fn radius_floor_stops_the_run() {
    let p = SolverParams { rho_end: 1e-3, ..params(10_000, 1, 0) };
    let res =
        minimize(infallible(|x: &DVector<f64>| x.norm_squared()), &DVector::from_element(3, 1.0), None, &p).unwrap();
    assert!(matches!(res.reason, TerminationReason::Stationary | TerminationReason::RadiusFloor));
    assert!(res.evals < 10_000);
    assert!(res.f < 1e-4);
}

#[test]
fn invalid_inputs_are_rejected() {
    let f = |x: &DVector<f64>| x.norm_squared();
    assert!(matches!(minimize(infallible(f), &DVector::zeros(3), None, &params(100, 3, 0)), Err(SolveError::Input(_))));
    let bounds = Bounds::new(DVector::zeros(3), DVector::from_element(3, 1.0));
    assert!(matches!(
        minimize(infallible(f), &DVector::from_element(3, 2.0), Some(&bounds), &params(100, 1, 0)),
        Err(SolveError::Input(_))
    ));
}
