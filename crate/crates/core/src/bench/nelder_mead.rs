//! Baseline Nelder-Mead simplex with dimension-adaptive coefficients.
//!
//! Bounds are handled by clipping trial points onto the box.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{EvalError, InputError};
use crate::linalg::inf_norm;
use crate::trust_region::Bounds;

#[derive(Debug, Clone)]
pub struct NelderMeadParams {
    pub max_evals: usize,
    /// Edge length of the initial simplex; `None` uses `0.1·max(‖x₀‖∞, 1)`.
    pub initial_step: Option<f64>,
    /// Stop once the simplex diameter falls below `tol_x·max(‖x_best‖∞, 1)`.
    pub tol_x: f64,
}

impl Default for NelderMeadParams {
    fn default() -> Self {
        Self { max_evals: 1000, initial_step: None, tol_x: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimplexOp {
    Init,
    Reflect,
    Expand,
    Contract,
    Shrink,
}

impl SimplexOp {
    pub fn as_str(self) -> &'static str {
        match self {
            SimplexOp::Init => "init",
            SimplexOp::Reflect => "reflect",
            SimplexOp::Expand => "expand",
            SimplexOp::Contract => "contract",
            SimplexOp::Shrink => "shrink",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexRecord {
    pub eval_index: usize,
    pub point: Vec<f64>,
    pub value: f64,
    /// Simplex diameter (∞-norm, from the best vertex) when the point was generated.
    pub size: f64,
    pub op: SimplexOp,
    /// Whether the point entered the simplex.
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimplexTermination {
    Budget,
    Collapsed,
    UserStop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: DVector<f64>,
    pub f: f64,
    pub evals: usize,
    pub iterations: usize,
    pub reason: SimplexTermination,
    pub trace: Vec<SimplexRecord>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimplexError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("objective evaluation failed: {message}")]
    Evaluation { message: String, partial: Box<SimplexResult> },
}

/// Reflection, expansion, contraction and shrink coefficients for dimension `n`.
pub fn adaptive_coefficients(n: usize) -> (f64, f64, f64, f64) {
    let n = n as f64;
    (1.0, 1.0 + 2.0 / n, 0.75 - 0.5 / n, 1.0 - 1.0 / n)
}

enum Halt {
    Budget,
    Stop,
    Failed(String),
}

struct Evaluator<'a, F> {
    objective: F,
    bounds: Option<&'a Bounds>,
    max_evals: usize,
    trace: Vec<SimplexRecord>,
}

impl<F> Evaluator<'_, F>
where
    F: FnMut(&DVector<f64>) -> Result<f64, EvalError>,
{
    fn eval(&mut self, x: DVector<f64>, size: f64, op: SimplexOp) -> Result<(DVector<f64>, f64, usize), Halt> {
        if self.trace.len() >= self.max_evals {
            return Err(Halt::Budget);
        }
        let x = match self.bounds {
            Some(b) => x.zip_zip_map(&b.lower, &b.upper, |v, lo, hi| v.clamp(lo, hi)),
            None => x,
        };
        let value = match (self.objective)(&x) {
            Ok(v) if v.is_finite() => v,
            Ok(v) => return Err(Halt::Failed(format!("non-finite objective value {v}"))),
            Err(EvalError::Stop) => return Err(Halt::Stop),
            Err(EvalError::Failed(m)) => return Err(Halt::Failed(m)),
        };
        self.trace.push(SimplexRecord {
            eval_index: self.trace.len() + 1,
            point: x.iter().copied().collect(),
            value,
            size,
            op,
            accepted: false,
        });
        Ok((x, value, self.trace.len() - 1))
    }

    fn accept(&mut self, idx: usize) {
        self.trace[idx].accepted = true;
    }
}

struct Vertex {
    x: DVector<f64>,
    f: f64,
}

/// Minimizes `objective` with the adaptive Nelder-Mead method.
pub fn nelder_mead<F>(
    objective: F,
    x0: &DVector<f64>,
    bounds: Option<&Bounds>,
    params: &NelderMeadParams,
) -> Result<SimplexResult, SimplexError>
where
    F: FnMut(&DVector<f64>) -> Result<f64, EvalError>,
{
    let n = x0.len();
    if n == 0 {
        return Err(InputError::InvalidParameter("empty start point".into()).into());
    }
    if let Some(b) = bounds {
        if b.lower.len() != n || b.upper.len() != n {
            return Err(InputError::DimensionMismatch { expected: n, got: b.lower.len() }.into());
        }
    }
    let step = params.initial_step.unwrap_or(0.1 * inf_norm(x0).max(1.0));
    if !(step > 0.0 && step.is_finite()) {
        return Err(InputError::InvalidParameter("initial step must be positive".into()).into());
    }
    let mut ev = Evaluator { objective, bounds, max_evals: params.max_evals, trace: Vec::new() };
    let mut simplex: Vec<Vertex> = Vec::with_capacity(n + 1);
    let mut iterations = 0;

    let outcome = run(&mut ev, &mut simplex, &mut iterations, x0, bounds, step, params);
    let best = simplex.iter().min_by(|a, b| a.f.total_cmp(&b.f));
    let (x, f) = match best {
        Some(v) => (v.x.clone(), v.f),
        None => (x0.clone(), f64::NAN),
    };
    let mut result =
        SimplexResult { x, f, evals: ev.trace.len(), iterations, reason: SimplexTermination::Budget, trace: ev.trace };
    match outcome {
        Ok(()) => {
            result.reason = SimplexTermination::Collapsed;
            Ok(result)
        }
        Err(Halt::Budget) => Ok(result),
        Err(Halt::Stop) => {
            result.reason = SimplexTermination::UserStop;
            Ok(result)
        }
        Err(Halt::Failed(message)) => Err(SimplexError::Evaluation { message, partial: Box::new(result) }),
    }
}

fn diameter(simplex: &[Vertex]) -> f64 {
    simplex[1..].iter().map(|v| inf_norm(&(&v.x - &simplex[0].x))).fold(0.0, f64::max)
}

fn run<F>(
    ev: &mut Evaluator<'_, F>,
    simplex: &mut Vec<Vertex>,
    iterations: &mut usize,
    x0: &DVector<f64>,
    bounds: Option<&Bounds>,
    step: f64,
    params: &NelderMeadParams,
) -> Result<(), Halt>
where
    F: FnMut(&DVector<f64>) -> Result<f64, EvalError>,
{
    let n = x0.len();
    let (alpha, beta, gamma, delta) = adaptive_coefficients(n);
    let (x, f, idx) = ev.eval(x0.clone(), 0.0, SimplexOp::Init)?;
    ev.accept(idx);
    simplex.push(Vertex { x, f });
    for i in 0..n {
        let mut x = x0.clone();
        let h = match bounds {
            Some(b) if x0[i] + step > b.upper[i] => {
                if x0[i] - step >= b.lower[i] || x0[i] - b.lower[i] > b.upper[i] - x0[i] {
                    -step.min(x0[i] - b.lower[i])
                } else {
                    b.upper[i] - x0[i]
                }
            }
            _ => step,
        };
        x[i] += h;
        let (x, f, idx) = ev.eval(x, step, SimplexOp::Init)?;
        ev.accept(idx);
        simplex.push(Vertex { x, f });
    }

    loop {
        simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
        let size = diameter(simplex);
        if size <= params.tol_x * inf_norm(&simplex[0].x).max(1.0) {
            return Ok(());
        }
        *iterations += 1;
        let centroid = simplex[..n].iter().fold(DVector::zeros(n), |acc, v| acc + &v.x) / n as f64;
        let worst = &simplex[n];
        let (f_best, f_second, f_worst) = (simplex[0].f, simplex[n - 1].f, worst.f);

        let (xr, fr, ir) = ev.eval(&centroid + (&centroid - &worst.x) * alpha, size, SimplexOp::Reflect)?;
        if fr < f_best {
            let (xe, fe, ie) = ev.eval(&centroid + (&xr - &centroid) * beta, size, SimplexOp::Expand)?;
            if fe < fr {
                ev.accept(ie);
                simplex[n] = Vertex { x: xe, f: fe };
            } else {
                ev.accept(ir);
                simplex[n] = Vertex { x: xr, f: fr };
            }
            continue;
        }
        if fr < f_second {
            ev.accept(ir);
            simplex[n] = Vertex { x: xr, f: fr };
            continue;
        }
        let contracted = if fr < f_worst {
            let (xc, fc, ic) = ev.eval(&centroid + (&xr - &centroid) * gamma, size, SimplexOp::Contract)?;
            (fc <= fr).then_some((xc, fc, ic))
        } else {
            let (xc, fc, ic) = ev.eval(&centroid + (&worst.x - &centroid) * gamma, size, SimplexOp::Contract)?;
            (fc < f_worst).then_some((xc, fc, ic))
        };
        if let Some((xc, fc, ic)) = contracted {
            ev.accept(ic);
            simplex[n] = Vertex { x: xc, f: fc };
            continue;
        }
        let best = simplex[0].x.clone();
        for v in simplex.iter_mut().skip(1) {
            let (xs, fs, is) = ev.eval(&best + (&v.x - &best) * delta, size, SimplexOp::Shrink)?;
            ev.accept(is);
            *v = Vertex { x: xs, f: fs };
        }
    }
}
