//! Infinity-norm trust regions intersected with bound constraints.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{inf_norm, spectral_norm};
use crate::ridge::RidgeModel;
use crate::solver::SolverParams;

/// The box `l ≤ x ≤ u`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleBox {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl FeasibleBox {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Self {
        assert_eq!(lower.len(), upper.len(), "box bounds must have equal length");
        debug_assert!(lower.iter().zip(upper.iter()).all(|(l, u)| l <= u), "empty box");
        Self { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Componentwise clamp of `x` into the box.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(x.len(), |i, _| x[i].clamp(self.lower[i], self.upper[i]))
    }

    pub fn contains(&self, x: &DVector<f64>, slack: f64) -> bool {
        (0..x.len()).all(|i| x[i] >= self.lower[i] - slack && x[i] <= self.upper[i] + slack)
    }

    /// The vertex reached by moving from `from` as far as possible along the
    /// sign pattern of `dir`; coordinates where `dir` is zero keep `from`.
    pub fn corner_along(&self, from: &DVector<f64>, dir: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(dir.len(), |i, _| {
            if dir[i] > 0.0 {
                self.upper[i]
            } else if dir[i] < 0.0 {
                self.lower[i]
            } else {
                from[i].clamp(self.lower[i], self.upper[i])
            }
        })
    }

    /// `u − l`.
    pub fn widths(&self) -> DVector<f64> {
        &self.upper - &self.lower
    }
}

/// Optional bound constraints `a ≤ x ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl Bounds {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Self {
        Self { lower, upper }
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        (0..x.len()).all(|i| x[i] >= self.lower[i] && x[i] <= self.upper[i])
    }
}

/// `l_i = max(x_i − Δ, a_i)`, `u_i = min(x_i + Δ, b_i)`.
pub fn feasible_box(x: &DVector<f64>, delta: f64, bounds: Option<&Bounds>) -> FeasibleBox {
    let n = x.len();
    match bounds {
        None => FeasibleBox::new(x.add_scalar(-delta), x.add_scalar(delta)),
        Some(b) => FeasibleBox::new(
            DVector::from_fn(n, |i, _| (x[i] - delta).max(b.lower[i])),
            DVector::from_fn(n, |i, _| (x[i] + delta).min(b.upper[i])),
        ),
    }
}

/// The trust-region radius and its lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusPair {
    pub delta: f64,
    pub rho: f64,
}

impl RadiusPair {
    pub fn new(delta: f64, rho: f64) -> Self {
        Self { delta: delta.max(rho), rho }
    }

    /// `ρ ← α₁ρ`, `Δ ← α₂Δ`, keeping `Δ ≥ ρ`.
    pub fn shrink(self, alpha_rho: f64, alpha_delta: f64) -> Self {
        Self::new(alpha_delta * self.delta, alpha_rho * self.rho)
    }
}

/// Approximate minimizer of the ridge model over the box.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub step: DVector<f64>,
    /// `m(x_k) − m(x_k + s) ≥ 0`.
    pub decrease: f64,
    /// True when `x_k` is already a box-constrained stationary point with no
    /// negative curvature to exploit.
    pub stationary: bool,
}

/// The model restricted to steps: `q(s) = gᵀs + ½(Uᵀs)ᵀH(Uᵀs)`.
struct StepQuadratic<'a> {
    grad0: DVector<f64>,
    u: &'a DMatrix<f64>,
    hess: &'a DMatrix<f64>,
    lipschitz: f64,
}

impl StepQuadratic<'_> {
    fn value(&self, s: &DVector<f64>) -> f64 {
        let y = self.u.transpose() * s;
        self.grad0.dot(s) + 0.5 * y.dot(&(self.hess * &y))
    }

    fn gradient(&self, s: &DVector<f64>) -> DVector<f64> {
        let y = self.u.transpose() * s;
        &self.grad0 + self.u * (self.hess * y)
    }

    fn curvature(&self, d: &DVector<f64>) -> f64 {
        let y = self.u.transpose() * d;
        y.dot(&(self.hess * &y))
    }

    /// Exact minimization of `q(s + τd)` over `τ ∈ [0, 1]`.
    fn line_min(&self, s: &DVector<f64>, d: &DVector<f64>) -> DVector<f64> {
        let slope = self.gradient(s).dot(d);
        let curv = self.curvature(d);
        let tau = if curv > 0.0 {
            (-slope / curv).clamp(0.0, 1.0)
        } else if slope + 0.5 * curv < 0.0 {
            1.0
        } else {
            0.0
        };
        s + d * tau
    }
}

const MAX_PG_ITERS: usize = 200;
const MAX_SWEEPS: usize = 50;

/// Minimizes `m(x_k + s)` subject to `x_k + s ∈ region`.
///
/// Projected-gradient descent with exact line searches, run from the
/// Cauchy point and from box corners along the subspace directions and the
/// Hessian eigenvectors, followed by exact coordinate sweeps.
pub fn solve_subproblem(model: &RidgeModel, x: &DVector<f64>, region: &FeasibleBox) -> SubproblemSolution {
    let n = x.len();
    let u = model.u();
    let hess = model.hessian();
    let quad = StepQuadratic { grad0: model.grad(x), u, hess, lipschitz: spectral_norm(hess) };
    let lo = &region.lower - x;
    let hi = &region.upper - x;
    let step_box = FeasibleBox::new(lo.clone(), hi.clone());
    let width = inf_norm(&step_box.widths()).max(f64::MIN_POSITIVE);
    let zero = DVector::zeros(n);

    let eig = hess.clone().symmetric_eigen();
    let has_negative_curvature = eig.eigenvalues.iter().any(|&l| l < -1e-14 * quad.lipschitz.max(1.0));
    if projected_gradient_norm(&quad, &zero, &step_box) <= 1e-14 * (1.0 + width) && !has_negative_curvature {
        return SubproblemSolution { step: zero, decrease: 0.0, stationary: true };
    }

    let mut starts = vec![cauchy_step(&quad, &zero, &step_box, width)];
    let mut dirs: Vec<DVector<f64>> = u.column_iter().map(|c| c.clone_owned()).collect();
    dirs.extend(eig.eigenvectors.column_iter().map(|v| u * v));
    dirs.push(-quad.grad0.clone());
    for d in &dirs {
        for sign in [1.0, -1.0] {
            starts.push(step_box.corner_along(&zero, &(d * sign)));
        }
    }

    let mut best = zero.clone();
    let mut best_val = 0.0;
    for start in starts {
        let s = coordinate_sweeps(&quad, projected_descent(&quad, start, &step_box, width), &step_box);
        let v = quad.value(&s);
        if v < best_val {
            best_val = v;
            best = s;
        }
    }
    let best = step_box.project(&best);
    let decrease = -quad.value(&best);
    if decrease <= 0.0 {
        return SubproblemSolution { step: zero, decrease: 0.0, stationary: true };
    }
    SubproblemSolution { step: best, decrease, stationary: false }
}

fn projected_gradient_norm(quad: &StepQuadratic<'_>, s: &DVector<f64>, step_box: &FeasibleBox) -> f64 {
    inf_norm(&(step_box.project(&(s - quad.gradient(s))) - s))
}

/// Exact minimizer along the steepest-descent direction, scaled so the
/// largest component reaches the box edge.
fn cauchy_step(quad: &StepQuadratic<'_>, s: &DVector<f64>, step_box: &FeasibleBox, width: f64) -> DVector<f64> {
    let g = quad.gradient(s);
    let gmax = inf_norm(&g);
    if gmax == 0.0 {
        return s.clone();
    }
    let d = step_box.project(&(s - &g * (width / gmax))) - s;
    quad.line_min(s, &d)
}

fn projected_descent(
    quad: &StepQuadratic<'_>,
    mut s: DVector<f64>,
    step_box: &FeasibleBox,
    width: f64,
) -> DVector<f64> {
    let mut val = quad.value(&s);
    for _ in 0..MAX_PG_ITERS {
        let g = quad.gradient(&s);
        let gmax = inf_norm(&g);
        if gmax == 0.0 {
            break;
        }
        let mut candidate = s.clone();
        let mut cand_val = val;
        let mut lengths = vec![width / gmax];
        if quad.lipschitz > 0.0 {
            lengths.push(1.0 / quad.lipschitz);
        }
        for t in lengths {
            let d = step_box.project(&(&s - &g * t)) - &s;
            let trial = quad.line_min(&s, &d);
            let tv = quad.value(&trial);
            if tv < cand_val {
                candidate = trial;
                cand_val = tv;
            }
        }
        if cand_val >= val - 1e-15 * val.abs().max(1e-300) {
            break;
        }
        s = candidate;
        val = cand_val;
    }
    s
}

fn coordinate_sweeps(quad: &StepQuadratic<'_>, mut s: DVector<f64>, step_box: &FeasibleBox) -> DVector<f64> {
    let n = s.len();
    let mut val = quad.value(&s);
    for _ in 0..MAX_SWEEPS {
        let before = val;
        for i in 0..n {
            let slope = quad.gradient(&s)[i];
            let ui = quad.u.row(i).transpose();
            let curv = ui.dot(&(quad.hess * &ui));
            let lo = step_box.lower[i] - s[i];
            let hi = step_box.upper[i] - s[i];
            let phi = |t: f64| slope * t + 0.5 * curv * t * t;
            let mut t = if phi(lo) < phi(hi) { lo } else { hi };
            if curv > 0.0 {
                let interior = (-slope / curv).clamp(lo, hi);
                if phi(interior) < phi(t) {
                    t = interior;
                }
            }
            if phi(t) < 0.0 {
                s[i] += t;
            }
        }
        val = quad.value(&s);
        if before - val <= 1e-15 * before.abs().max(1e-300) {
            break;
        }
    }
    s
}

/// Ratio of actual to predicted decrease. Returns `f64::NEG_INFINITY` when
/// the predicted decrease is too small to trust.
pub fn acceptance_ratio(f_old: f64, f_new: f64, m_old: f64, m_new: f64) -> f64 {
    let predicted = m_old - m_new;
    if predicted < 1e-15 * f_old.abs().max(1.0) {
        return f64::NEG_INFINITY;
    }
    (f_old - f_new) / predicted
}

/// New trust-region radius after a step with ratio `r` and length `step_norm`.
pub fn radius_update(r: f64, delta: f64, rho: f64, step_norm: f64, params: &SolverParams) -> f64 {
    if r >= params.eta_high {
        (params.gamma_inc * delta).max(params.gamma_inc_step * step_norm)
    } else if r >= params.eta_low {
        (params.gamma_dec * delta).max(step_norm).max(rho)
    } else {
        (params.gamma_dec * delta).min(step_norm).max(rho)
    }
}

/// Whether the step is too short to be worth evaluating, and the radius to
/// use if so.
pub fn safety_check(step_norm: f64, delta: f64, rho: f64, gamma_s: f64, omega_s: f64) -> (bool, f64) {
    if step_norm <= gamma_s * rho {
        (true, (omega_s * delta).max(rho))
    } else {
        (false, delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::Subspace;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn unbounded_box() {
        let b = feasible_box(&v(&[0.0, 0.0]), 1.0, None);
        assert_eq!(b.lower, v(&[-1.0, -1.0]));
        assert_eq!(b.upper, v(&[1.0, 1.0]));
    }

    #[test]
    fn box_clipped_by_upper_bound() {
        let bounds = Bounds::new(v(&[-1.0]), v(&[1.0]));
        let b = feasible_box(&v(&[0.95]), 0.1, Some(&bounds));
        assert!((b.lower[0] - 0.85).abs() < 1e-15);
        assert_eq!(b.upper[0], 1.0);
    }

    #[test]
    fn box_at_lower_bound() {
        let bounds = Bounds::new(v(&[-2.0, 0.0]), v(&[2.0, 3.0]));
        let b = feasible_box(&v(&[-2.0, 1.0]), 0.7, Some(&bounds));
        assert_eq!(b.lower[0], -2.0);
    }

    #[test]
    fn ratio_cases() {
        assert_eq!(acceptance_ratio(3.0, 2.0, 3.0, 2.0), 1.0);
        assert_eq!(acceptance_ratio(1.0, 0.5, 1.0, 0.0), 0.5);
        assert!(acceptance_ratio(1.0, 1.5, 1.0, 0.0) < 0.0);
        assert_eq!(acceptance_ratio(1.0, 0.0, 1.0, 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn radius_update_cases() {
        let p = SolverParams::default();
        assert_eq!(radius_update(0.8, 1.0, 0.01, 1.0, &p), 2.5);
        assert_eq!(radius_update(0.3, 1.0, 0.01, 0.2, &p), 0.5);
        assert_eq!(radius_update(-1.0, 1.0, 0.01, 0.2, &p), 0.2);
    }

    #[test]
    fn safety_cases() {
        assert_eq!(safety_check(0.04, 1.0, 0.1, 0.5, 0.5), (true, 0.5));
        assert_eq!(safety_check(0.06, 1.0, 0.1, 0.5, 0.5), (false, 1.0));
        assert_eq!(safety_check(0.04, 0.12, 0.1, 0.5, 0.5), (true, 0.1));
    }

    fn model(u: DMatrix<f64>, c: f64, g: DVector<f64>, h: DMatrix<f64>) -> RidgeModel {
        let d = u.ncols();
        RidgeModel::from_parts(Subspace::new(u), DVector::zeros(d), c, g, h)
    }

    #[test]
    fn linear_model_goes_to_corner() {
        let u = DMatrix::from_column_slice(3, 1, &[0.6, -0.8, 0.0]);
        let m = model(u.clone(), 0.0, v(&[2.0]), DMatrix::zeros(1, 1));
        let x = v(&[0.1, 0.2, 0.3]);
        let delta = 0.25;
        let sol = solve_subproblem(&m, &x, &feasible_box(&x, delta, None));
        // Coordinates with zero gradient may sit anywhere; the others hit the corner.
        let ug = &u * v(&[2.0]);
        for i in 0..3 {
            if ug[i] != 0.0 {
                assert!((sol.step[i] + delta * ug[i].signum()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn interior_minimum_is_found() {
        let u = DMatrix::from_column_slice(2, 1, &[0.6, 0.8]);
        // m(y) = ½(y − 0.3)²
        let m = model(u.clone(), 0.045, v(&[-0.3]), DMatrix::from_element(1, 1, 1.0));
        let x = DVector::zeros(2);
        let sol = solve_subproblem(&m, &x, &feasible_box(&x, 1.0, None));
        let y = (u.transpose() * (&x + &sol.step))[0];
        assert!((y - 0.3).abs() < 1e-6);
    }

    #[test]
    fn zero_model_is_stationary() {
        let u = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let m = model(u, 1.0, v(&[0.0]), DMatrix::zeros(1, 1));
        let x = DVector::zeros(2);
        let sol = solve_subproblem(&m, &x, &feasible_box(&x, 1.0, None));
        assert!(sol.stationary);
        assert_eq!(sol.step, DVector::zeros(2));
    }

    #[test]
    fn step_respects_bounds() {
        let u = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let m = model(u, 0.0, v(&[-1.0]), DMatrix::zeros(1, 1));
        let x = v(&[0.9, 0.0]);
        let bounds = Bounds::new(v(&[-1.0, -1.0]), v(&[1.0, 1.0]));
        let region = feasible_box(&x, 0.5, Some(&bounds));
        let sol = solve_subproblem(&m, &x, &region);
        assert!(region.contains(&(&x + &sol.step), 1e-12));
        assert!((x[0] + sol.step[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn negative_curvature_from_stationary_point() {
        let u = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let m = model(u, 0.0, v(&[0.0]), DMatrix::from_element(1, 1, -2.0));
        let x = DVector::zeros(2);
        let sol = solve_subproblem(&m, &x, &feasible_box(&x, 0.5, None));
        assert!(!sol.stationary);
        assert!((sol.decrease - 0.25).abs() < 1e-12);
    }
}
