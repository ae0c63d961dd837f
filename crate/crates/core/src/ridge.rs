//! Quadratic ridge models `m(Uᵀx)`.

use nalgebra::{DMatrix, DVector};

use crate::error::GeometryError;
use crate::geometry::{fit_coefficients, PolyBasis, SampleSet};
use crate::linalg::spectral_norm;
use crate::subspace::Subspace;

/// `m(y) = c + gᵀ(y − y₀) + ½(y − y₀)ᵀH(y − y₀)` with `y = Uᵀx`.
///
/// Coefficients are kept relative to the anchor `y₀` (the projected iterate
/// at fit time), which keeps them well scaled far from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    subspace: Subspace,
    anchor: DVector<f64>,
    c: f64,
    g: DVector<f64>,
    h: DMatrix<f64>,
}

impl RidgeModel {
    pub fn from_parts(subspace: Subspace, anchor: DVector<f64>, c: f64, g: DVector<f64>, h: DMatrix<f64>) -> Self {
        let d = subspace.dim();
        assert_eq!(anchor.len(), d);
        assert_eq!(g.len(), d);
        assert_eq!((h.nrows(), h.ncols()), (d, d));
        let h = (&h + h.transpose()) * 0.5;
        Self { subspace, anchor, c, g, h }
    }

    /// Quadratic interpolation of the set on its projections `Uᵀxⁱ`,
    /// anchored at the projected center. Uses least squares if the set has
    /// more than `(d+1)(d+2)/2` points.
    pub fn fit(subspace: Subspace, set: &SampleSet) -> Result<Self, GeometryError> {
        let d = subspace.dim();
        let anchor = subspace.project(set.center());
        let shifted: Vec<DVector<f64>> = set.points().iter().map(|x| subspace.project(x) - &anchor).collect();
        let scale = shifted.iter().map(|y| y.norm()).fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let scaled: Vec<DVector<f64>> = shifted.iter().map(|y| y / scale).collect();
        let basis = PolyBasis::quadratic(d);
        let coeffs = fit_coefficients(&basis, &scaled, set.values())?;
        let (c, g, h) = basis.quadratic_parts(&coeffs);
        Ok(Self::from_parts(subspace, anchor, c, g / scale, h / (scale * scale)))
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn u(&self) -> &DMatrix<f64> {
        self.subspace.u()
    }

    /// Reduced Hessian `H` (`d × d`).
    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// Coefficients `(c, g, H)` of `m(y) = c + gᵀy + ½yᵀHy`.
    pub fn absolute_coefficients(&self) -> (f64, DVector<f64>, DMatrix<f64>) {
        let hy = &self.h * &self.anchor;
        let c = self.c - self.g.dot(&self.anchor) + 0.5 * self.anchor.dot(&hy);
        (c, &self.g - hy, self.h.clone())
    }

    /// `m` as a function of the active variables.
    pub fn eval_reduced(&self, y: &DVector<f64>) -> f64 {
        let w = y - &self.anchor;
        self.c + self.g.dot(&w) + 0.5 * w.dot(&(&self.h * &w))
    }

    /// `∇_y m`.
    pub fn grad_reduced(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.g + &self.h * (y - &self.anchor)
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.eval_reduced(&self.subspace.project(x))
    }

    /// Full-space gradient `U ∇_y m(Uᵀx)`.
    pub fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        self.u() * self.grad_reduced(&self.subspace.project(x))
    }

    /// `R²` of the model against `f` on the probes.
    pub fn r_squared(&self, f: impl Fn(&DVector<f64>) -> f64, probes: &[DVector<f64>]) -> Option<f64> {
        let observed: Vec<f64> = probes.iter().map(&f).collect();
        let predicted: Vec<f64> = probes.iter().map(|x| self.eval(x)).collect();
        r_squared(&predicted, &observed)
    }
}

/// `1 − Σ(f − m)² / Σ(f − f̄)²`; `None` when the observations are constant.
pub fn r_squared(predicted: &[f64], observed: &[f64]) -> Option<f64> {
    assert_eq!(predicted.len(), observed.len());
    if observed.len() < 2 {
        return None;
    }
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let sst: f64 = observed.iter().map(|f| (f - mean).powi(2)).sum();
    if sst == 0.0 {
        return None;
    }
    let ssr: f64 = predicted.iter().zip(observed).map(|(m, f)| (f - m).powi(2)).sum();
    Some(1.0 - ssr / sst)
}

/// A smooth reduced function `g(y)` with its gradient, used to audit the
/// model error bounds.
pub trait ReducedFunction {
    fn value(&self, y: &DVector<f64>) -> f64;
    fn gradient(&self, y: &DVector<f64>) -> DVector<f64>;
}

impl<F, G> ReducedFunction for (F, G)
where
    F: Fn(&DVector<f64>) -> f64,
    G: Fn(&DVector<f64>) -> DVector<f64>,
{
    fn value(&self, y: &DVector<f64>) -> f64 {
        (self.0)(y)
    }

    fn gradient(&self, y: &DVector<f64>) -> DVector<f64> {
        (self.1)(y)
    }
}

/// Inputs describing a synthetic setting where every constant of the error
/// bounds is known.
pub struct BoundSetting<'a> {
    /// The reduced function the samples were drawn from (before noise).
    pub truth: &'a dyn ReducedFunction,
    /// Lipschitz constant of `∇g` on the region.
    pub lipschitz: f64,
    /// Supremum of the noise `|f − g(Uᵀx)|` on the region.
    pub noise_sup: f64,
    pub center: &'a DVector<f64>,
    pub delta: f64,
    /// Interpolation points, center first.
    pub points: &'a [DVector<f64>],
}

/// Measured errors against the value and gradient bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub y_inverse_norm: f64,
    pub kappa_value: f64,
    pub kappa_gradient: f64,
    pub value_bound: f64,
    pub gradient_bound: f64,
    pub max_value_error: f64,
    pub max_gradient_error: f64,
    /// Per probe: both bounds hold.
    pub probe_passed: Vec<bool>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.probe_passed.iter().all(|&p| p)
    }
}

/// Compares `|g − m|` and `‖∇g − ∇m‖` at the probes against
/// `κ₃Δ² + (2√d‖Y⁻¹‖‖Uᵀ‖ + 1)ε` and `κ₄Δ + 2√d‖Y⁻¹‖ε/Δ`, where `Y` is the
/// scaled matrix of `d` projected sample offsets. Among the possible
/// choices of `d` points the one with the smallest `‖Y⁻¹‖` is used.
pub fn error_bound_check(model: &RidgeModel, setting: &BoundSetting<'_>, probes: &[DVector<f64>]) -> BoundReport {
    let d = model.subspace().dim();
    let ut_norm = spectral_norm(&model.u().transpose());
    let yk = model.subspace().project(setting.center);
    let offsets: Vec<DVector<f64>> =
        setting.points[1..].iter().map(|x| (model.subspace().project(x) - &yk) / setting.delta).collect();
    let y_inverse_norm = best_inverse_norm(&offsets, d);
    let sqrt_d = (d as f64).sqrt();
    let h_frob = model.hessian().norm();
    let lip = setting.lipschitz + h_frob;
    let kappa_value = ut_norm.powi(2) * lip * (5.0 * sqrt_d * y_inverse_norm * ut_norm + 1.0) / 2.0;
    let kappa_gradient = lip * 5.0 * sqrt_d * y_inverse_norm * ut_norm.powi(2) / 2.0;
    let eps = setting.noise_sup;
    let value_bound = kappa_value * setting.delta.powi(2) + (2.0 * sqrt_d * y_inverse_norm * ut_norm + 1.0) * eps;
    let gradient_bound = kappa_gradient * setting.delta + 2.0 * sqrt_d * y_inverse_norm * eps / setting.delta;

    let mut max_value_error = 0.0f64;
    let mut max_gradient_error = 0.0f64;
    let probe_passed = probes
        .iter()
        .map(|x| {
            let y = model.subspace().project(x);
            let ev = (setting.truth.value(&y) - model.eval_reduced(&y)).abs();
            let eg = (setting.truth.gradient(&y) - model.grad_reduced(&y)).norm();
            max_value_error = max_value_error.max(ev);
            max_gradient_error = max_gradient_error.max(eg);
            ev <= value_bound && eg <= gradient_bound
        })
        .collect();

    BoundReport {
        y_inverse_norm,
        kappa_value,
        kappa_gradient,
        value_bound,
        gradient_bound,
        max_value_error,
        max_gradient_error,
        probe_passed,
    }
}

/// Smallest `‖Y⁻¹‖₂` over all ways of choosing `d` of the offsets as columns.
fn best_inverse_norm(offsets: &[DVector<f64>], d: usize) -> f64 {
    let mut best = f64::INFINITY;
    let mut combo: Vec<usize> = (0..d).collect();
    if offsets.len() < d {
        return best;
    }
    loop {
        let y = DMatrix::from_fn(d, d, |i, j| offsets[combo[j]][i]);
        let s = crate::linalg::singular_values(&y);
        if let Some(&smin) = s.last() {
            if smin > 0.0 {
                best = best.min(1.0 / smin);
            }
        }
        // Next combination in lexicographic order.
        let mut k = d;
        while k > 0 && combo[k - 1] == offsets.len() - d + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        combo[k - 1] += 1;
        for j in k..d {
            combo[j] = combo[j - 1] + 1;
        }
    }
    best
}
