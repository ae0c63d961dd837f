//! Local gradient-covariance spectra over shrinking hypercubes.

use nalgebra::{DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::problems::Problem;
use crate::subspace::mc_covariance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenDecayRow {
    pub delta: f64,
    /// Descending.
    pub eigenvalues: Vec<f64>,
}

impl EigenDecayRow {
    /// `λ₂/λ₁`, or 0 when `λ₁ = 0`.
    pub fn ratio(&self) -> f64 {
        match self.eigenvalues.as_slice() {
            [l1, l2, ..] if *l1 > 0.0 => l2 / l1,
            _ => 0.0,
        }
    }
}

/// Descending eigenvalues of the Monte-Carlo gradient covariance over
/// `center + [−Δ, Δ]ⁿ`, one row per `Δ`.
pub fn eigen_decay<G>(
    gradient: G,
    center: &DVector<f64>,
    deltas: &[f64],
    samples: usize,
    seed: u64,
) -> Vec<EigenDecayRow>
where
    G: Fn(&DVector<f64>) -> DVector<f64> + Sync,
{
    let n = center.len();
    deltas
        .iter()
        .map(|&delta| {
            let sampler =
                |rng: &mut ChaCha8Rng| DVector::from_fn(n, |i, _| center[i] + delta * rng.random_range(-1.0..=1.0));
            let cov = mc_covariance(&gradient, sampler, samples, seed);
            let mut eigenvalues: Vec<f64> = SymmetricEigen::new(cov.matrix).eigenvalues.iter().copied().collect();
            eigenvalues.sort_by(|a, b| b.total_cmp(a));
            EigenDecayRow { delta, eigenvalues }
        })
        .collect()
}

/// Runs [`eigen_decay`] with a problem's analytic gradient.
pub fn problem_eigen_decay(
    problem: &Problem,
    center: &DVector<f64>,
    deltas: &[f64],
    samples: usize,
    seed: u64,
) -> Vec<EigenDecayRow> {
    eigen_decay(|x| problem.gradient(x), center, deltas, samples, seed)
}

/// A uniformly random point: inside the bounds when present, otherwise in
/// `x₀ + [−1, 1]ⁿ`.
pub fn random_center(problem: &Problem, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match &problem.bounds {
        Some(b) => DVector::from_fn(problem.dim, |i, _| rng.random_range(b.lower[i]..=b.upper[i])),
        None => DVector::from_fn(problem.dim, |i, _| problem.x0[i] + rng.random_range(-1.0..=1.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ridge_is_rank_one() {
        let u = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let rows = eigen_decay(|_| u.clone(), &DVector::zeros(4), &[1.0, 0.1], 500, 3);
        for r in rows {
            assert!(r.ratio() <= 1e-10, "{}", r.ratio());
            assert!((r.eigenvalues[0] - u.norm_squared()).abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_ratio_vanishes_with_delta() {
        // ∇f = x on c + [−Δ, Δ]ⁿ: C = ccᵀ + (Δ²/3) I, so λ₂/λ₁ = (Δ²/3)/(‖c‖² + Δ²/3).
        let c = DVector::from_vec(vec![1.0, 0.5, -0.5]);
        let rows = eigen_decay(|x| x.clone(), &c, &[1.0, 0.1, 0.01], 20_000, 11);
        let ratios: Vec<f64> = rows.iter().map(EigenDecayRow::ratio).collect();
        for (r, d) in ratios.iter().zip([1.0f64, 0.1, 0.01]) {
            let oracle = (d * d / 3.0) / (c.norm_squared() + d * d / 3.0);
            assert!((r - oracle).abs() < 0.1 * oracle + 1e-12, "{r} vs {oracle}");
        }
        assert!(ratios[0] > ratios[1] && ratios[1] > ratios[2]);
    }

    #[test]
    fn eigenvalues_are_descending() {
        let rows = eigen_decay(|x| x.map(|v| v.powi(3)), &DVector::from_element(3, 0.3), &[0.5], 1000, 1);
        let e = &rows[0].eigenvalues;
        assert!(e.windows(2).all(|w| w[0] >= w[1]));
    }
}
