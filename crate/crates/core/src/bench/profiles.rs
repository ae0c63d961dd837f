//! Convergence test and performance/data profiles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// 1-based index of the first value with `f ≤ f_L + τ(f₀ − f_L)`.
///
/// When `f₀ = f_L` the threshold is `f_L` itself, so any evaluation reaching
/// the best value passes; callers flag such problems as degenerate.
pub fn convergence_test(values: &[f64], f0: f64, f_l: f64, tau: f64) -> Option<usize> {
    let threshold = f_l + tau * (f0 - f_l);
    values.iter().position(|&v| v <= threshold).map(|i| i + 1)
}

/// A right-continuous, nondecreasing step function starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    /// `(x, value)` pairs with strictly increasing `x`; the function equals
    /// `value` on `[x, next x)`.
    pub steps: Vec<(f64, f64)>,
}

impl StepFunction {
    /// Builds `x ↦ #{v ≤ x} / total` from sample points.
    pub fn empirical(mut samples: Vec<f64>, total: usize) -> Self {
        samples.sort_by(f64::total_cmp);
        let mut steps: Vec<(f64, f64)> = Vec::new();
        for (i, &s) in samples.iter().enumerate() {
            let value = (i + 1) as f64 / total as f64;
            match steps.last_mut() {
                Some(last) if last.0 == s => last.1 = value,
                _ => steps.push((s, value)),
            }
        }
        Self { steps }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.steps.iter().take_while(|(s, _)| *s <= x).last().map_or(0.0, |(_, v)| *v)
    }

    /// The value as `x → ∞`.
    pub fn limit(&self) -> f64 {
        self.steps.last().map_or(0.0, |(_, v)| *v)
    }
}

/// `ρ_s(α)` for each solver. `t[p][s]` is `None` when solver `s` never passed on `p`.
///
/// Problems no solver passes stay in the denominator.
pub fn performance_profile(t: &[Vec<Option<usize>>], solvers: usize) -> Vec<StepFunction> {
    let total = t.len();
    (0..solvers)
        .map(|s| {
            let ratios = t
                .iter()
                .filter_map(|row| {
                    let best = row.iter().flatten().min()?;
                    row[s].map(|ts| ts as f64 / *best as f64)
                })
                .collect();
            StepFunction::empirical(ratios, total)
        })
        .collect()
}

/// `d_s(κ)` for each solver, with `κ` in simplex gradients `n_p + 1`.
pub fn data_profile(t: &[Vec<Option<usize>>], dims: &[usize], solvers: usize) -> Vec<StepFunction> {
    let total = t.len();
    (0..solvers)
        .map(|s| {
            let kappas =
                t.iter().zip(dims).filter_map(|(row, &n)| row[s].map(|ts| ts as f64 / (n + 1) as f64)).collect();
            StepFunction::empirical(kappas, total)
        })
        .collect()
}

/// Per-problem metadata stored with the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemEntry {
    pub dim: usize,
    pub budget: usize,
    pub f0: f64,
    /// Best value any solver reached within the budget.
    pub f_l: f64,
    /// `f₀ = f_L`: the convergence test is trivially passed.
    pub degenerate: bool,
}

/// Evaluation counts to pass the convergence test, keyed problem → solver → τ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ProfileTable {
    pub solvers: Vec<String>,
    pub taus: Vec<f64>,
    pub problems: BTreeMap<String, ProblemEntry>,
    pub t: BTreeMap<String, BTreeMap<String, BTreeMap<String, Option<usize>>>>,
}

/// The map key used for a tolerance, e.g. `1e-1`.
pub fn tau_key(tau: f64) -> String {
    format!("{tau:e}")
}

impl ProfileTable {
    pub fn is_empty(&self) -> bool {
        self.solvers.is_empty() || self.problems.is_empty()
    }

    /// The `t` matrix for one tolerance, rows in problem-name order.
    pub fn matrix(&self, tau: f64) -> Vec<Vec<Option<usize>>> {
        let key = tau_key(tau);
        self.problems
            .keys()
            .map(|p| {
                self.solvers
                    .iter()
                    .map(|s| self.t.get(p).and_then(|m| m.get(s)).and_then(|m| m.get(&key)).copied().flatten())
                    .collect()
            })
            .collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.problems.values().map(|e| e.dim).collect()
    }

    pub fn performance_profiles(&self, tau: f64) -> Vec<StepFunction> {
        performance_profile(&self.matrix(tau), self.solvers.len())
    }

    pub fn data_profiles(&self, tau: f64) -> Vec<StepFunction> {
        data_profile(&self.matrix(tau), &self.dims(), self.solvers.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergence_examples() {
        assert_eq!(convergence_test(&[10.0, 5.0, 0.9, 0.5], 10.0, 0.0, 0.1), Some(3));
        assert_eq!(convergence_test(&[10.0, 5.0], 10.0, 0.0, 10.0), Some(1));
        assert_eq!(convergence_test(&[10.0, 9.0, 8.0], 10.0, 0.0, 0.1), None);
        assert_eq!(convergence_test(&[3.0, 3.0], 3.0, 3.0, 0.1), Some(1));
    }

    #[test]
    fn performance_single_problem() {
        let prof = performance_profile(&[vec![Some(10), Some(20)]], 2);
        assert_eq!(prof[0].value_at(1.0), 1.0);
        assert_eq!(prof[1].value_at(1.0), 0.0);
        assert_eq!(prof[1].value_at(2.0), 1.0);
    }

    #[test]
    fn performance_ties() {
        let prof = performance_profile(&[vec![Some(7), Some(7)]], 2);
        assert_eq!(prof[0].value_at(1.0), 1.0);
        assert_eq!(prof[1].value_at(1.0), 1.0);
    }

    #[test]
    fn performance_three_problems() {
        let t = vec![vec![Some(10), Some(20)], vec![Some(30), Some(15)], vec![None, Some(5)]];
        let prof = performance_profile(&t, 2);
        let third = 1.0 / 3.0;
        assert!((prof[0].value_at(1.0) - third).abs() < 1e-15);
        assert!((prof[1].value_at(1.0) - 2.0 * third).abs() < 1e-15);
        assert!((prof[0].value_at(2.0) - 2.0 * third).abs() < 1e-15);
        assert_eq!(prof[1].limit(), 1.0);
        assert!((prof[0].limit() - 2.0 * third).abs() < 1e-15);
    }

    #[test]
    fn unsolved_everywhere_stays_in_denominator() {
        let t = vec![vec![Some(10)], vec![None]];
        let prof = performance_profile(&t, 1);
        assert_eq!(prof[0].limit(), 0.5);
    }

    #[test]
    fn data_profile_examples() {
        let d = data_profile(&[vec![Some(22)]], &[10], 1);
        assert_eq!(d[0].value_at(1.999), 0.0);
        assert_eq!(d[0].value_at(2.0), 1.0);
        let d = data_profile(&[vec![None]], &[10], 1);
        assert_eq!(d[0].value_at(1e9), 0.0);
        let d = data_profile(&[vec![Some(110)], vec![Some(510)]], &[10, 50], 1);
        assert_eq!(d[0].value_at(10.0), 1.0);
        assert_eq!(d[0].value_at(9.99), 0.0);
    }

    #[test]
    fn tau_keys() {
        assert_eq!(tau_key(0.1), "1e-1");
        assert_eq!(tau_key(1e-5), "1e-5");
    }
}
