use nalgebra::{DMatrix, DVector};

use crate::error::InputError;

/// The natural polynomial basis of degree `r` in `m` variables.
///
/// Ordering is the constant, the `m` linear terms, then each higher total
/// degree in lexicographic order of exponents (`½x₁², x₁x₂, …, ½x_m²` for
/// degree two). Every monomial `x^α` is scaled by `1/α!`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyBasis {
    dim: usize,
    degree: usize,
    exponents: Vec<Vec<u32>>,
    scales: Vec<f64>,
}

impl PolyBasis {
    pub fn new(dim: usize, degree: usize) -> Self {
        assert!(dim >= 1, "basis dimension must be positive");
        let mut exponents = Vec::new();
        for total in 0..=degree {
            exponents.extend(multi_indices(dim, total as u32));
        }
        let scales = exponents.iter().map(|alpha| 1.0 / alpha.iter().map(|&a| factorial(a)).product::<f64>()).collect();
        Self { dim, degree, exponents, scales }
    }

    /// Linear basis `(1, x₁, …, x_m)`.
    pub fn linear(dim: usize) -> Self {
        Self::new(dim, 1)
    }

    /// Quadratic basis with `(m + 1)(m + 2) / 2` terms.
    pub fn quadratic(dim: usize) -> Self {
        Self::new(dim, 2)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions, `C(m + r, r)`.
    pub fn size(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn eval(&self, x: &[f64]) -> Result<DVector<f64>, InputError> {
        self.check(x.len())?;
        Ok(DVector::from_iterator(
            self.size(),
            self.exponents.iter().zip(&self.scales).map(|(alpha, s)| s * monomial(alpha, x)),
        ))
    }

    /// Jacobian of the basis: row `j` is the gradient of `φ_j` at `x`.
    pub fn gradient(&self, x: &[f64]) -> Result<DMatrix<f64>, InputError> {
        self.check(x.len())?;
        let mut jac = DMatrix::zeros(self.size(), self.dim);
        for (j, (alpha, s)) in self.exponents.iter().zip(&self.scales).enumerate() {
            for k in 0..self.dim {
                if alpha[k] == 0 {
                    continue;
                }
                let mut reduced = alpha.clone();
                reduced[k] -= 1;
                jac[(j, k)] = s * alpha[k] as f64 * monomial(&reduced, x);
            }
        }
        Ok(jac)
    }

    /// Value of the polynomial with coefficients `coeffs` at `x`.
    pub fn eval_poly(&self, coeffs: &DVector<f64>, x: &[f64]) -> Result<f64, InputError> {
        Ok(self.eval(x)?.dot(coeffs))
    }

    /// Gradient of the polynomial with coefficients `coeffs` at `x`.
    pub fn grad_poly(&self, coeffs: &DVector<f64>, x: &[f64]) -> Result<DVector<f64>, InputError> {
        Ok(self.gradient(x)?.transpose() * coeffs)
    }

    /// Splits quadratic-basis coefficients into `(c, g, H)` with
    /// `p(x) = c + gᵀx + ½xᵀHx`. Only valid for degree-two bases.
    pub fn quadratic_parts(&self, coeffs: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        assert_eq!(self.degree, 2, "quadratic_parts needs a degree-2 basis");
        let m = self.dim;
        let c = coeffs[0];
        let g = DVector::from_iterator(m, (1..=m).map(|i| coeffs[i]));
        let mut h = DMatrix::zeros(m, m);
        for (j, alpha) in self.exponents.iter().enumerate().skip(m + 1) {
            let nz: Vec<usize> = (0..m).filter(|&k| alpha[k] > 0).collect();
            match nz.as_slice() {
                [k] => h[(*k, *k)] += coeffs[j],
                [a, b] => {
                    h[(*a, *b)] += coeffs[j];
                    h[(*b, *a)] += coeffs[j];
                }
                _ => unreachable!("degree-2 monomial"),
            }
        }
        let h = (&h + h.transpose()) * 0.5;
        (c, g, h)
    }

    fn check(&self, len: usize) -> Result<(), InputError> {
        if len != self.dim {
            return Err(InputError::DimensionMismatch { expected: self.dim, got: len });
        }
        Ok(())
    }
}

/// Exponent vectors of total degree `total` in `dim` variables, ordered with
/// the first exponent descending.
fn multi_indices(dim: usize, total: u32) -> Vec<Vec<u32>> {
    if dim == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for rest in multi_indices(dim - 1, total - first) {
            let mut alpha = Vec::with_capacity(dim);
            alpha.push(first);
            alpha.extend(rest);
            out.push(alpha);
        }
    }
    out
}

fn monomial(alpha: &[u32], x: &[f64]) -> f64 {
    alpha.iter().zip(x).map(|(&a, &xi)| xi.powi(a as i32)).product()
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

pub fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
