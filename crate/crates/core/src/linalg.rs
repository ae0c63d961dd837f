//! Small dense linear-algebra helpers shared across the crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{GeometryError, InputError};

/// Relative singular-value cutoff used for rank decisions.
pub const RANK_RTOL: f64 = 1e-12;

/// Singular values of `a`, sorted descending.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Numerical rank with cutoff `RANK_RTOL * max(p, q) * s_max`.
pub fn numerical_rank(a: &DMatrix<f64>) -> usize {
    let s = singular_values(a);
    let Some(&smax) = s.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    let tol = RANK_RTOL * a.nrows().max(a.ncols()) as f64 * smax;
    s.iter().filter(|&&v| v > tol).count()
}

/// 2-norm condition number; `f64::INFINITY` for singular or empty matrices.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.get(a.nrows().min(a.ncols()).saturating_sub(1))) {
        (Some(&hi), Some(&lo)) if lo > f64::EPSILON * hi && hi > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Solves `a x = b`: LU with partial pivoting when square, SVD least squares
/// otherwise. Fails when `a` does not have full column rank.
pub fn solve_full_rank(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>, GeometryError> {
    if a.nrows() != b.len() {
        return Err(InputError::DimensionMismatch { expected: a.nrows(), got: b.len() }.into());
    }
    let q = a.ncols();
    if a.nrows() < q {
        return Err(GeometryError::TooFewSamples { have: a.nrows(), need: q });
    }
    let rank = numerical_rank(a);
    if rank < q {
        return Err(GeometryError::RankDeficient { rank, required: q });
    }
    if a.is_square() {
        if let Some(x) = a.clone().lu().solve(b) {
            return Ok(x);
        }
    }
    Ok(lstsq(a, b).0)
}

/// Minimum-norm least squares via SVD. Returns the solution and the rank used.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, usize) {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = RANK_RTOL * a.nrows().max(a.ncols()) as f64 * smax;
    let rank = svd.singular_values.iter().filter(|&&v| v > tol).count();
    let x = if smax == 0.0 { DVector::zeros(a.ncols()) } else { svd.solve(b, tol).expect("svd computed with u and v") };
    (x, rank)
}

/// Orthonormal basis of the column space of `a` (thin QR), sign-normalized.
pub fn orthonormalize(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut q = a.clone().qr().q();
    normalize_column_signs(&mut q);
    q
}

/// Flips columns so that the first entry with magnitude above 1e-12 is positive.
pub fn normalize_column_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        if let Some(first) = col.iter().copied().find(|v| v.abs() > 1e-12) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
    }
}

/// Orthonormal basis for the orthogonal complement of the (orthonormal) columns of `u`.
pub fn orthogonal_complement(u: &DMatrix<f64>) -> DMatrix<f64> {
    let n = u.nrows();
    let d = u.ncols();
    if d >= n {
        return DMatrix::zeros(n, 0);
    }
    let proj = DMatrix::identity(n, n) - u * u.transpose();
    let eig = SymmetricEigen::new(proj);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut v = DMatrix::zeros(n, n - d);
    for (k, &idx) in order.iter().take(n - d).enumerate() {
        v.set_column(k, &eig.eigenvectors.column(idx));
    }
    // Re-orthonormalize to clean up eigen-solver round-off.
    let mut v = v.qr().q();
    normalize_column_signs(&mut v);
    v
}

/// Principal angles (radians, ascending) between the column spans of two
/// orthonormal matrices.
pub fn principal_angles(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let m = a.transpose() * b;
    let mut angles: Vec<f64> = singular_values(&m).iter().map(|s| s.clamp(-1.0, 1.0).acos()).collect();
    angles.sort_by(f64::total_cmp);
    angles
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Largest deviation of `uᵀu` from the identity.
pub fn orthonormality_error(u: &DMatrix<f64>) -> f64 {
    let g = u.transpose() * u - DMatrix::identity(u.ncols(), u.ncols());
    g.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    (a - a.transpose()).iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_of_lower_triangular_two_by_two() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        // Singular values are the golden ratio and its inverse.
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((condition_number(&a) - phi * phi).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_has_infinite_condition() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(condition_number(&a).is_infinite());
        assert_eq!(numerical_rank(&a), 1);
    }

    #[test]
    fn complement_is_orthogonal() {
        let u = orthonormalize(&DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 2.0, 3.0, 1.0]));
        let v = orthogonal_complement(&u);
        assert_eq!(v.ncols(), 2);
        assert!((u.transpose() * &v).abs().max() < 1e-12);
        assert!(orthonormality_error(&v) < 1e-12);
    }

    #[test]
    fn principal_angles_of_identical_spans_vanish() {
        let u = orthonormalize(&DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]));
        let rot = DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        let angles = principal_angles(&u, &(&u * rot));
        assert!(angles.iter().all(|a| a.abs() < 1e-7));
    }

    #[test]
    fn rank_deficient_square_solve_reports_rank() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        assert_eq!(solve_full_rank(&a, &b), Err(GeometryError::RankDeficient { rank: 1, required: 2 }));
    }
}
