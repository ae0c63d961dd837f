//! Polynomial interpolation on sample sets.
//!
//! Interpolation matrices are built from the natural basis, either on the
//! raw points or on the shifted and scaled set `(xⁱ − x_k) / Δ̃` with
//! `Δ̃ = max ‖xⁱ − x_k‖₂`. Sets used for ridge models are interpolated on
//! projected coordinates `Uᵀx`; every routine here accepts an optional
//! projection for that purpose.

mod basis;
mod pivot;
mod sample_set;

pub use basis::{binomial, PolyBasis};
pub use pivot::{
    maximize_abs_poly, pivotal_update, pivotal_update_keeping, PivotMode, PivotUpdate, Slot, PIVOT_THRESHOLD,
};
pub use sample_set::SampleSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeometryError, InputError};
use crate::linalg::{condition_number, solve_full_rank};

/// Row `i` is the basis evaluated at sample `i`.
pub fn interpolation_matrix(basis: &PolyBasis, samples: &[DVector<f64>]) -> Result<DMatrix<f64>, InputError> {
    let mut m = DMatrix::zeros(samples.len(), basis.size());
    for (i, x) in samples.iter().enumerate() {
        m.set_row(i, &basis.eval(x.as_slice())?.transpose());
    }
    Ok(m)
}

/// Coefficients `α` minimizing `‖Mα − f‖₂`; exact interpolation when the
/// system is square and nonsingular.
pub fn fit_coefficients(
    basis: &PolyBasis,
    samples: &[DVector<f64>],
    values: &[f64],
) -> Result<DVector<f64>, GeometryError> {
    if samples.len() != values.len() {
        return Err(InputError::DimensionMismatch { expected: samples.len(), got: values.len() }.into());
    }
    let m = interpolation_matrix(basis, samples)?;
    solve_full_rank(&m, &DVector::from_column_slice(values))
}

/// Linear map applied to `x − x_k` before the basis is evaluated.
/// `None` means the identity (full-space interpolation).
pub type Projection<'a> = Option<&'a DMatrix<f64>>;

pub(crate) fn project(projection: Projection<'_>, v: &DVector<f64>) -> DVector<f64> {
    match projection {
        Some(p) => p * v,
        None => v.clone(),
    }
}

/// `Δ̃ = max ‖xⁱ − x_k‖₂`, falling back to `fallback` for a single-point set.
pub fn scaling_radius(points: &[DVector<f64>], center: &DVector<f64>, fallback: f64) -> f64 {
    let r = points.iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
    if r > 0.0 {
        r
    } else {
        fallback
    }
}

/// Shifted, scaled and (optionally) projected coordinates of `points`.
pub fn scaled_coordinates(
    points: &[DVector<f64>],
    center: &DVector<f64>,
    scale: f64,
    projection: Projection<'_>,
) -> Vec<DVector<f64>> {
    points.iter().map(|p| project(projection, &((p - center) / scale))).collect()
}

/// Condition number of the scaled interpolation matrix `M̃` of the set;
/// `f64::INFINITY` when it is singular.
pub fn poisedness_diag(
    points: &[DVector<f64>],
    center: &DVector<f64>,
    delta: f64,
    basis: &PolyBasis,
    projection: Projection<'_>,
) -> f64 {
    if points.is_empty() {
        return f64::INFINITY;
    }
    let scale = scaling_radius(points, center, delta);
    let scaled = scaled_coordinates(points, center, scale, projection);
    match interpolation_matrix(basis, &scaled) {
        Ok(m) if m.nrows() >= m.ncols() => condition_number(&m),
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[&[f64]]) -> Vec<DVector<f64>> {
        rows.iter().map(|r| DVector::from_column_slice(r)).collect()
    }

    #[test]
    fn interpolation_matrix_examples() {
        let m = interpolation_matrix(&PolyBasis::linear(1), &pts(&[&[0.0], &[1.0]])).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]));

        let m = interpolation_matrix(&PolyBasis::linear(2), &pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0]));

        let m = interpolation_matrix(&PolyBasis::quadratic(1), &pts(&[&[-1.0], &[0.0], &[1.0]])).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.5, 1.0, 0.0, 0.0, 1.0, 1.0, 0.5]));
    }

    #[test]
    fn fit_exact_square() {
        let a = fit_coefficients(&PolyBasis::quadratic(1), &pts(&[&[-1.0], &[0.0], &[1.0]]), &[1.0, 0.0, 1.0]).unwrap();
        assert!((a - DVector::from_vec(vec![0.0, 0.0, 2.0])).norm() < 1e-14);
    }

    #[test]
    fn fit_constant() {
        let a = fit_coefficients(&PolyBasis::quadratic(1), &pts(&[&[-0.3], &[0.2], &[1.7]]), &[5.0; 3]).unwrap();
        assert!((a - DVector::from_vec(vec![5.0, 0.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn fit_affine_two_dim() {
        let x = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let f: Vec<f64> = x.iter().map(|p| 2.0 * p[0] - p[1] + 3.0).collect();
        let a = fit_coefficients(&PolyBasis::linear(2), &x, &f).unwrap();
        assert!((a - DVector::from_vec(vec![3.0, 2.0, -1.0])).norm() < 1e-14);
    }

    #[test]
    fn fit_least_squares_overdetermined() {
        let x = pts(&[&[0.0], &[1.0], &[2.0], &[3.0]]);
        let a = fit_coefficients(&PolyBasis::linear(1), &x, &[1.0, 3.0, 5.0, 7.0]).unwrap();
        assert!((a - DVector::from_vec(vec![1.0, 2.0])).norm() < 1e-12);
    }

    #[test]
    fn fit_reports_rank_of_degenerate_set() {
        let x = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]]);
        let err = fit_coefficients(&PolyBasis::linear(2), &x, &[0.0, 1.0, 2.0]).unwrap_err();
        assert_eq!(err, GeometryError::RankDeficient { rank: 2, required: 3 });
    }

    #[test]
    fn poisedness_of_two_point_linear_set() {
        let delta = 0.25;
        let x = pts(&[&[0.0], &[delta]]);
        let c = poisedness_diag(&x, &x[0], delta, &PolyBasis::linear(1), None);
        // Oracle: singular values of [[1,0],[1,1]] are φ and 1/φ.
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let s = m.svd(false, false).singular_values;
        let oracle: f64 = s.max() / s.min();
        assert!((c - oracle).abs() < 1e-12);
    }

    #[test]
    fn poisedness_of_duplicate_points_is_infinite() {
        let x = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 0.0]]);
        assert!(poisedness_diag(&x, &x[0], 1.0, &PolyBasis::linear(2), None).is_infinite());
    }

    #[test]
    fn spread_designs_are_better_conditioned() {
        let c = DVector::zeros(2);
        let tight = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.9, 0.1]]);
        let spread = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let basis = PolyBasis::linear(2);
        let kt = poisedness_diag(&tight, &c, 1.0, &basis, None);
        let ks = poisedness_diag(&spread, &c, 1.0, &basis, None);
        // Brute-force SVD oracle on the same scaled matrices.
        let oracle = |p: &[DVector<f64>]| {
            let m = interpolation_matrix(&basis, p).unwrap();
            let s = m.svd(false, false).singular_values;
            s.max() / s.min()
        };
        assert!((kt - oracle(&tight)).abs() < 1e-9 * kt);
        assert!((ks - oracle(&spread)).abs() < 1e-9 * ks);
        assert!(ks < kt);
    }
}
