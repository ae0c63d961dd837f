//! Dimension-reducing subspaces.
//!
//! A subspace is stored as an orthonormal `n × d` matrix `U`; the active
//! variables are `y = Uᵀx`. Directions come either from a covariance
//! matrix (eigenvectors of the `d` largest eigenvalues), from the gradient
//! of a linear fit, or from variable-projection ridge recovery on the
//! Grassmann manifold.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{GeometryError, InputError};
use crate::geometry::{fit_coefficients, interpolation_matrix, PolyBasis, SampleSet};
use crate::linalg::{lstsq, max_asymmetry, normalize_column_signs, orthogonal_complement, orthonormalize};

/// Orthonormal basis `U` of an active subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    u: DMatrix<f64>,
    complement: Option<DMatrix<f64>>,
    eigenvalues: Option<DVector<f64>>,
}

impl Subspace {
    /// Wraps a matrix whose columns are already orthonormal.
    pub fn new(u: DMatrix<f64>) -> Self {
        debug_assert!(crate::linalg::orthonormality_error(&u) <= 1e-10, "columns of U must be orthonormal");
        Self { u, complement: None, eigenvalues: None }
    }

    /// Orthonormalizes the columns of `a` (thin QR, sign-normalized).
    pub fn from_span(a: &DMatrix<f64>) -> Self {
        Self::new(orthonormalize(a))
    }

    /// The 1-d subspace spanned by `direction`.
    pub fn from_direction(direction: &DVector<f64>) -> Self {
        let mut u = DMatrix::from_column_slice(direction.len(), 1, (direction / direction.norm()).as_slice());
        normalize_column_signs(&mut u);
        Self::new(u)
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn ambient_dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn dim(&self) -> usize {
        self.u.ncols()
    }

    /// Orthonormal basis `V` of the inactive directions.
    pub fn complement(&self) -> DMatrix<f64> {
        self.complement.clone().unwrap_or_else(|| orthogonal_complement(&self.u))
    }

    /// Covariance eigenvalues, descending, when the subspace came from one.
    pub fn eigenvalues(&self) -> Option<&DVector<f64>> {
        self.eigenvalues.as_ref()
    }

    /// Active variables `Uᵀx`.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        self.u.transpose() * x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceSource {
    MonteCarlo,
    LinearModel,
    QuadraticModel,
}

/// A symmetric positive-semidefinite estimate of `E[∇f ∇fᵀ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub matrix: DMatrix<f64>,
    pub source: CovarianceSource,
}

const MC_CHUNK: usize = 4096;

/// `(1/M) Σ ∇f(xᵢ)∇f(xᵢ)ᵀ` with `xᵢ` drawn by `sampler`.
///
/// Samples are drawn in fixed-size chunks, each from its own ChaCha stream,
/// so the result depends only on `seed` and not on thread scheduling.
pub fn mc_covariance<G, S>(grad: G, sampler: S, samples: usize, seed: u64) -> CovarianceEstimate
where
    G: Fn(&DVector<f64>) -> DVector<f64> + Sync,
    S: Fn(&mut ChaCha8Rng) -> DVector<f64> + Sync,
{
    assert!(samples >= 1, "need at least one sample");
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<DMatrix<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut acc: Option<DMatrix<f64>> = None;
            for _ in 0..count {
                let g = grad(&sampler(&mut rng));
                let outer = &g * g.transpose();
                acc = Some(match acc {
                    Some(a) => a + outer,
                    None => outer,
                });
            }
            acc.expect("chunk is nonempty")
        })
        .collect();
    let mut total = partial[0].clone();
    for p in &partial[1..] {
        total += p;
    }
    let matrix = total / samples as f64;
    let matrix = (&matrix + matrix.transpose()) * 0.5;
    CovarianceEstimate { matrix, source: CovarianceSource::MonteCarlo }
}

/// Uniform density on `[−1, 1]ⁿ`.
pub fn uniform_cube(n: usize) -> impl Fn(&mut ChaCha8Rng) -> DVector<f64> + Sync {
    move |rng| DVector::from_fn(n, |_, _| rand::Rng::random_range(rng, -1.0..=1.0))
}

/// Standard Gaussian density on `ℝⁿ`.
pub fn standard_normal(n: usize) -> impl Fn(&mut ChaCha8Rng) -> DVector<f64> + Sync {
    move |rng| DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// Gradient `b` of the least-squares linear fit `c + bᵀx` to the set, and
/// the 1-d subspace `b / ‖b‖`.
pub fn linear_model_subspace(set: &SampleSet) -> Result<(DVector<f64>, Subspace), GeometryError> {
    let center = set.center();
    let scale = crate::geometry::scaling_radius(set.points(), center, 1.0);
    let scaled = crate::geometry::scaled_coordinates(set.points(), center, scale, None);
    let coeffs = fit_coefficients(&PolyBasis::linear(set.dim()), &scaled, set.values())?;
    let b = coeffs.rows(1, set.dim()).clone_owned() / scale;
    let norm = b.norm();
    if !(norm >= 1e-14) {
        return Err(GeometryError::ZeroGradient(norm));
    }
    let subspace = Subspace::from_direction(&b);
    Ok((b, subspace))
}

/// `bbᵀ + (2/3)A²`, the covariance of the quadratic model `bᵀx + ½xᵀAx`
/// as stated for the uniform density on `[−1, 1]ⁿ`.
pub fn quadratic_model_covariance(b: &DVector<f64>, a: &DMatrix<f64>) -> Result<CovarianceEstimate, InputError> {
    quadratic_model_covariance_with_moment(b, a, 2.0 / 3.0)
}

/// `bbᵀ + σ²A²`. The exact expectation of `∇f∇fᵀ` for `f = bᵀx + ½xᵀAx`
/// under any zero-mean density with covariance `σ²I`; `σ² = 1/3` for the
/// uniform density on `[−1, 1]ⁿ`.
pub fn quadratic_model_covariance_with_moment(
    b: &DVector<f64>,
    a: &DMatrix<f64>,
    second_moment: f64,
) -> Result<CovarianceEstimate, InputError> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(InputError::DimensionMismatch { expected: n, got: a.nrows() });
    }
    let asym = max_asymmetry(a);
    if asym > 1e-12 * a.amax().max(1.0) {
        return Err(InputError::NotSymmetric(asym));
    }
    let matrix = b * b.transpose() + a * a * second_moment;
    let matrix = (&matrix + matrix.transpose()) * 0.5;
    Ok(CovarianceEstimate { matrix, source: CovarianceSource::QuadraticModel })
}

/// Splits the eigenvectors of `c` into the leading `d` (active) and the rest.
pub fn eig_partition(c: &CovarianceEstimate, d: usize) -> Result<Subspace, InputError> {
    let n = c.matrix.nrows();
    if d == 0 || d > n {
        return Err(InputError::InvalidParameter(format!("subspace dimension {d} not in 1..={n}")));
    }
    let eig = c.matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut w = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        w.set_column(k, &eig.eigenvectors.column(i));
    }
    normalize_column_signs(&mut w);
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i].max(0.0)));
    Ok(Subspace {
        u: w.columns(0, d).clone_owned(),
        complement: Some(w.columns(d, n - d).clone_owned()),
        eigenvalues: Some(eigenvalues),
    })
}

/// Completes `direction` to an orthonormal `n × d` matrix with seeded
/// Gaussian columns.
pub fn initial_subspace(direction: &DVector<f64>, d: usize, seed: u64) -> Subspace {
    let n = direction.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
    a.set_column(0, &(direction / direction.norm()));
    Subspace::from_span(&a)
}

/// Result of variable-projection ridge recovery.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeRecovery {
    pub subspace: Subspace,
    /// `‖f − MM†f‖²` at the returned subspace.
    pub residual: f64,
    pub iterations: usize,
    /// False when the iteration cap was reached first.
    pub converged: bool,
    /// Objective value after each accepted iteration, starting with the
    /// initial value.
    pub history: Vec<f64>,
}

const VP_MAX_ITERS: usize = 100;
const VP_RTOL: f64 = 1e-8;

/// Centered and scaled sample matrix; row `i` is `(xⁱ − x̄) / s`.
fn normalized_samples(points: &[DVector<f64>]) -> DMatrix<f64> {
    let n = points[0].len();
    let p = points.len();
    let mean = points.iter().fold(DVector::zeros(n), |acc, x| acc + x) / p as f64;
    let scale = points.iter().map(|x| (x - &mean).norm()).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    DMatrix::from_fn(p, n, |i, j| (points[i][j] - mean[j]) / scale)
}

fn projected_rows(x: &DMatrix<f64>, u: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let y = x * u;
    y.row_iter().map(|r| r.transpose()).collect()
}

/// Residual `f − MM†f` and the least-squares coefficients.
fn vp_residual(
    basis: &PolyBasis,
    x: &DMatrix<f64>,
    u: &DMatrix<f64>,
    f: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>, DMatrix<f64>) {
    let y = projected_rows(x, u);
    let m = interpolation_matrix(basis, &y).expect("projected dimension matches basis");
    let (coeffs, _) = lstsq(&m, f);
    let r = f - &m * &coeffs;
    (r, coeffs, m)
}

/// `‖f − M(φ, Y)M(φ, Y)†f‖²` with `Y = {Uᵀxⁱ}` and `φ` the degree-`degree`
/// natural basis in `d = U.ncols()` variables.
pub fn vp_objective(points: &[DVector<f64>], values: &[f64], u: &DMatrix<f64>, degree: usize) -> f64 {
    let x = normalized_samples(points);
    let f = DVector::from_column_slice(values);
    let basis = PolyBasis::new(u.ncols(), degree);
    vp_residual(&basis, &x, u, &f).0.norm_squared()
}

/// Fits a degree-`degree` polynomial ridge function `g(Uᵀx)` to the data by
/// Gauss-Newton on the Grassmann manifold, with the polynomial coefficients
/// eliminated by variable projection. Starts from `initial`.
pub fn ridge_recovery_vp(
    points: &[DVector<f64>],
    values: &[f64],
    degree: usize,
    initial: &Subspace,
) -> Result<RidgeRecovery, GeometryError> {
    let d = initial.dim();
    let n = initial.ambient_dim();
    let basis = PolyBasis::new(d, degree);
    if points.len() != values.len() {
        return Err(InputError::DimensionMismatch { expected: points.len(), got: values.len() }.into());
    }
    if points.len() <= basis.size() {
        return Err(GeometryError::TooFewSamples { have: points.len(), need: basis.size() + 1 });
    }
    let x = normalized_samples(points);
    let f = DVector::from_column_slice(values);
    let floor = 1e-28 * f.norm_squared().max(f64::MIN_POSITIVE);

    let mut u = initial.u().clone();
    let (mut r, mut coeffs, _) = vp_residual(&basis, &x, &u, &f);
    let mut obj = r.norm_squared();
    let mut history = vec![obj];
    let mut converged = d == n || obj <= floor;
    let mut iterations = 0;

    while !converged && iterations < VP_MAX_ITERS {
        iterations += 1;
        let perp = orthogonal_complement(&u);
        let jac = vp_jacobian(&basis, &x, &u, &perp, &coeffs);
        let grad = jac.transpose() * &r;
        let (mut step, _) = lstsq(&jac, &(-&r));
        if grad.dot(&step) >= 0.0 || !step.iter().all(|v| v.is_finite()) {
            step = -&grad;
        }
        let slope = 2.0 * grad.dot(&step);
        if slope >= 0.0 {
            converged = true;
            break;
        }
        let tangent = &perp * DMatrix::from_column_slice(n - d, d, step.as_slice());

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = orthonormalize(&(&u + &tangent * t));
            let (tr, tc, _) = vp_residual(&basis, &x, &trial, &f);
            let tobj = tr.norm_squared();
            if tobj <= obj + 1e-4 * t * slope && tobj <= obj {
                accepted = Some((trial, tr, tc, tobj));
                break;
            }
            t *= 0.5;
        }
        let Some((nu, nr, nc, nobj)) = accepted else {
            converged = true;
            break;
        };
        let rel = (obj - nobj) / obj.max(f64::MIN_POSITIVE);
        u = nu;
        r = nr;
        coeffs = nc;
        obj = nobj;
        history.push(obj);
        if rel < VP_RTOL || obj <= floor {
            converged = true;
        }
    }

    if !converged {
        log::warn!("ridge recovery stopped at the iteration cap with objective {obj:.3e}");
    }
    normalize_column_signs(&mut u);
    Ok(RidgeRecovery { subspace: Subspace::new(u), residual: obj, iterations, converged, history })
}

/// Kaufman approximation of the residual Jacobian with respect to the
/// tangent coordinates `B` in `U + U⊥B`; column `(k, b)` is stored at
/// `b·(n−d) + k`.
fn vp_jacobian(
    basis: &PolyBasis,
    x: &DMatrix<f64>,
    u: &DMatrix<f64>,
    perp: &DMatrix<f64>,
    coeffs: &DVector<f64>,
) -> DMatrix<f64> {
    let p = x.nrows();
    let d = u.ncols();
    let k_dim = perp.ncols();
    let y = projected_rows(x, u);
    let m = interpolation_matrix(basis, &y).expect("projected dimension matches basis");
    let xp = x * perp;
    // ∂g/∂y_b at each sample.
    let dg = DMatrix::from_fn(p, d, |i, b| {
        let grad = basis.grad_poly(coeffs, y[i].as_slice()).expect("dimension matches");
        grad[b]
    });
    let mut raw = DMatrix::zeros(p, k_dim * d);
    for b in 0..d {
        for k in 0..k_dim {
            let col = xp.column(k).component_mul(&dg.column(b));
            raw.set_column(b * k_dim + k, &col);
        }
    }
    // Apply −P⊥ = −(I − MM†) using an orthonormal basis of range(M).
    let svd = m.svd(true, false);
    let smax = svd.singular_values.max();
    let tol = crate::linalg::RANK_RTOL * p.max(basis.size()) as f64 * smax;
    let uq = svd.u.expect("requested");
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > tol).collect();
    let q = uq.select_columns(&keep);
    let proj = &q * (q.transpose() * &raw);
    -(raw - proj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormality_error;
    use rand::Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn constant_gradient_covariance_is_exact() {
        let c = mc_covariance(|_| v(&[1.0, 0.0, 0.0]), uniform_cube(3), 17, 1);
        let expected = DMatrix::from_fn(3, 3, |i, j| if i == 0 && j == 0 { 1.0 } else { 0.0 });
        assert!((c.matrix - expected).amax() < 1e-15);
    }

    #[test]
    fn constant_function_has_zero_covariance() {
        let c = mc_covariance(|_| DVector::zeros(2), uniform_cube(2), 10, 3);
        assert_eq!(c.matrix, DMatrix::zeros(2, 2));
    }

    #[test]
    fn isotropic_quadratic_covariance_is_one_third() {
        let c = mc_covariance(|x| x.clone(), uniform_cube(2), 100_000, 7);
        let err = (c.matrix - DMatrix::identity(2, 2) / 3.0).norm();
        assert!(err <= 0.05, "{err}");
    }

    #[test]
    fn mc_is_deterministic_in_seed() {
        let a = mc_covariance(|x| x.clone(), uniform_cube(3), 10_000, 42);
        let b = mc_covariance(|x| x.clone(), uniform_cube(3), 10_000, 42);
        assert_eq!(a, b);
    }

    #[test]
    fn linear_fit_recovers_gradient() {
        let pts = vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let vals: Vec<f64> = pts.iter().map(|p| 3.0 * p[0] + 4.0 * p[1]).collect();
        let (b, s) = linear_model_subspace(&SampleSet::from_parts(pts, vals, 3)).unwrap();
        assert!((b - v(&[3.0, 4.0])).norm() < 1e-12);
        assert!((s.u().column(0) - v(&[0.6, 0.8])).norm() < 1e-12);
    }

    #[test]
    fn flat_fit_signals_zero_gradient() {
        let pts = vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let err = linear_model_subspace(&SampleSet::from_parts(pts, vec![2.0; 3], 3)).unwrap_err();
        assert!(matches!(err, GeometryError::ZeroGradient(_)));
    }

    #[test]
    fn monotone_ridge_direction_is_recovered_locally() {
        let u = v(&[0.48, 0.64, 0.6]);
        let f = |x: &DVector<f64>| (u.dot(x)).tanh() + u.dot(x);
        let c = v(&[0.2, -0.1, 0.3]);
        let h = 1e-3;
        let mut pts = vec![c.clone()];
        for i in 0..3 {
            let mut p = c.clone();
            p[i] += h;
            pts.push(p);
        }
        let vals: Vec<f64> = pts.iter().map(f).collect();
        let (_, s) = linear_model_subspace(&SampleSet::from_parts(pts, vals, 4)).unwrap();
        assert!(s.u().column(0).dot(&u).abs() >= 0.99);
    }

    #[test]
    fn quadratic_covariance_examples() {
        let c = quadratic_model_covariance(&DVector::zeros(3), &DMatrix::identity(3, 3)).unwrap();
        assert!((c.matrix - DMatrix::identity(3, 3) * (2.0 / 3.0)).amax() < 1e-15);
        let c = quadratic_model_covariance(&v(&[1.0, 0.0]), &DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(c.matrix, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(quadratic_model_covariance(&v(&[0.0, 0.0]), &bad), Err(InputError::NotSymmetric(_))));
    }

    #[test]
    fn partition_diagonal() {
        let c = CovarianceEstimate {
            matrix: DMatrix::from_diagonal(&v(&[4.0, 1.0, 0.0])),
            source: CovarianceSource::MonteCarlo,
        };
        let s = eig_partition(&c, 1).unwrap();
        assert!((s.u().column(0) - v(&[1.0, 0.0, 0.0])).norm() < 1e-14);
        assert_eq!(s.eigenvalues().unwrap(), &v(&[4.0, 1.0, 0.0]));
        let w = s.complement();
        assert!((s.u().transpose() * w).amax() < 1e-14);
    }

    #[test]
    fn partition_of_identity_keeps_invariants() {
        let c = CovarianceEstimate { matrix: DMatrix::identity(4, 4), source: CovarianceSource::MonteCarlo };
        let s = eig_partition(&c, 2).unwrap();
        assert!(orthonormality_error(s.u()) < 1e-12);
        let ev = s.eigenvalues().unwrap();
        assert!(ev.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn partition_picks_dominant_hessian_direction() {
        let c = quadratic_model_covariance(&v(&[1.0, 0.0]), &DMatrix::from_diagonal(&v(&[0.0, 3.0]))).unwrap();
        // Closed-form 2×2 eigenproblem: diag(1, 6) has top eigenvector e₂.
        let (a, b, d) = (c.matrix[(0, 0)], c.matrix[(0, 1)], c.matrix[(1, 1)]);
        let top = 0.5 * (a + d) + (0.25 * (a - d).powi(2) + b * b).sqrt();
        assert!((top - 6.0).abs() < 1e-12);
        let s = eig_partition(&c, 1).unwrap();
        assert!((s.u().column(0) - v(&[0.0, 1.0])).norm() < 1e-12);
    }

    #[test]
    fn partition_reconstructs_matrix() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.1, 0.5, 1.0, 0.3, 0.1, 0.3, 0.7]);
        let c = CovarianceEstimate { matrix: &a * &a, source: CovarianceSource::MonteCarlo };
        let s = eig_partition(&c, 1).unwrap();
        let mut w = s.u().clone().insert_columns(1, 2, 0.0);
        w.columns_mut(1, 2).copy_from(&s.complement());
        let lam = DMatrix::from_diagonal(s.eigenvalues().unwrap());
        let recon = &w * lam * w.transpose();
        assert!((recon - &c.matrix).norm() <= 1e-8 * c.matrix.norm());
    }

    fn ridge_data(
        u: &DMatrix<f64>,
        g: impl Fn(&DVector<f64>) -> f64,
        p: usize,
        seed: u64,
    ) -> (Vec<DVector<f64>>, Vec<f64>) {
        let n = u.nrows();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<DVector<f64>> = (0..p).map(|_| DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))).collect();
        let vals = pts.iter().map(|x| g(&(u.transpose() * x))).collect();
        (pts, vals)
    }

    #[test]
    fn vp_recovers_quadratic_ridge() {
        let truth = DMatrix::from_column_slice(4, 1, &[0.5, -0.5, 0.5, 0.5]);
        let (pts, vals) = ridge_data(&truth, |y| y[0] * y[0], 20, 5);
        let start = Subspace::from_direction(&v(&[0.7, -0.1, 0.5, 0.2]));
        let rec = ridge_recovery_vp(&pts, &vals, 2, &start).unwrap();
        assert!(rec.residual <= 1e-8, "{}", rec.residual);
        assert!(rec.subspace.u().column(0).dot(&truth.column(0)).abs() >= 1.0 - 1e-6);
        assert!(rec.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn vp_recovers_two_dim_ridge() {
        let truth =
            orthonormalize(&DMatrix::from_row_slice(5, 2, &[1.0, 0.0, 0.5, 1.0, 0.0, 0.3, -0.2, 0.0, 0.1, 0.4]));
        let (pts, vals) = ridge_data(&truth, |y| y[0] * y[1] + y[0] * y[0] - 0.5 * y[1], 40, 9);
        let start = Subspace::from_span(&(&truth + DMatrix::from_fn(5, 2, |i, j| 0.1 * ((i + 2 * j) as f64).sin())));
        let rec = ridge_recovery_vp(&pts, &vals, 2, &start).unwrap();
        let angles = crate::linalg::principal_angles(rec.subspace.u(), &truth);
        assert!(angles.iter().all(|a| *a < 1e-4), "{angles:?}");
        assert!(rec.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn full_dimension_objective_ignores_rotation() {
        let (pts, vals) = ridge_data(&DMatrix::identity(2, 2), |y| y[0].sin() + y[1].powi(3), 15, 2);
        let rot = DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        let a = vp_objective(&pts, &vals, &DMatrix::identity(2, 2), 2);
        let b = vp_objective(&pts, &vals, &rot, 2);
        assert!((a - b).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn objective_is_right_invariant() {
        let (pts, vals) = ridge_data(&DMatrix::identity(4, 4), |y| y[0].exp() + y[1] * y[2], 30, 4);
        let u = orthonormalize(&DMatrix::from_row_slice(4, 2, &[1.0, 0.2, 0.3, 1.0, 0.0, 0.5, 0.4, 0.1]));
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let a = vp_objective(&pts, &vals, &u, 2);
        let b = vp_objective(&pts, &vals, &(&u * rot), 2);
        assert!((a - b).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn too_few_samples_rejected() {
        let pts = vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let err = ridge_recovery_vp(&pts, &[0.0, 1.0, 2.0], 2, &Subspace::from_direction(&v(&[1.0, 0.0]))).unwrap_err();
        assert_eq!(err, GeometryError::TooFewSamples { have: 3, need: 4 });
    }

    #[test]
    fn initial_subspace_contains_direction() {
        let b = v(&[1.0, 2.0, 2.0, 0.0]);
        let s = initial_subspace(&b, 2, 11);
        assert!(orthonormality_error(s.u()) < 1e-12);
        assert!((s.u().column(0).dot(&b) / 3.0).abs() > 1.0 - 1e-12);
    }
}
