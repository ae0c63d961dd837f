use nalgebra::{DMatrix, DVector};

use super::{project, scaled_coordinates, scaling_radius, PolyBasis, Projection, SampleSet};
use crate::error::GeometryError;
use crate::linalg::inf_norm;
use crate::trust_region::FeasibleBox;

/// Smallest acceptable absolute pivot on the scaled set.
pub const PIVOT_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotMode {
    /// Reorder and trim using existing points only.
    ReplaceOnly,
    /// Propose a new point at the final index, and wherever no existing
    /// point has an acceptable pivot.
    Improve,
}

/// Where the point in a given position of the updated set comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Slot {
    Existing(usize),
    New(DVector<f64>),
}

/// Result of one pass of the pivotal algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotUpdate {
    /// Selected points in order; slot 0 is always the center.
    pub slots: Vec<Slot>,
    /// `μ_i` evaluated at the point selected for position `i`.
    pub pivots: Vec<f64>,
    /// Row `i` holds the coefficients of `μ_i` over the basis, acting on
    /// scaled coordinates.
    pub polynomials: DMatrix<f64>,
    /// The scaling radius `Δ̃` used for the scaled coordinates.
    pub scale: f64,
}

impl PivotUpdate {
    /// Points that still need an objective evaluation.
    pub fn new_points(&self) -> Vec<DVector<f64>> {
        self.slots
            .iter()
            .filter_map(|s| match s {
                Slot::New(x) => Some(x.clone()),
                Slot::Existing(_) => None,
            })
            .collect()
    }

    /// Builds the updated set. `new_values` are the objective values of
    /// [`Self::new_points`], in the same order.
    pub fn assemble(&self, set: &SampleSet, new_values: &[f64]) -> SampleSet {
        let mut fresh = new_values.iter();
        let mut points = Vec::with_capacity(self.slots.len());
        let mut values = Vec::with_capacity(self.slots.len());
        for slot in &self.slots {
            match slot {
                Slot::Existing(j) => {
                    points.push(set.points()[*j].clone());
                    values.push(set.values()[*j]);
                }
                Slot::New(x) => {
                    points.push(x.clone());
                    values.push(*fresh.next().expect("one value per new point"));
                }
            }
        }
        SampleSet::from_parts(points, values, set.capacity())
    }

    pub fn min_abs_pivot(&self) -> f64 {
        self.pivots.iter().map(|p| p.abs()).fold(f64::INFINITY, f64::min)
    }
}

/// Gaussian elimination with row pivoting over the scaled set
/// `(xⁱ − x_k) / Δ̃`, choosing `q` points from `set` (and, in improve mode,
/// new points from `region`). `delta` is the trust-region radius used in
/// the distance penalty `max(‖x − x_k‖⁴ / Δ⁴, 1)`.
pub fn pivotal_update(
    set: &SampleSet,
    delta: f64,
    basis: &PolyBasis,
    projection: Projection<'_>,
    region: &FeasibleBox,
    mode: PivotMode,
) -> Result<PivotUpdate, GeometryError> {
    pivotal_update_keeping(set, delta, basis, projection, region, mode, None)
}

/// [`pivotal_update`] that selects the point at index `keep` as soon as its
/// pivot is acceptable, so it survives the update whenever the geometry
/// allows.
pub fn pivotal_update_keeping(
    set: &SampleSet,
    delta: f64,
    basis: &PolyBasis,
    projection: Projection<'_>,
    region: &FeasibleBox,
    mode: PivotMode,
    keep: Option<usize>,
) -> Result<PivotUpdate, GeometryError> {
    let q = basis.size();
    if mode == PivotMode::ReplaceOnly && set.len() < q {
        return Err(GeometryError::TooFewSamples { have: set.len(), need: q });
    }
    let center = set.center();
    let scale = scaling_radius(set.points(), center, delta);
    let scaled = scaled_coordinates(set.points(), center, scale, projection);
    let phi: Vec<DVector<f64>> = scaled.iter().map(|z| basis.eval(z.as_slice())).collect::<Result<_, _>>()?;
    let penalty: Vec<f64> = set.points().iter().map(|x| (inf_norm(&(x - center)) / delta).powi(4).max(1.0)).collect();
    let dist: Vec<f64> = set.points().iter().map(|x| inf_norm(&(x - center))).collect();

    let mut mu = DMatrix::<f64>::identity(q, q);
    let mut slots = Vec::with_capacity(q);
    let mut pivots = Vec::with_capacity(q);

    // Position 0 is the center; the constant pivot is φ₀(0) = 1.
    eliminate(&mut mu, 0, &phi[0]);
    slots.push(Slot::Existing(0));
    pivots.push(mu.row(0).transpose().dot(&phi[0]));
    let mut remaining: Vec<usize> = (1..set.len()).collect();

    for i in 1..q {
        let row = mu.row(i).transpose();
        let best = remaining
            .iter()
            .enumerate()
            .map(|(pos, &j)| {
                let value = row.dot(&phi[j]);
                (pos, j, value, value.abs() / penalty[j])
            })
            .fold(None::<(usize, usize, f64, f64)>, |acc, cand| match acc {
                None => Some(cand),
                Some(b) => {
                    let tie = (cand.3 - b.3).abs() <= 1e-12 * b.3.max(cand.3);
                    if (!tie && cand.3 > b.3) || (tie && dist[cand.1] < dist[b.1]) {
                        Some(cand)
                    } else {
                        Some(b)
                    }
                }
            });

        let kept = keep.and_then(|k| remaining.iter().position(|&j| j == k)).and_then(|pos| {
            let j = remaining[pos];
            let value = row.dot(&phi[j]);
            (value.abs() >= PIVOT_THRESHOLD).then_some((pos, j, value, 0.0))
        });
        let acceptable = kept.or_else(|| best.filter(|b| b.2.abs() >= PIVOT_THRESHOLD));
        let generate = mode == PivotMode::Improve && (i == q - 1 || acceptable.is_none());

        let (phi_t, pivot) = if generate {
            let (x, _) = maximize_abs_poly(&row, basis, center, scale, projection, region);
            let z = project(projection, &((&x - center) / scale));
            let phi_t = basis.eval(z.as_slice())?;
            let pivot = row.dot(&phi_t);
            if pivot.abs() < PIVOT_THRESHOLD {
                return Err(GeometryError::ImprovementFailed { index: i, pivot: pivot.abs() });
            }
            slots.push(Slot::New(x));
            (phi_t, pivot)
        } else {
            match acceptable {
                Some((pos, j, value, _)) => {
                    remaining.remove(pos);
                    slots.push(Slot::Existing(j));
                    (phi[j].clone(), value)
                }
                None => {
                    let pivot = best.map_or(0.0, |b| b.2.abs());
                    return Err(GeometryError::PoorlyPoised { index: i, pivot });
                }
            }
        };
        eliminate(&mut mu, i, &phi_t);
        pivots.push(pivot);
    }

    Ok(PivotUpdate { slots, pivots, polynomials: mu, scale })
}

/// After selecting a point with basis values `phi_t` for position `i`,
/// makes every later pivot polynomial vanish there.
fn eliminate(mu: &mut DMatrix<f64>, i: usize, phi_t: &DVector<f64>) {
    let pivot = mu.row(i).transpose().dot(phi_t);
    if pivot == 0.0 {
        return;
    }
    let pivot_row = mu.row(i).clone_owned();
    for j in i + 1..mu.nrows() {
        let factor = mu.row(j).transpose().dot(phi_t) / pivot;
        if factor != 0.0 {
            let updated = mu.row(j) - &pivot_row * factor;
            mu.set_row(j, &updated);
        }
    }
}

/// Maximizes `|p(z)|` with `z = P(x − x_k)/Δ̃` over `x ∈ region`, where
/// `p` has coefficients `coeffs`. Uses projected-gradient ascent on `±p`
/// from a handful of structured starting points. Returns the maximizer
/// and `|p|` there.
pub fn maximize_abs_poly(
    coeffs: &DVector<f64>,
    basis: &PolyBasis,
    center: &DVector<f64>,
    scale: f64,
    projection: Projection<'_>,
    region: &FeasibleBox,
) -> (DVector<f64>, f64) {
    let n = center.len();
    let value = |x: &DVector<f64>| {
        let z = project(projection, &((x - center) / scale));
        basis.eval_poly(coeffs, z.as_slice()).expect("dimension checked")
    };
    let grad = |x: &DVector<f64>| {
        let z = project(projection, &((x - center) / scale));
        let gz = basis.grad_poly(coeffs, z.as_slice()).expect("dimension checked");
        let gx = match projection {
            Some(p) => p.transpose() * gz,
            None => gz,
        };
        gx / scale
    };

    let mut starts = vec![region.project(center)];
    let g0 = grad(center);
    for sign in [1.0, -1.0] {
        starts.push(region.corner_along(center, &(&g0 * sign)));
    }
    let widths = region.widths();
    let dirs: Vec<DVector<f64>> = match projection {
        Some(p) => p.row_iter().map(|r| r.transpose()).collect(),
        None => (0..n).map(|j| DVector::from_fn(n, |k, _| if k == j { 1.0 } else { 0.0 })).collect(),
    };
    for d in &dirs {
        let step = d.map(|v| v.signum() * if v.abs() > 1e-12 { 1.0 } else { 0.0 });
        for sign in [1.0, -1.0] {
            starts.push(region.project(&(center + step.component_mul(&widths) * sign)));
        }
    }

    let mut best_x = starts[0].clone();
    let mut best_v = value(&best_x).abs();
    for start in &starts {
        for sign in [1.0, -1.0] {
            let x = ascend(start, sign, &value, &grad, region);
            let v = value(&x).abs();
            if v > best_v {
                best_v = v;
                best_x = x;
            }
        }
    }
    (best_x, best_v)
}

fn ascend(
    start: &DVector<f64>,
    sign: f64,
    value: &impl Fn(&DVector<f64>) -> f64,
    grad: &impl Fn(&DVector<f64>) -> DVector<f64>,
    region: &FeasibleBox,
) -> DVector<f64> {
    let width = inf_norm(&(&region.upper - &region.lower));
    let mut x = start.clone();
    let mut fx = sign * value(&x);
    for _ in 0..100 {
        let g = grad(&x) * sign;
        let gnorm = inf_norm(&g);
        if gnorm == 0.0 {
            break;
        }
        let mut t = width / gnorm;
        let mut moved = false;
        for _ in 0..60 {
            let trial = region.project(&(&x + &g * t));
            let ft = sign * value(&trial);
            if ft > fx + 1e-4 * g.dot(&(&trial - &x)) && ft > fx {
                let shift = inf_norm(&(&trial - &x));
                x = trial;
                fx = ft;
                moved = shift > 1e-12 * (1.0 + width);
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    x
}
