use nalgebra::DVector;

use crate::linalg::inf_norm;

/// An ordered interpolation set. Point 0 is the current iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<DVector<f64>>,
    values: Vec<f64>,
    capacity: usize,
}

impl SampleSet {
    /// A set holding only the center.
    pub fn new(center: DVector<f64>, value: f64, capacity: usize) -> Self {
        Self { points: vec![center], values: vec![value], capacity }
    }

    pub fn from_parts(points: Vec<DVector<f64>>, values: Vec<f64>, capacity: usize) -> Self {
        assert_eq!(points.len(), values.len(), "points and values must have equal length");
        assert!(!points.is_empty(), "a sample set needs a center");
        Self { points, values, capacity }
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.points[0]
    }

    pub fn center_value(&self) -> f64 {
        self.values[0]
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Target size `p` of the set.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Returns a copy with `point` appended.
    pub fn with_point(&self, point: DVector<f64>, value: f64) -> Self {
        let mut next = self.clone();
        next.points.push(point);
        next.values.push(value);
        next
    }

    /// Returns a copy where point `index` has been moved to the front.
    pub fn recentered(&self, index: usize) -> Self {
        let mut next = self.clone();
        next.points.swap(0, index);
        next.values.swap(0, index);
        next
    }

    /// Largest infinity-norm distance from `x` to any point of the set.
    pub fn max_distance_inf(&self, x: &DVector<f64>) -> f64 {
        self.points.iter().map(|p| inf_norm(&(p - x))).fold(0.0, f64::max)
    }

    /// Whether some point lies within `tol` (infinity norm) of `x`.
    pub fn contains_near(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.points.iter().any(|p| inf_norm(&(p - x)) <= tol)
    }

    /// Position of a point equal to `x`, if any.
    pub fn index_of(&self, x: &DVector<f64>) -> Option<usize> {
        self.points.iter().position(|p| p == x)
    }

    /// Whether two points coincide exactly.
    pub fn has_duplicates(&self) -> bool {
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                if self.points[i] == self.points[j] {
                    return true;
                }
            }
        }
        false
    }
}
