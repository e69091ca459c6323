//! Differentiable ECT.
//!
//! Each indicator `1[f_w(σ) <= t]` in the alternating simplex count is
//! replaced by the sigmoid `S(λ(t - f_w(σ)))`, summed over every simplex of
//! the complex. The result is smooth in the thresholds, the directions and
//! the vertex coordinates, and tends to the exact curve as `λ → ∞` away from
//! ties.
//!
//! Terms with `|λ(t - f)| > SATURATION` are evaluated as exactly 0 or 1: at
//! that distance the sigmoid differs from its limit by less than `5e-18`, and
//! skipping them makes a column cost proportional to the width of the
//! transition band instead of the full grid.

use ndarray::{Array1, Array2};

use crate::complex::GeometricSimplicialComplex;
use crate::ect::{check_same_layout, EctMatrix, ThresholdGrid};
use crate::error::{EctError, Result};
use crate::filtration::{max_vertex, vertex_heights, DirectionSet};
use crate::parallel::Execution;

/// Default sharpness for complexes normalized to the unit ball.
pub const DEFAULT_LAMBDA: f64 = 100.0;

/// Beyond this magnitude of `λ(t - f)` a sigmoid term counts as saturated.
pub const SATURATION: f64 = 40.0;

/// `1 / (1 + e^{-x})`, evaluated without overflow for any finite `x`.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `S'(x) = S(x)(1 - S(x))`.
#[inline]
pub fn sigmoid_derivative(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 - s)
}

/// Smoothed ECT: an `l×k` real matrix plus the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothEctMatrix {
    pub values: Array2<f64>,
    pub lambda: f64,
    pub directions: DirectionSet,
    pub thresholds: ThresholdGrid,
    /// Simplex counts per dimension of the source complex.
    pub source_counts: Vec<usize>,
}

impl SmoothEctMatrix {
    /// Lifts an exact transform so it can serve as a smooth-loss target.
    pub fn from_exact(exact: &EctMatrix, lambda: f64, source_counts: Vec<usize>) -> Self {
        SmoothEctMatrix {
            values: exact.values.mapv(|v| v as f64),
            lambda,
            directions: exact.directions.clone(),
            thresholds: exact.thresholds.clone(),
            source_counts,
        }
    }

    /// Mean squared entrywise difference.
    pub fn distance(&self, other: &SmoothEctMatrix) -> Result<f64> {
        if self.values.dim() != other.values.dim() {
            return Err(EctError::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.values.dim(),
                other.values.dim()
            )));
        }
        check_same_layout(&self.directions, &self.thresholds, &other.directions, &other.thresholds)?;
        let total: f64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(total / self.values.len() as f64)
    }
}

/// Gradients of a scalar loss with respect to every input of [`soft_ect`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    /// `∂L/∂w_j`, projected onto the tangent space of the sphere at `w_j`.
    pub directions: Array2<f64>,
    /// `∂L/∂θ_j`, present when the directions carry angles.
    pub angles: Option<Vec<f64>>,
    pub coordinates: Array2<f64>,
    /// `∂L/∂t` for the threshold at row `i` of column `j`.
    pub thresholds: Array2<f64>,
    /// `∂L/∂λ`.
    pub lambda: f64,
}

#[derive(Clone, Copy)]
struct Term {
    value: f64,
    sign: f64,
    argmax: usize,
}

fn terms(complex: &GeometricSimplicialComplex, heights: &[f64]) -> Vec<Term> {
    let mut out = Vec::with_capacity(complex.num_simplices());
    for (dim, level) in complex.simplices_by_dim().iter().enumerate() {
        let sign = if dim % 2 == 0 { 1.0 } else { -1.0 };
        for s in level {
            let (value, argmax) = max_vertex(s.vertices(), heights);
            out.push(Term { value, sign, argmax });
        }
    }
    out
}

/// Index range of `grid` where the term is not saturated; everything at or
/// after `.1` counts as fully on.
#[inline]
fn band(grid: &[f64], lambda: f64, value: f64) -> (usize, usize) {
    let lo = grid.partition_point(|&t| lambda * (t - value) < -SATURATION);
    let hi = lo + grid[lo..].partition_point(|&t| lambda * (t - value) <= SATURATION);
    (lo, hi)
}

fn forward_column(terms: &[Term], grid: &[f64], lambda: f64) -> Vec<f64> {
    let l = grid.len();
    let mut smooth = vec![0.0; l];
    let mut steps = vec![0.0; l + 1];
    for term in terms {
        let (lo, hi) = band(grid, lambda, term.value);
        for j in lo..hi {
            smooth[j] += term.sign * sigmoid(lambda * (grid[j] - term.value));
        }
        steps[hi] += term.sign;
    }
    let mut saturated = 0.0;
    for j in 0..l {
        saturated += steps[j];
        smooth[j] += saturated;
    }
    smooth
}

struct ColumnGradient {
    /// `∂L/∂f` accumulated onto the vertex that attains each simplex's max.
    per_vertex: Vec<f64>,
    thresholds: Vec<f64>,
    lambda: f64,
}

fn backward_column(terms: &[Term], grid: &[f64], lambda: f64, upstream: &[f64], n: usize) -> ColumnGradient {
    let mut per_vertex = vec![0.0; n];
    let mut thresholds = vec![0.0; grid.len()];
    let mut d_lambda = 0.0;
    for term in terms {
        let (lo, hi) = band(grid, lambda, term.value);
        let mut d_value = 0.0;
        for j in lo..hi {
            let gap = grid[j] - term.value;
            let slope = upstream[j] * term.sign * sigmoid_derivative(lambda * gap);
            thresholds[j] += lambda * slope;
            d_value -= lambda * slope;
            d_lambda += slope * gap;
        }
        per_vertex[term.argmax] += d_value;
    }
    ColumnGradient {
        per_vertex,
        thresholds,
        lambda: d_lambda,
    }
}

fn check_inputs(
    complex: &GeometricSimplicialComplex,
    directions: &DirectionSet,
    grid: &ThresholdGrid,
    lambda: f64,
) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(EctError::InvalidParameter(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    directions.check_dim(complex.d())?;
    grid.check_directions(directions.k())
}

/// Smoothed ECC of one direction.
pub fn soft_ecc(
    complex: &GeometricSimplicialComplex,
    w: ndarray::ArrayView1<'_, f64>,
    grid: &[f64],
    lambda: f64,
) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(EctError::InvalidParameter(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    if grid.is_empty() || grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|p| p[0] >= p[1]) {
        return Err(EctError::InvalidGrid(
            "thresholds must be finite and strictly increasing".into(),
        ));
    }
    let directions = DirectionSet::from_vectors(w.to_owned().insert_axis(ndarray::Axis(0)))?;
    directions.check_dim(complex.d())?;
    let heights = vertex_heights(complex.coordinates(), directions.vector(0));
    Ok(forward_column(&terms(complex, &heights), grid, lambda))
}

pub fn soft_ect(
    complex: &GeometricSimplicialComplex,
    directions: &DirectionSet,
    grid: &ThresholdGrid,
    lambda: f64,
) -> Result<SmoothEctMatrix> {
    soft_ect_with(complex, directions, grid, lambda, Execution::default())
}

pub fn soft_ect_with(
    complex: &GeometricSimplicialComplex,
    directions: &DirectionSet,
    grid: &ThresholdGrid,
    lambda: f64,
    exec: Execution,
) -> Result<SmoothEctMatrix> {
    check_inputs(complex, directions, grid, lambda)?;
    let (l, k) = (grid.l(), directions.k());
    let coordinates = complex.coordinates();
    let columns = exec.map(k, |j| {
        let heights = vertex_heights(coordinates, directions.vector(j));
        forward_column(&terms(complex, &heights), grid.column(j), lambda)
    });
    let mut values = Array2::zeros((l, k));
    for (j, column) in columns.into_iter().enumerate() {
        values.column_mut(j).assign(&Array1::from(column));
    }
    Ok(SmoothEctMatrix {
        values,
        lambda,
        directions: directions.clone(),
        thresholds: grid.clone(),
        source_counts: complex.stats().counts,
    })
}

/// Gradients of `L = Σ upstream ⊙ soft_ect(...)`.
///
/// Where several vertices attain a simplex's maximum the gradient goes to
/// the lowest-indexed one. Coordinate gradients are reduced in direction
/// order, so the result does not depend on the execution mode.
pub fn soft_ect_backward(
    complex: &GeometricSimplicialComplex,
    directions: &DirectionSet,
    grid: &ThresholdGrid,
    lambda: f64,
    upstream: &Array2<f64>,
) -> Result<GradientBundle> {
    soft_ect_backward_with(complex, directions, grid, lambda, upstream, Execution::default())
}

pub fn soft_ect_backward_with(
    complex: &GeometricSimplicialComplex,
    directions: &DirectionSet,
    grid: &ThresholdGrid,
    lambda: f64,
    upstream: &Array2<f64>,
    exec: Execution,
) -> Result<GradientBundle> {
    check_inputs(complex, directions, grid, lambda)?;
    let (l, k) = (grid.l(), directions.k());
    if upstream.dim() != (l, k) {
        return Err(EctError::ShapeMismatch(format!(
            "upstream gradient has shape {:?}, expected {:?}",
            upstream.dim(),
            (l, k)
        )));
    }
    if upstream.iter().any(|g| !g.is_finite()) {
        return Err(EctError::InvalidParameter("upstream gradient is not finite".into()));
    }

    let coordinates = complex.coordinates();
    let (n, d) = (complex.n(), complex.d());
    let columns = exec.map(k, |j| {
        let heights = vertex_heights(coordinates, directions.vector(j));
        let column: Vec<f64> = upstream.column(j).to_vec();
        backward_column(&terms(complex, &heights), grid.column(j), lambda, &column, n)
    });

    let mut d_coordinates = Array2::zeros((n, d));
    let mut d_directions = Array2::zeros((k, d));
    let mut d_thresholds = Array2::zeros((l, k));
    let mut d_lambda = 0.0;
    for (j, column) in columns.into_iter().enumerate() {
        let w = directions.vector(j);
        // ∂f/∂w = x_{v*}, ∂f/∂x_{v*} = w
        let mut raw = vec![0.0; d];
        for (v, &g) in column.per_vertex.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            for c in 0..d {
                raw[c] += g * coordinates[[v, c]];
                d_coordinates[[v, c]] += g * w[c];
            }
        }
        let radial: f64 = raw.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
        for c in 0..d {
            d_directions[[j, c]] = raw[c] - radial * w[c];
        }
        d_thresholds.column_mut(j).assign(&Array1::from(column.thresholds));
        d_lambda += column.lambda;
    }

    let d_angles = directions.angles().map(|angles| {
        angles
            .iter()
            .enumerate()
            .map(|(j, theta)| -theta.sin() * d_directions[[j, 0]] + theta.cos() * d_directions[[j, 1]])
            .collect()
    });

    Ok(GradientBundle {
        directions: d_directions,
        angles: d_angles,
        coordinates: d_coordinates,
        thresholds: d_thresholds,
        lambda: d_lambda,
    })
}
