//! Directional sublevel filtrations `f_w(σ) = max_{v∈σ} ⟨x_v, w⟩`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::complex::GeometricSimplicialComplex;
use crate::error::{EctError, Result};

/// Allowed deviation of a direction's norm from 1 before it is rejected.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Checks that `w` is a unit vector within [`UNIT_TOLERANCE`] and returns it
/// renormalized.
pub fn unit_direction(w: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(EctError::NonUnitDirection { norm });
    }
    Ok(w.mapv(|x| x / norm))
}

/// `k` unit directions in `R^d`, stored as the rows of a `k×d` matrix.
///
/// Directions built from angles (`d = 2`) keep the angles so gradients can be
/// taken in angle space.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    vectors: Array2<f64>,
    angles: Option<Vec<f64>>,
}

impl DirectionSet {
    pub fn from_vectors(vectors: Array2<f64>) -> Result<Self> {
        if vectors.nrows() == 0 || vectors.ncols() == 0 {
            return Err(EctError::InvalidParameter(
                "a direction set needs at least one direction of dimension >= 1".into(),
            ));
        }
        let mut vectors = vectors;
        for mut row in vectors.rows_mut() {
            let unit = unit_direction(row.view())?;
            row.assign(&unit);
        }
        Ok(DirectionSet {
            vectors,
            angles: None,
        })
    }

    /// `w_j = (cos θ_j, sin θ_j)`.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() {
            return Err(EctError::InvalidParameter(
                "a direction set needs at least one angle".into(),
            ));
        }
        if let Some(bad) = angles.iter().find(|a| !a.is_finite()) {
            return Err(EctError::InvalidParameter(format!("non-finite angle {bad}")));
        }
        let mut vectors = Array2::zeros((angles.len(), 2));
        for (j, &theta) in angles.iter().enumerate() {
            vectors[[j, 0]] = theta.cos();
            vectors[[j, 1]] = theta.sin();
        }
        Ok(DirectionSet {
            vectors,
            angles: Some(angles.to_vec()),
        })
    }

    /// Keeps the given rows bit-for-bit after checking they are unit within
    /// tolerance.
    pub(crate) fn from_stored(vectors: Array2<f64>, angles: Option<Vec<f64>>) -> Result<Self> {
        if vectors.nrows() == 0 || vectors.ncols() == 0 {
            return Err(EctError::InvalidParameter("empty direction set".into()));
        }
        for row in vectors.rows() {
            unit_direction(row)?;
        }
        Ok(DirectionSet { vectors, angles })
    }

    pub fn k(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vectors(&self) -> ArrayView2<'_, f64> {
        self.vectors.view()
    }

    pub fn vector(&self, j: usize) -> ArrayView1<'_, f64> {
        self.vectors.row(j)
    }

    pub fn angles(&self) -> Option<&[f64]> {
        self.angles.as_deref()
    }

    /// Applies `rotation` to every direction. Angle parameters are dropped.
    pub fn rotated(&self, rotation: ArrayView2<'_, f64>) -> Result<Self> {
        Self::from_vectors(self.vectors.dot(&rotation.t()))
    }

    /// Selects directions by index, in the given order.
    pub fn select(&self, order: &[usize]) -> Result<Self> {
        match &self.angles {
            Some(angles) => Self::from_angles(&order.iter().map(|&j| angles[j]).collect::<Vec<_>>()),
            None => Self::from_vectors(self.vectors.select(ndarray::Axis(0), order)),
        }
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(EctError::ShapeMismatch(format!(
                "directions live in R^{} but the complex lives in R^{d}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// `⟨x_v, w⟩` for every vertex, summed in coordinate order.
pub(crate) fn vertex_heights(coordinates: ArrayView2<'_, f64>, w: ArrayView1<'_, f64>) -> Vec<f64> {
    coordinates
        .rows()
        .into_iter()
        .map(|x| x.iter().zip(w.iter()).map(|(a, b)| a * b).sum())
        .collect()
}

/// Max height over the simplex's vertices, with the lowest-index vertex
/// attaining it.
#[inline]
pub(crate) fn max_vertex(vertices: &[usize], heights: &[f64]) -> (f64, usize) {
    let mut best = vertices[0];
    let mut value = heights[best];
    for &v in &vertices[1..] {
        if heights[v] > value {
            value = heights[v];
            best = v;
        }
    }
    (value, best)
}

/// Filtration value of every simplex, aligned with
/// [`GeometricSimplicialComplex::simplices_by_dim`].
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationValues {
    pub by_dim: Vec<Vec<f64>>,
}

fn checked_direction(complex: &GeometricSimplicialComplex, w: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if w.len() != complex.d() {
        return Err(EctError::ShapeMismatch(format!(
            "direction has {} components but the complex lives in R^{}",
            w.len(),
            complex.d()
        )));
    }
    unit_direction(w)
}

pub fn filtration_values(
    complex: &GeometricSimplicialComplex,
    w: ArrayView1<'_, f64>,
) -> Result<FiltrationValues> {
    let w = checked_direction(complex, w)?;
    let heights = vertex_heights(complex.coordinates(), w.view());
    Ok(values_from_heights(complex, &heights))
}

pub(crate) fn values_from_heights(complex: &GeometricSimplicialComplex, heights: &[f64]) -> FiltrationValues {
    FiltrationValues {
        by_dim: complex
            .simplices_by_dim()
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|s| max_vertex(s.vertices(), heights).0)
                    .collect()
            })
            .collect(),
    }
}

/// `K_{t,w}`: every simplex with `f_w(σ) <= t`. Ties are included.
pub fn sublevel_complex(
    complex: &GeometricSimplicialComplex,
    w: ArrayView1<'_, f64>,
    t: f64,
) -> Result<GeometricSimplicialComplex> {
    let values = filtration_values(complex, w)?;
    Ok(complex.filter_simplices(|dim, idx| values.by_dim[dim][idx] <= t))
}

/// Per-dimension ascending filtration values; counting the entries `<= t`
/// gives `|K_{t,w}^(i)|` by binary search.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedValues {
    pub by_dim: Vec<Vec<f64>>,
}

impl SortedValues {
    pub fn counts_at(&self, t: f64) -> Vec<usize> {
        self.by_dim
            .iter()
            .map(|values| values.partition_point(|&f| f <= t))
            .collect()
    }

    /// `χ(K_{t,w})`.
    pub fn euler_at(&self, t: f64) -> i64 {
        crate::complex::alternating_sum(
            self.by_dim
                .iter()
                .map(|values| values.partition_point(|&f| f <= t)),
        )
    }

    pub(crate) fn from_values(values: FiltrationValues) -> Self {
        let mut by_dim = values.by_dim;
        for level in &mut by_dim {
            level.sort_unstable_by(f64::total_cmp);
        }
        SortedValues { by_dim }
    }

    pub fn min(&self) -> Option<f64> {
        self.by_dim.first().and_then(|v| v.first().copied())
    }

    pub fn max(&self) -> Option<f64> {
        // Vertex values bound every higher simplex from above.
        self.by_dim.first().and_then(|v| v.last().copied())
    }
}

pub fn sorted_dimension_values(
    complex: &GeometricSimplicialComplex,
    w: ArrayView1<'_, f64>,
) -> Result<SortedValues> {
    Ok(SortedValues::from_values(filtration_values(complex, w)?))
}
