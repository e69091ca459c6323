//! Exact Euler characteristic curves and the discretized transform.
//!
//! An ECT is stored as an `l×k` matrix: rows are thresholds in ascending order,
//! columns are directions.

use ndarray::{Array2, ArrayView1};

use crate::complex::GeometricSimplicialComplex;
use crate::error::{EctError, Result};
use crate::filtration::{
    unit_direction, values_from_heights, vertex_heights, DirectionSet, SortedValues,
};
use crate::parallel::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// One grid shared by every direction; a row is a single threshold.
    Global,
    /// One grid per direction; a row index means different thresholds in
    /// different columns.
    PerDirection,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Global => "global",
            Strategy::PerDirection => "per-direction",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = EctError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(Strategy::Global),
            "per-direction" => Ok(Strategy::PerDirection),
            other => Err(EctError::InvalidParameter(format!("unknown strategy {other:?}"))),
        }
    }
}

/// `l` evenly spaced values from `lo` to `hi`, endpoints exact.
pub fn linspace(lo: f64, hi: f64, l: usize) -> Vec<f64> {
    match l {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..l)
            .map(|i| {
                if i + 1 == l {
                    hi
                } else {
                    lo + (hi - lo) * (i as f64) / ((l - 1) as f64)
                }
            })
            .collect(),
    }
}

fn check_increasing(values: &[f64], what: &str) -> Result<()> {
    if let Some(bad) = values.iter().find(|t| !t.is_finite()) {
        return Err(EctError::InvalidGrid(format!("{what} contains non-finite threshold {bad}")));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EctError::InvalidGrid(format!("{what} is not strictly increasing")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdGrid {
    Global(Vec<f64>),
    /// A degenerate column repeats the single value its direction attains.
    PerDirection {
        grids: Vec<Vec<f64>>,
        degenerate: Vec<bool>,
    },
}

impl ThresholdGrid {
    pub fn global(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.len() < 2 {
            return Err(EctError::InvalidGrid("a grid needs at least 2 thresholds".into()));
        }
        check_increasing(&thresholds, "grid")?;
        Ok(ThresholdGrid::Global(thresholds))
    }

    /// `l` evenly spaced thresholds over `[-1, 1]`, the natural range once the
    /// complex sits in the unit ball.
    pub fn unit(l: usize) -> Result<Self> {
        Self::global(linspace(-1.0, 1.0, l))
    }

    pub fn per_direction(grids: Vec<Vec<f64>>, degenerate: Vec<bool>) -> Result<Self> {
        if grids.is_empty() {
            return Err(EctError::InvalidGrid("no per-direction grids".into()));
        }
        if degenerate.len() != grids.len() {
            return Err(EctError::InvalidGrid("degenerate flags do not match grid count".into()));
        }
        let l = grids[0].len();
        if l < 2 {
            return Err(EctError::InvalidGrid("a grid needs at least 2 thresholds".into()));
        }
        for (j, (grid, &flat)) in grids.iter().zip(&degenerate).enumerate() {
            if grid.len() != l {
                return Err(EctError::InvalidGrid(format!(
                    "grid {j} has {} thresholds, expected {l}",
                    grid.len()
                )));
            }
            if flat {
                if !grid[0].is_finite() || grid.iter().any(|&t| t != grid[0]) {
                    return Err(EctError::InvalidGrid(format!(
                        "degenerate grid {j} must repeat one finite value"
                    )));
                }
            } else {
                check_increasing(grid, &format!("grid {j}"))?;
            }
        }
        Ok(ThresholdGrid::PerDirection { grids, degenerate })
    }

    pub fn strategy(&self) -> Strategy {
        match self {
            ThresholdGrid::Global(_) => Strategy::Global,
            ThresholdGrid::PerDirection { .. } => Strategy::PerDirection,
        }
    }

    /// Number of thresholds per direction.
    pub fn l(&self) -> usize {
        match self {
            ThresholdGrid::Global(t) => t.len(),
            ThresholdGrid::PerDirection { grids, .. } => grids[0].len(),
        }
    }

    /// Thresholds used for direction `j`.
    pub fn column(&self, j: usize) -> &[f64] {
        match self {
            ThresholdGrid::Global(t) => t,
            ThresholdGrid::PerDirection { grids, .. } => &grids[j],
        }
    }

    pub(crate) fn check_directions(&self, k: usize) -> Result<()> {
        if let ThresholdGrid::PerDirection { grids, .. } = self {
            if grids.len() != k {
                return Err(EctError::ShapeMismatch(format!(
                    "{} per-direction grids for {k} directions",
                    grids.len()
                )));
            }
        }
        Ok(())
    }
}

/// Discretized ECT with integer entries.
#[derive(Debug, Clone, PartialEq)]
pub struct EctMatrix {
    pub values: Array2<i64>,
    pub directions: DirectionSet,
    pub thresholds: ThresholdGrid,
}

impl EctMatrix {
    pub fn strategy(&self) -> Strategy {
        self.thresholds.strategy()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, i64> {
        self.values.column(j)
    }
}

fn ecc_from_sorted(sorted: &SortedValues, grid: &[f64]) -> Vec<i64> {
    grid.iter().map(|&t| sorted.euler_at(t)).collect()
}

fn sorted_for(complex: &GeometricSimplicialComplex, w: ArrayView1<'_, f64>) -> SortedValues {
    let heights = vertex_heights(complex.coordinates(), w);
    SortedValues::from_values(values_from_heights(complex, &heights))
}

/// `χ(K_{t,w})` at every threshold of `grid`.
pub fn ecc(complex: &GeometricSimplicialComplex, w: ArrayView1<'_, f64>, grid: &[f64]) -> Result<Vec<i64>> {
    if grid.is_empty() {
        return Err(EctError::InvalidGrid("empty threshold grid".into()));
    }
    check_increasing(grid, "grid")?;
    if w.len() != complex.d() {
        return Err(EctError::ShapeMismatch(format!(
            "direction has {} components but the complex lives in R^{}",
            w.len(),
            complex.d()
        )));
    }
    let w = unit_direction(w)?;
    Ok(ecc_from_sorted(&sorted_for(complex, w.view()), grid))
}

pub fn ect(complex: &GeometricSimplicialComplex, directions: &DirectionSet, grid: &ThresholdGrid) -> Result<EctMatrix> {
    ect_with(complex, directions, grid, Execution::default())
}

pub fn ect_with(
    complex: &GeometricSimplicialComplex,
    directions: &DirectionSet,
    grid: &ThresholdGrid,
    exec: Execution,
) -> Result<EctMatrix> {
    directions.check_dim(complex.d())?;
    grid.check_directions(directions.k())?;
    let (l, k) = (grid.l(), directions.k());
    let columns = exec.map(k, |j| {
        ecc_from_sorted(&sorted_for(complex, directions.vector(j)), grid.column(j))
    });
    let mut values = Array2::zeros((l, k));
    for (j, column) in columns.into_iter().enumerate() {
        for (i, v) in column.into_iter().enumerate() {
            values[[i, j]] = v;
        }
    }
    Ok(EctMatrix {
        values,
        directions: directions.clone(),
        thresholds: grid.clone(),
    })
}

fn vertex_range(complex: &GeometricSimplicialComplex, w: ArrayView1<'_, f64>) -> Result<(f64, f64)> {
    let heights = vertex_heights(complex.coordinates(), w);
    let vertices = complex.simplices(0);
    if vertices.is_empty() {
        return Err(EctError::InvalidParameter(
            "cannot derive thresholds from an empty complex".into(),
        ));
    }
    Ok(vertices
        .iter()
        .map(|s| heights[s.vertices()[0]])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), h| (lo.min(h), hi.max(h))))
}

/// For each direction, `l` evenly spaced thresholds from the lowest to the
/// highest vertex height. A direction along which every vertex has the same
/// height gets a flat grid and is flagged degenerate.
pub fn per_direction_grid(
    complex: &GeometricSimplicialComplex,
    directions: &DirectionSet,
    l: usize,
) -> Result<ThresholdGrid> {
    if l < 2 {
        return Err(EctError::InvalidGrid("a grid needs at least 2 thresholds".into()));
    }
    directions.check_dim(complex.d())?;
    let mut grids = Vec::with_capacity(directions.k());
    let mut degenerate = Vec::with_capacity(directions.k());
    for j in 0..directions.k() {
        let (lo, hi) = vertex_range(complex, directions.vector(j))?;
        if lo < hi {
            grids.push(linspace(lo, hi, l));
            degenerate.push(false);
        } else {
            grids.push(vec![lo; l]);
            degenerate.push(true);
        }
    }
    ThresholdGrid::per_direction(grids, degenerate)
}

/// A single global grid spanning the minimum and maximum vertex height over
/// all directions.
pub fn data_range_grid(
    complex: &GeometricSimplicialComplex,
    directions: &DirectionSet,
    l: usize,
) -> Result<ThresholdGrid> {
    directions.check_dim(complex.d())?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for j in 0..directions.k() {
        let (a, b) = vertex_range(complex, directions.vector(j))?;
        lo = lo.min(a);
        hi = hi.max(b);
    }
    if lo >= hi {
        return Err(EctError::InvalidGrid(
            "all vertex heights coincide; no data range to span".into(),
        ));
    }
    ThresholdGrid::global(linspace(lo, hi, l))
}

pub(crate) fn check_same_layout(
    a_dir: &DirectionSet,
    a_grid: &ThresholdGrid,
    b_dir: &DirectionSet,
    b_grid: &ThresholdGrid,
) -> Result<()> {
    if a_grid.strategy() != b_grid.strategy() {
        return Err(EctError::ShapeMismatch("threshold strategies differ".into()));
    }
    if a_dir.vectors() != b_dir.vectors() {
        return Err(EctError::ShapeMismatch("directions differ".into()));
    }
    if a_grid != b_grid {
        return Err(EctError::ShapeMismatch("thresholds differ".into()));
    }
    Ok(())
}

/// Mean squared entrywise difference of two transforms over the same
/// directions and thresholds.
pub fn ect_distance(a: &EctMatrix, b: &EctMatrix) -> Result<f64> {
    if a.values.dim() != b.values.dim() {
        return Err(EctError::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.values.dim(),
            b.values.dim()
        )));
    }
    check_same_layout(&a.directions, &a.thresholds, &b.directions, &b.thresholds)?;
    let total: f64 = a
        .values
        .iter()
        .zip(b.values.iter())
        .map(|(&x, &y)| {
            let diff = (x - y) as f64;
            diff * diff
        })
        .sum();
    Ok(total / a.values.len() as f64)
}
