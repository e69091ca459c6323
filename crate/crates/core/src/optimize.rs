//! Gradient descent on the smoothed ECT: fitting directions or vertex
//! coordinates so that a complex's transform matches a target.

use std::time::{Duration, Instant};

use ndarray::{Array2, ArrayView2};

use crate::complex::GeometricSimplicialComplex;
use crate::ect::{Strategy, ThresholdGrid};
use crate::error::{EctError, Result};
use crate::filtration::DirectionSet;
use crate::sampling::{sample_angles_normal, sample_directions_uniform};
use crate::soft::{soft_ect, soft_ect_backward, SmoothEctMatrix, DEFAULT_LAMBDA};

/// Loss growth over the initial loss that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeConfig {
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub lambda: f64,
    pub k: usize,
    pub l: usize,
    pub log_every: usize,
}

impl OptimizeConfig {
    /// Defaults for fitting 32 angles on a 64-threshold grid.
    pub fn for_directions() -> Self {
        OptimizeConfig {
            steps: 1000,
            learning_rate: DEFAULT_DIRECTION_LR,
            seed: 0,
            lambda: DEFAULT_DIRECTION_LAMBDA,
            k: 32,
            l: 64,
            log_every: 10,
        }
    }

    /// Defaults for fitting a 2D point cloud with 256 directions and thresholds.
    pub fn for_coordinates() -> Self {
        OptimizeConfig {
            steps: 1000,
            learning_rate: DEFAULT_COORDINATE_LR,
            seed: 0,
            lambda: DEFAULT_LAMBDA,
            k: 256,
            l: 256,
            log_every: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(EctError::InvalidParameter("steps must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(EctError::InvalidParameter(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(EctError::InvalidParameter(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.k == 0 || self.l < 2 {
            return Err(EctError::InvalidParameter("need k >= 1 and l >= 2".into()));
        }
        if self.log_every == 0 {
            return Err(EctError::InvalidParameter("log_every must be >= 1".into()));
        }
        Ok(())
    }
}

pub const DEFAULT_DIRECTION_LR: f64 = 0.02;
pub const DEFAULT_COORDINATE_LR: f64 = 0.01;

/// A sharp sigmoid leaves the loss over angles full of flat steps and
/// near-symmetric local minima; fitting directions works better with a soft
/// one.
pub const DEFAULT_DIRECTION_LAMBDA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LearnedParams {
    Angles(Vec<f64>),
    Directions(Array2<f64>),
    Coordinates(Array2<f64>),
}

#[derive(Debug, Clone)]
pub struct OptimizeTrace {
    /// Loss before the update of every `log_every`-th step.
    pub records: Vec<TraceRecord>,
    pub initial_loss: f64,
    /// Loss after the last update.
    pub final_loss: f64,
    pub params: LearnedParams,
    pub elapsed: Duration,
}

impl OptimizeTrace {
    /// Final directions, when directions were learned.
    pub fn directions(&self) -> Option<DirectionSet> {
        match &self.params {
            LearnedParams::Angles(a) => DirectionSet::from_angles(a).ok(),
            LearnedParams::Directions(v) => DirectionSet::from_vectors(v.clone()).ok(),
            LearnedParams::Coordinates(_) => None,
        }
    }

    pub fn coordinates(&self) -> Option<&Array2<f64>> {
        match &self.params {
            LearnedParams::Coordinates(c) => Some(c),
            _ => None,
        }
    }
}

/// `mean((pred - target)^2)` and its gradient `2 (pred - target) / N`.
pub fn mse_loss(pred: &Array2<f64>, target: &Array2<f64>) -> Result<(f64, Array2<f64>)> {
    if pred.dim() != target.dim() {
        return Err(EctError::ShapeMismatch(format!(
            "prediction {:?} vs target {:?}",
            pred.dim(),
            target.dim()
        )));
    }
    let count = pred.len() as f64;
    let diff = pred - target;
    let loss = diff.iter().map(|x| x * x).sum::<f64>() / count;
    let grad = diff.mapv(|x| 2.0 * x / count);
    Ok((loss, grad))
}

/// Tracks losses and flags divergence.
struct Monitor {
    records: Vec<TraceRecord>,
    initial: Option<f64>,
    log_every: usize,
}

impl Monitor {
    fn new(log_every: usize) -> Self {
        Monitor {
            records: Vec::new(),
            initial: None,
            log_every,
        }
    }

    fn observe(&mut self, step: usize, loss: f64) -> Result<()> {
        let initial = *self.initial.get_or_insert(loss);
        if !loss.is_finite() || loss > DIVERGENCE_FACTOR * initial.max(1e-12) {
            return Err(EctError::Divergence { step, loss, initial });
        }
        if step.is_multiple_of(self.log_every) {
            self.records.push(TraceRecord { step, loss });
        }
        Ok(())
    }
}

fn check_target(target: &SmoothEctMatrix, config: &OptimizeConfig) -> Result<()> {
    config.validate()?;
    let (l, k) = target.values.dim();
    if (l, k) != (config.l, config.k) {
        return Err(EctError::ShapeMismatch(format!(
            "target is {l}x{k} but the configuration asks for {}x{}",
            config.l, config.k
        )));
    }
    if target.values.iter().any(|v| !v.is_finite()) {
        return Err(EctError::InvalidParameter("target contains non-finite values".into()));
    }
    Ok(())
}

/// Fits `config.k` directions so the complex's smoothed ECT matches `target`.
///
/// In the plane, directions are angles initialized from `N(0, 1)`; in higher
/// dimensions they start uniform on the sphere and are renormalized after
/// each projected step.
pub fn learn_directions(
    target: &SmoothEctMatrix,
    complex: &GeometricSimplicialComplex,
    config: &OptimizeConfig,
) -> Result<OptimizeTrace> {
    let initial = if complex.d() == 2 {
        DirectionSet::from_angles(&sample_angles_normal(config.k, config.seed))?
    } else {
        sample_directions_uniform(config.k, complex.d(), config.seed)?
    };
    learn_directions_from(target, complex, initial, config)
}

/// [`learn_directions`] from explicit starting directions.
pub fn learn_directions_from(
    target: &SmoothEctMatrix,
    complex: &GeometricSimplicialComplex,
    initial: DirectionSet,
    config: &OptimizeConfig,
) -> Result<OptimizeTrace> {
    check_target(target, config)?;
    if target.thresholds.strategy() != Strategy::Global {
        return Err(EctError::InvalidGrid(
            "learning directions needs a global threshold grid".into(),
        ));
    }
    if initial.k() != config.k {
        return Err(EctError::ShapeMismatch(format!(
            "{} initial directions for k = {}",
            initial.k(),
            config.k
        )));
    }
    initial.check_dim(complex.d())?;
    if complex.d() == 2 && initial.angles().is_none() {
        return Err(EctError::InvalidParameter(
            "planar directions must be given as angles".into(),
        ));
    }

    let start = Instant::now();
    let grid = &target.thresholds;
    let mut directions = initial;
    let mut monitor = Monitor::new(config.log_every);
    for step in 0..config.steps {
        let pred = soft_ect(complex, &directions, grid, config.lambda)?;
        let (loss, upstream) = mse_loss(&pred.values, &target.values)?;
        monitor.observe(step, loss)?;
        let grads = soft_ect_backward(complex, &directions, grid, config.lambda, &upstream)?;
        directions = step_directions(&directions, &grads.directions, grads.angles.as_deref(), config.learning_rate)?;
    }
    let pred = soft_ect(complex, &directions, grid, config.lambda)?;
    let (final_loss, _) = mse_loss(&pred.values, &target.values)?;
    monitor.observe(config.steps, final_loss)?;

    let params = match directions.angles() {
        Some(a) => LearnedParams::Angles(a.to_vec()),
        None => LearnedParams::Directions(directions.vectors().to_owned()),
    };
    Ok(OptimizeTrace {
        initial_loss: monitor.initial.unwrap_or(final_loss),
        final_loss,
        records: monitor.records,
        params,
        elapsed: start.elapsed(),
    })
}

fn step_directions(
    current: &DirectionSet,
    tangent_grad: &Array2<f64>,
    angle_grad: Option<&[f64]>,
    lr: f64,
) -> Result<DirectionSet> {
    match (current.angles(), angle_grad) {
        (Some(angles), Some(grad)) => {
            let next: Vec<f64> = angles.iter().zip(grad).map(|(a, g)| a - lr * g).collect();
            DirectionSet::from_angles(&next)
        }
        _ => {
            let mut next = current.vectors().to_owned() - tangent_grad * lr;
            for mut row in next.rows_mut() {
                let norm = row.dot(&row).sqrt();
                row.mapv_inplace(|x| x / norm);
            }
            DirectionSet::from_vectors(next)
        }
    }
}

/// Moves the points of a point cloud so its smoothed ECT over the fixed
/// `directions` matches `target`. Directions and thresholds never change.
pub fn learn_coordinates(
    target: &SmoothEctMatrix,
    initial_points: ArrayView2<'_, f64>,
    directions: &DirectionSet,
    config: &OptimizeConfig,
) -> Result<OptimizeTrace> {
    check_target(target, config)?;
    let n = initial_points.nrows();
    if target.source_counts != [n] {
        return Err(EctError::ShapeMismatch(format!(
            "target was built from a complex with simplex counts {:?}, not a cloud of {n} points",
            target.source_counts
        )));
    }
    if directions.vectors() != target.directions.vectors() {
        return Err(EctError::ShapeMismatch(
            "directions differ from the target's directions".into(),
        ));
    }
    let grid: &ThresholdGrid = &target.thresholds;

    let start = Instant::now();
    let mut complex = GeometricSimplicialComplex::from_point_cloud(initial_points.to_owned())?;
    let mut monitor = Monitor::new(config.log_every);
    for step in 0..config.steps {
        let pred = soft_ect(&complex, directions, grid, config.lambda)?;
        let (loss, upstream) = mse_loss(&pred.values, &target.values)?;
        monitor.observe(step, loss)?;
        let grads = soft_ect_backward(&complex, directions, grid, config.lambda, &upstream)?;
        let next = complex.coordinates().to_owned() - grads.coordinates * config.learning_rate;
        complex = complex.with_coordinates(next)?;
    }
    let pred = soft_ect(&complex, directions, grid, config.lambda)?;
    let (final_loss, _) = mse_loss(&pred.values, &target.values)?;
    monitor.observe(config.steps, final_loss)?;

    Ok(OptimizeTrace {
        initial_loss: monitor.initial.unwrap_or(final_loss),
        final_loss,
        records: monitor.records,
        params: LearnedParams::Coordinates(complex.coordinates().to_owned()),
        elapsed: start.elapsed(),
    })
}

fn nearest(point: ndarray::ArrayView1<'_, f64>, cloud: ArrayView2<'_, f64>) -> f64 {
    cloud
        .rows()
        .into_iter()
        .map(|q| {
            point
                .iter()
                .zip(q.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

/// Symmetric Chamfer distance: the average of the two mean nearest-neighbor
/// distances.
pub fn chamfer_distance(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    let one_way = |from: ArrayView2<'_, f64>, to: ArrayView2<'_, f64>| {
        from.rows().into_iter().map(|p| nearest(p, to)).sum::<f64>() / from.nrows() as f64
    };
    0.5 * (one_way(a, b) + one_way(b, a))
}

/// Largest pairwise distance.
pub fn diameter(points: ArrayView2<'_, f64>) -> f64 {
    let mut best = 0.0_f64;
    for (i, p) in points.rows().into_iter().enumerate() {
        for q in points.rows().into_iter().skip(i + 1) {
            let dist = p
                .iter()
                .zip(q.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
            best = best.max(dist);
        }
    }
    best.sqrt()
}
