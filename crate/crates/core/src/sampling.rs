//! Seeded generation of directions and synthetic point clouds.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`. Each purpose draws from its own ChaCha stream, so e.g.
//! directions and angles sampled with the same seed are independent. The
//! stream layout is part of the output contract: changing it changes every
//! seed-fixed result.

use std::f64::consts::TAU;

use ndarray::Array2;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::complex::normalize_points;
use crate::error::{EctError, Result};
use crate::filtration::DirectionSet;

/// Independent sub-streams of one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Directions = 1,
    Angles = 2,
    Targets = 3,
    DoubleAnnulus = 4,
    NoisyCircle = 5,
    Misc = 6,
}

/// Deterministic generator: same seed and stream, same sequence everywhere.
#[derive(Debug, Clone)]
pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64, stream: Stream) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream as u64);
        Rng(inner)
    }

    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.0)
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.0.random_range(0..len)
    }
}

/// `k` i.i.d. uniform directions on `S^{d-1}` (normalized Gaussians).
pub fn sample_directions_uniform(k: usize, d: usize, seed: u64) -> Result<DirectionSet> {
    gaussian_directions(k, d, Rng::new(seed, Stream::Directions))
}

fn gaussian_directions(k: usize, d: usize, mut rng: Rng) -> Result<DirectionSet> {
    if k == 0 || d < 2 {
        return Err(EctError::InvalidParameter(format!(
            "need k >= 1 and d >= 2, got k = {k}, d = {d}"
        )));
    }
    let mut vectors = Array2::zeros((k, d));
    for mut row in vectors.rows_mut() {
        loop {
            row.mapv_inplace(|_| rng.normal());
            let norm = row.dot(&row).sqrt();
            if norm > 1e-12 {
                row.mapv_inplace(|x| x / norm);
                break;
            }
        }
    }
    DirectionSet::from_vectors(vectors)
}

/// Directions to build a target transform from, independent of the ones
/// [`sample_directions_uniform`] and [`sample_angles_normal`] draw for the
/// same seed. In the plane these are [`sample_angles_uniform`].
pub fn sample_target_directions(k: usize, d: usize, seed: u64) -> Result<DirectionSet> {
    if d == 2 {
        if k == 0 {
            return Err(EctError::InvalidParameter("need k >= 1".into()));
        }
        return DirectionSet::from_angles(&sample_angles_uniform(k, seed));
    }
    gaussian_directions(k, d, Rng::new(seed, Stream::Targets))
}

/// `k` i.i.d. standard normal angles.
pub fn sample_angles_normal(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = Rng::new(seed, Stream::Angles);
    (0..k).map(|_| rng.normal()).collect()
}

/// `k` i.i.d. angles uniform on `[0, 2π)`.
pub fn sample_angles_uniform(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = Rng::new(seed, Stream::Targets);
    (0..k).map(|_| rng.uniform_in(0.0, TAU)).collect()
}

/// Geometry of the double annulus before normalization.
pub mod double_annulus {
    /// Annulus centers `(±CENTER_OFFSET, 0)`.
    pub const CENTER_OFFSET: f64 = 1.0;
    pub const INNER_RADIUS: f64 = 0.5;
    pub const OUTER_RADIUS: f64 = 0.9;
}

/// Raw double-annulus sample: the first `⌈n/2⌉` points lie in the annulus
/// around `(-CENTER_OFFSET, 0)`, the rest around `(CENTER_OFFSET, 0)`. Points
/// are uniform in area within each annulus.
pub fn double_annulus_raw(n: usize, seed: u64) -> Result<Array2<f64>> {
    use double_annulus::*;
    if n == 0 {
        return Err(EctError::InvalidParameter("n must be at least 1".into()));
    }
    let mut rng = Rng::new(seed, Stream::DoubleAnnulus);
    let first = n.div_ceil(2);
    let mut points = Array2::zeros((n, 2));
    for i in 0..n {
        let cx = if i < first { -CENTER_OFFSET } else { CENTER_OFFSET };
        let theta = rng.uniform_in(0.0, TAU);
        let r = rng
            .uniform_in(INNER_RADIUS * INNER_RADIUS, OUTER_RADIUS * OUTER_RADIUS)
            .sqrt();
        points[[i, 0]] = cx + r * theta.cos();
        points[[i, 1]] = r * theta.sin();
    }
    Ok(points)
}

/// [`double_annulus_raw`] normalized to the unit ball.
pub fn generate_double_annulus(n: usize, seed: u64) -> Result<Array2<f64>> {
    Ok(normalize_points(double_annulus_raw(n, seed)?.view())?.value)
}

/// Radial noise of the default noisy circle, before normalization.
pub const DEFAULT_NOISE_SIGMA: f64 = 0.1;

/// Raw noisy circle: uniform angles, radius `1 + N(0, noise_sigma)`.
pub fn noisy_circle_raw(n: usize, seed: u64, noise_sigma: f64) -> Result<Array2<f64>> {
    if n == 0 {
        return Err(EctError::InvalidParameter("n must be at least 1".into()));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(EctError::InvalidParameter(format!(
            "noise_sigma must be finite and >= 0, got {noise_sigma}"
        )));
    }
    let mut rng = Rng::new(seed, Stream::NoisyCircle);
    let mut points = Array2::zeros((n, 2));
    for i in 0..n {
        let theta = rng.uniform_in(0.0, TAU);
        let r = 1.0 + noise_sigma * rng.normal();
        points[[i, 0]] = r * theta.cos();
        points[[i, 1]] = r * theta.sin();
    }
    Ok(points)
}

/// [`noisy_circle_raw`] normalized to the unit ball.
pub fn generate_noisy_circle(n: usize, seed: u64, noise_sigma: f64) -> Result<Array2<f64>> {
    Ok(normalize_points(noisy_circle_raw(n, seed, noise_sigma)?.view())?.value)
}
