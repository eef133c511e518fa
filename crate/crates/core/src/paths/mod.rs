//! One-dimensional sample paths: Brownian motion, Bessel(3), fractional
//! Brownian motion and the Bessel/Brownian mixture.
//!
//! All samplers are exact in law at the grid points. They draw from a caller
//! supplied generator, normally obtained from [`crate::rng::RngStream::rng`].

mod fbm;
mod grid;

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

pub use fbm::{fbm_covariance, sample_fbm, sample_fbm_cholesky, FbmGenerator, FbmMethod, CHOLESKY_MAX_POINTS};
pub use grid::TimeGrid;

use crate::error::{Error, Result};

/// A sampled path: one value per grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    grid: Arc<TimeGrid>,
    values: Vec<f64>,
}

impl Path {
    pub fn new(grid: Arc<TimeGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at the final grid time.
    pub fn last(&self) -> f64 {
        *self.values.last().expect("paths are never empty")
    }

    /// Linear interpolation of the path at time `t` (clamped to the grid).
    pub fn value_at(&self, t: f64) -> f64 {
        let times = self.times();
        if t <= times[0] {
            return self.values[0];
        }
        if t >= times[times.len() - 1] {
            return self.values[times.len() - 1];
        }
        let i = self.grid.interval_of(t);
        let (t0, t1) = (times[i], times[i + 1]);
        let frac = (t - t0) / (t1 - t0);
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// True when both paths live on the same grid.
    pub fn shares_grid(&self, other: &Path) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    /// Writes the path as CSV with header `t,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "value"])?;
        for (t, v) in self.times().iter().zip(&self.values) {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()
    }
}

fn require_points(grid: &TimeGrid) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidGrid("at least two grid points are required".into()));
    }
    Ok(())
}

/// Fills `out` with a Brownian path on `grid` (out[0] = 0).
fn fill_bm<R: Rng + ?Sized>(grid: &TimeGrid, rng: &mut R, out: &mut [f64]) {
    let times = grid.times();
    out[0] = 0.0;
    for i in 1..times.len() {
        let z: f64 = rng.sample(StandardNormal);
        out[i] = out[i - 1] + z * (times[i] - times[i - 1]).sqrt();
    }
}

/// Standard Brownian motion started at 0.
pub fn sample_bm<R: Rng + ?Sized>(grid: &Arc<TimeGrid>, rng: &mut R) -> Result<Path> {
    require_points(grid)?;
    let mut values = vec![0.0; grid.len()];
    fill_bm(grid, rng, &mut values);
    Ok(Path {
        grid: Arc::clone(grid),
        values,
    })
}

/// Bessel(3) process from 0, realised as the Euclidean norm of a
/// three-dimensional Brownian motion.
pub fn sample_bes3<R: Rng + ?Sized>(grid: &Arc<TimeGrid>, rng: &mut R) -> Result<Path> {
    require_points(grid)?;
    let times = grid.times();
    let mut values = vec![0.0; grid.len()];
    let mut pos = [0.0f64; 3];
    for i in 1..times.len() {
        let sd = (times[i] - times[i - 1]).sqrt();
        for c in &mut pos {
            let z: f64 = rng.sample(StandardNormal);
            *c += sd * z;
        }
        values[i] = (pos[0] * pos[0] + pos[1] * pos[1] + pos[2] * pos[2]).sqrt();
    }
    Ok(Path {
        grid: Arc::clone(grid),
        values,
    })
}

/// `alpha * R + sqrt(1 - alpha^2) * M` for a fresh Bessel(3) path `R` and an
/// independent Brownian path `M`.
pub fn sample_mixture<R: Rng + ?Sized>(alpha: f64, grid: &Arc<TimeGrid>, rng: &mut R) -> Result<Path> {
    if !(alpha.abs() < 1.0) {
        return Err(Error::param("alpha", format!("must satisfy |alpha| < 1, got {alpha}")));
    }
    let bes = sample_bes3(grid, rng)?;
    let bm = sample_bm(grid, rng)?;
    let beta = (1.0 - alpha * alpha).sqrt();
    let values = bes
        .values
        .iter()
        .zip(&bm.values)
        .map(|(r, m)| alpha * r + beta * m)
        .collect();
    Ok(Path {
        grid: Arc::clone(grid),
        values,
    })
}
