use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Path, TimeGrid};
use crate::error::{Error, Result};

/// Largest number of grid points accepted by the dense Cholesky generator.
pub const CHOLESKY_MAX_POINTS: usize = 1 << 13;

/// Relative tolerance below which negative circulant eigenvalues are clamped.
const EIGEN_CLAMP: f64 = 1e-10;

/// Covariance of fractional Brownian motion, `(s^2H + t^2H - |t-s|^2H) / 2`.
pub fn fbm_covariance(hurst: f64, s: f64, t: f64) -> f64 {
    let h2 = 2.0 * hurst;
    0.5 * (s.abs().powf(h2) + t.abs().powf(h2) - (t - s).abs().powf(h2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbmMethod {
    CirculantEmbedding,
    Cholesky,
}

enum Backend {
    Circulant {
        /// sqrt(lambda_k / m) for the 2n-point circulant
        scales: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Cholesky(DMatrix<f64>),
}

/// Reusable fBM sampler for one Hurst index and one uniform grid. Building it
/// does the expensive part (eigenvalues or Cholesky factor) once.
pub struct FbmGenerator {
    hurst: f64,
    grid: Arc<TimeGrid>,
    backend: Backend,
}

impl std::fmt::Debug for FbmGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbmGenerator")
            .field("hurst", &self.hurst)
            .field("steps", &self.grid.steps())
            .field("method", &self.method())
            .finish()
    }
}

fn check_inputs(hurst: f64, grid: &TimeGrid) -> Result<f64> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::param("hurst", format!("must lie in (0, 1), got {hurst}")));
    }
    if grid.len() < 2 {
        return Err(Error::InvalidGrid("at least two grid points are required".into()));
    }
    grid.uniform_step()
        .ok_or_else(|| Error::InvalidGrid("fractional Brownian motion needs a uniform grid".into()))
}

impl FbmGenerator {
    /// Circulant-embedding generator; falls back to Cholesky when the
    /// embedding is not numerically nonnegative definite.
    pub fn new(hurst: f64, grid: &Arc<TimeGrid>) -> Result<Self> {
        let dt = check_inputs(hurst, grid)?;
        let n = grid.steps();
        if !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "circulant embedding needs a power-of-two step count, got {n}"
            )));
        }
        let m = 2 * n;
        let gamma = |k: usize| {
            let k = k as f64;
            let h2 = 2.0 * hurst;
            0.5 * dt.powf(h2) * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
        };
        let mut row: Vec<Complex64> = (0..m)
            .map(|j| {
                let k = if j <= n { j } else { m - j };
                Complex64::new(gamma(k), 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let max = row.iter().map(|c| c.re).fold(f64::MIN, f64::max);
        let min = row.iter().map(|c| c.re).fold(f64::MAX, f64::min);
        if min < -EIGEN_CLAMP * max {
            return Self::cholesky(hurst, grid);
        }
        let scales = row
            .iter()
            .map(|c| (c.re.max(0.0) / m as f64).sqrt())
            .collect();
        Ok(Self {
            hurst,
            grid: Arc::clone(grid),
            backend: Backend::Circulant { scales, fft },
        })
    }

    /// Dense Cholesky generator; accepts any uniform grid up to
    /// [`CHOLESKY_MAX_POINTS`] points.
    pub fn cholesky(hurst: f64, grid: &Arc<TimeGrid>) -> Result<Self> {
        check_inputs(hurst, grid)?;
        if grid.len() > CHOLESKY_MAX_POINTS {
            return Err(Error::InvalidGrid(format!(
                "Cholesky generator is capped at {CHOLESKY_MAX_POINTS} points, grid has {}",
                grid.len()
            )));
        }
        let t = &grid.times()[1..];
        let n = t.len();
        let cov = DMatrix::from_fn(n, n, |i, j| fbm_covariance(hurst, t[i], t[j]));
        let chol = cov
            .cholesky()
            .ok_or_else(|| Error::InvalidGrid("fBM covariance is not positive definite on this grid".into()))?;
        Ok(Self {
            hurst,
            grid: Arc::clone(grid),
            backend: Backend::Cholesky(chol.l()),
        })
    }

    pub fn method(&self) -> FbmMethod {
        match self.backend {
            Backend::Circulant { .. } => FbmMethod::CirculantEmbedding,
            Backend::Cholesky(_) => FbmMethod::Cholesky,
        }
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    /// Writes one path (starting at 0) into `out`, which must have one slot
    /// per grid point.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let n = self.grid.steps();
        assert_eq!(out.len(), n + 1, "output buffer must match the grid");
        out[0] = 0.0;
        match &self.backend {
            Backend::Circulant { scales, fft } => {
                let mut buf: Vec<Complex64> = scales
                    .iter()
                    .map(|&s| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                for i in 0..n {
                    out[i + 1] = out[i] + buf[i].re;
                }
            }
            Backend::Cholesky(l) => {
                let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                let x = l * z;
                out[1..].copy_from_slice(x.as_slice());
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Path {
        let mut values = vec![0.0; self.grid.len()];
        self.sample_into(rng, &mut values);
        Path {
            grid: Arc::clone(&self.grid),
            values,
        }
    }
}

/// One fBM path via circulant embedding (Cholesky fallback on a negative
/// eigenvalue). Build an [`FbmGenerator`] instead when sampling many paths.
pub fn sample_fbm<R: Rng + ?Sized>(hurst: f64, grid: &Arc<TimeGrid>, rng: &mut R) -> Result<Path> {
    Ok(FbmGenerator::new(hurst, grid)?.sample(rng))
}

/// One fBM path via dense Cholesky factorisation of the covariance matrix.
pub fn sample_fbm_cholesky<R: Rng + ?Sized>(hurst: f64, grid: &Arc<TimeGrid>, rng: &mut R) -> Result<Path> {
    Ok(FbmGenerator::cholesky(hurst, grid)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::stats::{correlation, covariance, covariance_se};

    fn grid(steps: usize) -> Arc<TimeGrid> {
        Arc::new(TimeGrid::uniform(1.0, steps).unwrap())
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut r = RngStream::new(1, 0).rng();
        assert!(sample_fbm(0.0, &grid(8), &mut r).is_err());
        assert!(sample_fbm(1.0, &grid(8), &mut r).is_err());
        assert!(sample_fbm(0.5, &grid(10), &mut r).is_err());
        assert!(sample_fbm_cholesky(0.5, &grid(10), &mut r).is_ok());
        let geo = Arc::new(TimeGrid::geometric(0.01, 1.0, 2.0).unwrap());
        assert!(sample_fbm(0.5, &geo, &mut r).is_err());
        assert!(sample_fbm_cholesky(0.5, &grid(CHOLESKY_MAX_POINTS), &mut r).is_err());
    }

    #[test]
    fn circulant_is_used_for_fbm() {
        for h in [0.1, 0.25, 0.5, 0.75, 0.95] {
            let g = FbmGenerator::new(h, &grid(64)).unwrap();
            assert_eq!(g.method(), FbmMethod::CirculantEmbedding, "H = {h}");
        }
    }

    #[test]
    fn half_hurst_increments_uncorrelated() {
        let g = FbmGenerator::new(0.5, &grid(64)).unwrap();
        let mut r = RngStream::new(2, 0).rng();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for _ in 0..10_000 {
            let p = g.sample(&mut r);
            let v = p.values();
            a.push(v[11] - v[10]);
            b.push(v[12] - v[11]);
        }
        assert!(correlation(&a, &b).abs() < 4.0 / 100.0);
    }

    #[test]
    fn covariance_at_half_and_one() {
        let h = 0.75;
        let g = FbmGenerator::new(h, &grid(256)).unwrap();
        let mut r = RngStream::new(3, 0).rng();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for _ in 0..100_000 {
            let p = g.sample(&mut r);
            a.push(p.values()[128]);
            b.push(p.last());
        }
        let expected = fbm_covariance(h, 0.5, 1.0);
        assert!((expected - 0.5).abs() < 1e-15);
        let c = covariance(&a, &b);
        assert!((c - expected).abs() < 3.0 * covariance_se(&a, &b), "cov {c}");
    }

    #[test]
    fn cholesky_reproduces_covariance() {
        let h = 0.3;
        let g = FbmGenerator::cholesky(h, &grid(16)).unwrap();
        let mut r = RngStream::new(4, 0).rng();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for _ in 0..40_000 {
            let p = g.sample(&mut r);
            a.push(p.values()[5]);
            b.push(p.values()[13]);
        }
        let expected = fbm_covariance(h, 5.0 / 16.0, 13.0 / 16.0);
        assert!((covariance(&a, &b) - expected).abs() < 4.0 * covariance_se(&a, &b));
    }
}
