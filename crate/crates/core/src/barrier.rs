//! Brownian motion hitting a Brownian barrier.
//!
//! `B` hits `c + sigma W` exactly when the rotated process
//! `X = (B - sigma W) / sqrt(1 + sigma^2)` hits the constant level
//! `c / sqrt(1 + sigma^2)`. Looking backwards from the hitting time, `W` then
//! behaves like `alpha BES(3) + sqrt(1 - alpha^2) BM` with
//! `alpha = -sigma / sqrt(1 + sigma^2)`, whose iterated-logarithm constant is
//! at most `sqrt(1 - alpha^2) < 1`. This module simulates all of these pieces
//! and the scale statistic that separates the two laws.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::{sample_bm, sample_mixture, Path, TimeGrid};
use crate::rng::{par_replicates, RngStream};
use crate::stats::{entropy_of_counts, mean, wls_fit};

/// Parameters of the barrier problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierConfig {
    /// Barrier offset `c > 0`.
    pub c: f64,
    /// Barrier roughness `sigma > 0`.
    pub sigma: f64,
    /// Largest simulated time.
    pub horizon: f64,
    /// Grid step.
    pub step: f64,
}

impl BarrierConfig {
    pub fn new(c: f64, sigma: f64, horizon: f64, step: f64) -> Result<Self> {
        let cfg = Self { c, sigma, horizon, step };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::param("sigma", format!("must be > 0, got {}", self.sigma)));
        }
        self.validate_allow_flat()
    }

    /// Like [`validate`](Self::validate) but accepts `sigma = 0`, the flat
    /// barrier used as a smooth reference by [`conditional_tau_profile`].
    pub fn validate_allow_flat(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::param("c", format!("must be > 0, got {}", self.c)));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::param("sigma", format!("must be >= 0, got {}", self.sigma)));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::param("horizon", format!("must be > 0, got {}", self.horizon)));
        }
        if !(self.step > 0.0 && self.step < self.horizon) {
            return Err(Error::param(
                "step",
                format!("must satisfy 0 < step < horizon ({}), got {}", self.horizon, self.step),
            ));
        }
        Ok(())
    }

    fn norm(&self) -> f64 {
        (1.0 + self.sigma * self.sigma).sqrt()
    }

    /// Level hit by the rotated process, `c / sqrt(1 + sigma^2)`.
    pub fn c_tilde(&self) -> f64 {
        self.c / self.norm()
    }

    /// Bessel weight of the time-reversed barrier, `-sigma / sqrt(1 + sigma^2)`.
    pub fn alpha(&self) -> f64 {
        -self.sigma / self.norm()
    }

    /// Midpoint between the iterated-logarithm constants of Brownian motion
    /// (1) and of the mixture (`sqrt(1 - alpha^2)`).
    pub fn threshold(&self) -> f64 {
        threshold_for_alpha(self.alpha())
    }
}

/// A detected crossing inside grid interval `[t_index, t_index+1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub index: usize,
    /// Linear-interpolation estimate of the crossing time.
    pub tau: f64,
}

/// First interval in which `gap(i)` goes from negative to non-negative.
/// Only intervals ending at or before `horizon` are inspected.
fn first_sign_change(times: &[f64], horizon: f64, gap: impl Fn(usize) -> f64) -> Option<Crossing> {
    let limit = horizon * (1.0 + 1e-12);
    let mut prev = gap(0);
    if prev >= 0.0 {
        return Some(Crossing { index: 0, tau: times[0] });
    }
    for i in 1..times.len() {
        if times[i] > limit {
            break;
        }
        let cur = gap(i);
        if cur >= 0.0 {
            let frac = -prev / (cur - prev);
            let (t0, t1) = (times[i - 1], times[i]);
            return Some(Crossing {
                index: i - 1,
                tau: t0 + frac * (t1 - t0),
            });
        }
        prev = cur;
    }
    None
}

/// First time `b` reaches the barrier `c + sigma w`, by sign change of
/// `b - sigma w - c` with linear interpolation inside the step. `None` when no
/// crossing happens before the horizon.
pub fn first_crossing(b: &Path, w: &Path, cfg: &BarrierConfig) -> Result<Option<Crossing>> {
    if !b.shares_grid(w) {
        return Err(Error::MismatchedGrids);
    }
    let (bv, wv) = (b.values(), w.values());
    Ok(first_sign_change(b.times(), cfg.horizon, |i| bv[i] - cfg.sigma * wv[i] - cfg.c))
}

/// First time `path` reaches the constant `level`.
pub fn first_level_crossing(path: &Path, level: f64, horizon: f64) -> Option<Crossing> {
    let v = path.values();
    first_sign_change(path.times(), horizon, |i| v[i] - level)
}

/// Orthogonal rotation `(B, W) -> (X, Y)` with
/// `X = (B - sigma W) / k`, `Y = (sigma B + W) / k`, `k = sqrt(1 + sigma^2)`.
pub fn rotate_pair(b: &Path, w: &Path, sigma: f64) -> Result<(Path, Path)> {
    if !b.shares_grid(w) {
        return Err(Error::MismatchedGrids);
    }
    let k = (1.0 + sigma * sigma).sqrt();
    let (p, q) = (1.0 / k, sigma / k);
    let x = b.values().iter().zip(w.values()).map(|(b, w)| p * b - q * w).collect();
    let y = b.values().iter().zip(w.values()).map(|(b, w)| q * b + p * w).collect();
    Ok((Path::new(Arc::clone(b.grid()), x)?, Path::new(Arc::clone(b.grid()), y)?))
}

/// Inverse of [`rotate_pair`]: recovers `(B, W)` from `(X, Y)`.
pub fn unrotate_pair(x: &Path, y: &Path, sigma: f64) -> Result<(Path, Path)> {
    // the inverse of a rotation by theta is the rotation by -theta
    rotate_pair(x, y, -sigma)
}

/// Exact draw from the first-passage law of standard Brownian motion to level
/// `c_tilde`: `tau = c_tilde^2 / Z^2` with `Z` standard normal.
pub fn sample_tau_exact<R: Rng + ?Sized>(c_tilde: f64, rng: &mut R) -> Result<f64> {
    if !(c_tilde > 0.0) || !c_tilde.is_finite() {
        return Err(Error::param("c_tilde", format!("must be > 0, got {c_tilde}")));
    }
    let z: f64 = rng.sample(StandardNormal);
    Ok(c_tilde * c_tilde / (z * z))
}

/// Closed-form first-passage CDF `P(tau <= t) = 2 Phi(-c / sqrt(t))`.
pub fn first_passage_cdf(c_tilde: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    2.0 * crate::stats::normal_cdf(-c_tilde / t.sqrt())
}

/// Upper bound (exclusive) for scales probed by [`lil_statistic`].
pub const LIL_MAX_SCALE: f64 = 1.0 / std::f64::consts::E;

/// Geometric scales `largest, largest/2, ...` down to `smallest`.
pub fn lil_scales(largest: f64, smallest: f64) -> Result<Vec<f64>> {
    if !(largest < LIL_MAX_SCALE) {
        return Err(Error::InvalidScales(format!("scale {largest} is not below 1/e")));
    }
    if !(smallest > 0.0 && smallest <= largest) {
        return Err(Error::InvalidScales(format!("need 0 < smallest <= largest, got {smallest}")));
    }
    let mut scales = vec![largest];
    let mut s = largest;
    while s / 2.0 >= smallest * (1.0 - 1e-12) {
        s /= 2.0;
        scales.push(s);
    }
    Ok(scales)
}

/// Iterated-logarithm envelope `sqrt(2 s log log(1/s))`.
pub fn lil_envelope(s: f64) -> f64 {
    (2.0 * s * (1.0 / s).ln().ln()).sqrt()
}

/// Scale-maximised normalised path value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilStatistic {
    pub value: f64,
    pub scales: Vec<f64>,
}

fn check_scales(path: &Path, scales: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::InvalidScales("no scales given".into()));
    }
    if let Some(s) = scales.iter().find(|&&s| !(s > 0.0 && s < LIL_MAX_SCALE)) {
        return Err(Error::InvalidScales(format!("scale {s} is outside (0, 1/e)")));
    }
    if scales.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidScales("scales must be strictly decreasing".into()));
    }
    if scales[0] > path.grid().horizon() {
        return Err(Error::InvalidScales(format!(
            "largest scale {} exceeds the path horizon {}",
            scales[0],
            path.grid().horizon()
        )));
    }
    let smallest = scales[scales.len() - 1];
    let res = path.grid().resolution_at(smallest);
    if smallest < 10.0 * res * (1.0 - 1e-9) {
        return Err(Error::InvalidScales(format!(
            "smallest scale {smallest} is below 10x the grid step {res}"
        )));
    }
    Ok(())
}

/// `max_s path(s) / sqrt(2 s log log(1/s))` over the given scales, with the
/// path linearly interpolated between grid points.
pub fn lil_statistic(path: &Path, scales: &[f64]) -> Result<LilStatistic> {
    check_scales(path, scales)?;
    let value = scales
        .iter()
        .map(|&s| path.value_at(s) / lil_envelope(s))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(LilStatistic {
        value,
        scales: scales.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathLabel {
    BmLike,
    MixtureLike,
}

/// Labels each path BM-like when its iterated-logarithm statistic exceeds
/// [`BarrierConfig::threshold`], mixture-like otherwise.
pub fn discriminate(paths: &[Path], cfg: &BarrierConfig, scales: &[f64]) -> Result<Vec<PathLabel>> {
    discriminate_with_threshold(paths, cfg.threshold(), scales)
}

/// [`discriminate`] with an explicit cut.
pub fn discriminate_with_threshold(paths: &[Path], threshold: f64, scales: &[f64]) -> Result<Vec<PathLabel>> {
    paths
        .iter()
        .map(|p| {
            let stat = lil_statistic(p, scales)?;
            Ok(if stat.value > threshold {
                PathLabel::BmLike
            } else {
                PathLabel::MixtureLike
            })
        })
        .collect()
}

/// Cut that maximises balanced accuracy on labelled calibration statistics.
/// Use a batch independent of the one being classified.
pub fn calibrate_threshold(bm_stats: &[f64], mixture_stats: &[f64]) -> f64 {
    let mut cuts: Vec<f64> = bm_stats.iter().chain(mixture_stats).copied().collect();
    cuts.sort_by(f64::total_cmp);
    let score = |t: f64| {
        let tp = bm_stats.iter().filter(|&&v| v > t).count() as f64 / bm_stats.len() as f64;
        let tn = mixture_stats.iter().filter(|&&v| v <= t).count() as f64 / mixture_stats.len() as f64;
        tp + tn
    };
    let mut best = (f64::NEG_INFINITY, 0.0);
    for &t in &cuts {
        let s = score(t);
        if s > best.0 {
            best = (s, t);
        }
    }
    best.1
}

/// Midpoint cut `(1 + sqrt(1 - alpha^2)) / 2` for a mixture weight `alpha`.
pub fn threshold_for_alpha(alpha: f64) -> f64 {
    (1.0 + (1.0 - alpha * alpha).sqrt()) / 2.0
}

/// Geometric grid on `[0, largest]` containing every scale of
/// `lil_scales(largest, smallest)` as a grid point, with 14 points per
/// octave so the spacing near the smallest scale is about a twentieth of it.
pub fn lil_grid(largest: f64, smallest: f64) -> Result<Arc<TimeGrid>> {
    let scales = lil_scales(largest, smallest)?;
    let octaves = scales.len() - 1 + 4;
    let mut times = vec![0.0];
    for k in 0..=(14 * octaves) {
        times.push(largest * f64::powf(2.0, (k as f64 - (14 * octaves) as f64) / 14.0));
    }
    Ok(Arc::new(TimeGrid::from_times(times)?))
}

/// Outcome of classifying balanced batches of Brownian and mixture paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LilSeparation {
    pub alpha: f64,
    pub smallest_scale: f64,
    pub paths_per_class: usize,
    /// Cut used by [`discriminate`].
    pub threshold: f64,
    pub accuracy: f64,
    pub bm_mean: f64,
    pub mixture_mean: f64,
    /// Cut fitted by [`calibrate_threshold`] on an independent batch.
    pub calibrated_threshold: f64,
    pub calibrated_accuracy: f64,
}

/// Samples `paths_per_class` Brownian and `alpha`-mixture paths, computes the
/// iterated-logarithm statistic over scales `largest -> smallest` and scores
/// the midpoint cut and an independently calibrated cut.
pub fn lil_separation(
    alpha: f64,
    largest: f64,
    smallest: f64,
    paths_per_class: usize,
    rng: &RngStream,
) -> Result<LilSeparation> {
    if paths_per_class == 0 {
        return Err(Error::param("paths_per_class", "must be at least 1"));
    }
    if !(alpha.abs() < 1.0) {
        return Err(Error::param("alpha", format!("must satisfy |alpha| < 1, got {alpha}")));
    }
    let scales = lil_scales(largest, smallest)?;
    let grid = lil_grid(largest, smallest)?;
    let batch = |tag: &str, mixture: bool| -> Result<Vec<f64>> {
        par_replicates(&rng.derive(tag), paths_per_class, |r| {
            let path = if mixture {
                sample_mixture(alpha, &grid, r)?
            } else {
                sample_bm(&grid, r)?
            };
            Ok(lil_statistic(&path, &scales)?.value)
        })
        .into_iter()
        .collect()
    };
    let bm = batch("lil-bm", false)?;
    let mix = batch("lil-mixture", true)?;
    let cal_bm = batch("lil-calibration-bm", false)?;
    let cal_mix = batch("lil-calibration-mixture", true)?;
    let accuracy_at = |t: f64| {
        let correct = bm.iter().filter(|&&v| v > t).count() + mix.iter().filter(|&&v| v <= t).count();
        correct as f64 / (2 * paths_per_class) as f64
    };
    let threshold = threshold_for_alpha(alpha);
    let calibrated_threshold = calibrate_threshold(&cal_bm, &cal_mix);
    Ok(LilSeparation {
        alpha,
        smallest_scale: smallest,
        paths_per_class,
        threshold,
        accuracy: accuracy_at(threshold),
        bm_mean: mean(&bm),
        mixture_mean: mean(&mix),
        calibrated_threshold,
        calibrated_accuracy: accuracy_at(calibrated_threshold),
    })
}

/// Empirical law of the hitting time given one frozen barrier path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauProfile {
    pub replicates: usize,
    pub hits: usize,
    /// Dyadic depths, ascending.
    pub depths: Vec<u32>,
    /// Base-2 entropy of the binned hitting times at each depth.
    pub entropies: Vec<f64>,
    /// Least-squares slope of entropy against depth over all depths.
    pub slope: Option<f64>,
    /// Bin counts at the finest depth over `[0, horizon]`.
    pub finest_counts: Vec<u64>,
    pub horizon: f64,
    /// Set when fewer than [`TauProfile::MIN_HITS`] replicates hit.
    pub insufficient: bool,
}

impl TauProfile {
    pub const MIN_HITS: usize = 100;
    pub const DEPTHS: std::ops::RangeInclusive<u32> = 4..=12;

    /// Slope of entropy against depth restricted to `lo..=hi`.
    pub fn slope_over(&self, lo: u32, hi: u32) -> Option<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .depths
            .iter()
            .zip(&self.entropies)
            .filter(|(d, _)| (lo..=hi).contains(*d))
            .map(|(&d, &h)| (d as f64, h))
            .unzip();
        wls_fit(&x, &y, &vec![1.0; x.len()]).ok().map(|f| f.slope)
    }

    /// Bin counts at `depth` (aggregated from the finest level).
    pub fn counts_at(&self, depth: u32) -> Vec<u64> {
        let finest = *Self::DEPTHS.end();
        let group = 1usize << (finest - depth);
        self.finest_counts.chunks(group).map(|c| c.iter().sum()).collect()
    }
}

/// Simulates `replicates` independent Brownian paths against the frozen
/// barrier `c + sigma w` and summarises where the hitting times fall.
///
/// `sigma = 0` is accepted here; the hitting time then has the smooth
/// first-passage density and the entropy slope should approach 1.
pub fn conditional_tau_profile(
    w: &Path,
    cfg: &BarrierConfig,
    replicates: usize,
    rng: &RngStream,
) -> Result<TauProfile> {
    cfg.validate_allow_flat()?;
    if replicates == 0 {
        return Err(Error::param("replicates", "must be at least 1"));
    }
    let horizon = cfg.horizon.min(w.grid().horizon());
    let times = w.times();
    let wv = w.values();
    let taus: Vec<Option<f64>> = par_replicates(rng, replicates, |r| {
        let mut b = 0.0;
        let mut gap_prev = -cfg.c - cfg.sigma * wv[0];
        if gap_prev >= 0.0 {
            return Some(0.0);
        }
        for i in 1..times.len() {
            if times[i] > horizon * (1.0 + 1e-12) {
                break;
            }
            let z: f64 = r.sample(StandardNormal);
            b += z * (times[i] - times[i - 1]).sqrt();
            let gap = b - cfg.sigma * wv[i] - cfg.c;
            if gap >= 0.0 {
                let frac = -gap_prev / (gap - gap_prev);
                return Some(times[i - 1] + frac * (times[i] - times[i - 1]));
            }
            gap_prev = gap;
        }
        None
    });
    let finest = *TauProfile::DEPTHS.end();
    let bins = 1usize << finest;
    let mut finest_counts = vec![0u64; bins];
    let mut hits = 0;
    for tau in taus.into_iter().flatten() {
        hits += 1;
        let k = ((tau / horizon) * bins as f64).floor() as usize;
        finest_counts[k.min(bins - 1)] += 1;
    }
    let mut profile = TauProfile {
        replicates,
        hits,
        depths: TauProfile::DEPTHS.collect(),
        entropies: Vec::new(),
        slope: None,
        finest_counts,
        horizon,
        insufficient: hits < TauProfile::MIN_HITS,
    };
    profile.entropies = profile
        .depths
        .iter()
        .map(|&d| entropy_of_counts(&profile.counts_at(d)))
        .collect();
    profile.slope = profile.slope_over(*TauProfile::DEPTHS.start(), finest);
    Ok(profile)
}
