//! Where a planar (fractional) Brownian path started at `(1, 0)` first hits
//! the negative x-axis, and how the chance of landing in the tip `[-eps, 0]`
//! scales with `eps`.
//!
//! The planar process has two independent fBM coordinates with a common
//! Hurst index. Probabilities are conditional on a hit before the horizon.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{negative_axis_crossing, Point};
use crate::paths::{FbmGenerator, TimeGrid};
use crate::rng::{par_replicates, RngStream};
use crate::stats::{binomial_se, wls_fit, FitResult};

/// Estimates are withheld below this many hits.
pub const MIN_HITS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TipExperiment {
    pub hurst: f64,
    /// Strictly decreasing tip sizes.
    pub epsilons: Vec<f64>,
    pub horizon: f64,
    /// Power-of-two step count.
    pub steps: usize,
    pub replicates: usize,
}

impl TipExperiment {
    /// `count` tip sizes `largest, largest/2, ...`.
    pub fn geometric_epsilons(largest: f64, count: usize) -> Vec<f64> {
        (0..count).map(|i| largest / f64::powi(2.0, i as i32)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(Error::param("hurst", format!("must lie in (0, 1), got {}", self.hurst)));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::param("epsilons", "need at least one positive value"));
        }
        if self.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::param("epsilons", "must be strictly decreasing"));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::param("horizon", format!("must be > 0, got {}", self.horizon)));
        }
        if !self.steps.is_power_of_two() || self.steps < 2 {
            return Err(Error::param("steps", format!("must be a power of two >= 2, got {}", self.steps)));
        }
        if self.replicates < 1000 {
            return Err(Error::param("replicates", format!("must be at least 1000, got {}", self.replicates)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TipPoint {
    pub epsilon: f64,
    pub hits_in_tip: u64,
    /// Conditional probability of a tip hit given a hit before the horizon.
    pub p_hat: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TipEstimate {
    pub hurst: f64,
    pub horizon: f64,
    pub steps: usize,
    pub replicates: usize,
    pub total_hits: u64,
    /// Fraction of paths that hit the axis before the horizon.
    pub hit_fraction: f64,
    pub points: Vec<TipPoint>,
    /// Fitted exponent of `p(eps) ~ eps^a`; `None` when data are insufficient
    /// or fewer than three tip sizes have positive counts.
    pub fit: Option<FitResult>,
    pub insufficient: bool,
}

impl TipEstimate {
    pub fn exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn point(&self, epsilon: f64) -> Option<&TipPoint> {
        self.points.iter().find(|p| (p.epsilon - epsilon).abs() <= 1e-12 * epsilon)
    }
}

/// First point of the polyline (started at `(1, 0)` and shifted by `path`)
/// where it meets the ray `{y = 0, x <= 0}`.
pub fn first_axis_hit(xs: &[f64], ys: &[f64]) -> Option<f64> {
    xs.windows(2)
        .zip(ys.windows(2))
        .find_map(|(x, y)| negative_axis_crossing(Point::new(x[0], y[0]), Point::new(x[1], y[1])))
}

fn brownian_hit<R: Rng + ?Sized>(steps: usize, dt: f64, rng: &mut R) -> Option<f64> {
    let sd = dt.sqrt();
    let mut p = Point::new(1.0, 0.0);
    for _ in 0..steps {
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        let q = Point::new(p.x + sd * dx, p.y + sd * dy);
        if let Some(x) = negative_axis_crossing(p, q) {
            return Some(x);
        }
        p = q;
    }
    None
}

/// Simulates the experiment and fits the tip exponent.
pub fn run_tip(exp: &TipExperiment, rng: &RngStream) -> Result<TipEstimate> {
    exp.validate()?;
    let dt = exp.horizon / exp.steps as f64;
    let hits: Vec<Option<f64>> = if exp.hurst == 0.5 {
        // i.i.d. increments: exact, and lets each path stop at its first hit
        par_replicates(rng, exp.replicates, |r| brownian_hit(exp.steps, dt, r))
    } else {
        let grid = Arc::new(TimeGrid::uniform(exp.horizon, exp.steps)?);
        let gen = FbmGenerator::new(exp.hurst, &grid)?;
        par_replicates(rng, exp.replicates, |r| {
            let mut xs = vec![0.0; grid.len()];
            let mut ys = vec![0.0; grid.len()];
            gen.sample_into(r, &mut xs);
            gen.sample_into(r, &mut ys);
            xs.iter_mut().for_each(|x| *x += 1.0);
            first_axis_hit(&xs, &ys)
        })
    };
    let locations: Vec<f64> = hits.into_iter().flatten().collect();
    Ok(summarise(exp, &locations))
}

fn summarise(exp: &TipExperiment, locations: &[f64]) -> TipEstimate {
    let total = locations.len() as u64;
    let points: Vec<TipPoint> = exp
        .epsilons
        .iter()
        .map(|&eps| {
            let k = locations.iter().filter(|&&x| x >= -eps).count() as u64;
            TipPoint {
                epsilon: eps,
                hits_in_tip: k,
                p_hat: if total > 0 { k as f64 / total as f64 } else { f64::NAN },
                stderr: binomial_se(k, total),
            }
        })
        .collect();
    let insufficient = total < MIN_HITS;
    let fit = if insufficient {
        None
    } else {
        let eps: Vec<f64> = points.iter().map(|p| p.epsilon).collect();
        let probs: Vec<f64> = points.iter().map(|p| p.p_hat).collect();
        // inverse delta-method variance of log p_hat: n p / (1 - p)
        let weights: Vec<f64> = points
            .iter()
            .map(|p| p.hits_in_tip as f64 / (1.0 - p.p_hat).max(1.0 / total as f64))
            .collect();
        fit_exponent(&eps, &probs, &weights).ok()
    };
    TipEstimate {
        hurst: exp.hurst,
        horizon: exp.horizon,
        steps: exp.steps,
        replicates: exp.replicates,
        total_hits: total,
        hit_fraction: total as f64 / exp.replicates as f64,
        points,
        fit,
        insufficient,
    }
}

/// Weighted least-squares slope of `log p` against `log eps`. Points with
/// `p <= 0` are dropped; at least three must remain.
pub fn fit_exponent(eps: &[f64], probs: &[f64], weights: &[f64]) -> Result<FitResult> {
    if eps.len() != probs.len() || eps.len() != weights.len() {
        return Err(Error::DegenerateFit("eps, probs and weights differ in length".into()));
    }
    let kept: Vec<(f64, f64, f64)> = eps
        .iter()
        .zip(probs)
        .zip(weights)
        .filter(|((_, &p), _)| p > 0.0)
        .map(|((&e, &p), &w)| (e.ln(), p.ln(), w))
        .collect();
    if kept.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 positive probabilities, got {}",
            kept.len()
        )));
    }
    let x: Vec<f64> = kept.iter().map(|k| k.0).collect();
    let y: Vec<f64> = kept.iter().map(|k| k.1).collect();
    let w: Vec<f64> = kept.iter().map(|k| k.2).collect();
    wls_fit(&x, &y, &w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub hurst: f64,
    pub exponent: Option<f64>,
    pub half_width: Option<f64>,
}

/// Two-sample comparison of tip probabilities at one `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TipComparison {
    pub epsilon: f64,
    pub rough_hurst: f64,
    pub smooth_hurst: f64,
    pub p_rough: f64,
    pub p_smooth: f64,
    pub pooled_se: f64,
    /// `p_rough - p_smooth > 3 pooled_se`; otherwise inconclusive.
    pub rough_larger: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub estimates: Vec<TipEstimate>,
    pub rows: Vec<SweepRow>,
    /// Smallest tip size, and whether `p(eps)` grows as `H` decreases there.
    pub monotone_epsilon: f64,
    pub monotone_in_hurst: Option<bool>,
    pub comparison: Option<TipComparison>,
}

impl SweepReport {
    /// CSV `H,epsilon,hits_in_tip,total_hits,p_hat,stderr`.
    pub fn write_points_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["H", "epsilon", "hits_in_tip", "total_hits", "p_hat", "stderr"])?;
        for e in &self.estimates {
            for p in &e.points {
                w.write_record([
                    e.hurst.to_string(),
                    p.epsilon.to_string(),
                    p.hits_in_tip.to_string(),
                    e.total_hits.to_string(),
                    p.p_hat.to_string(),
                    p.stderr.to_string(),
                ])?;
            }
        }
        w.flush()
    }

    /// CSV `H,exponent,half_width` (empty cells when withheld).
    pub fn write_exponents_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["H", "exponent", "half_width"])?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([r.hurst.to_string(), opt(r.exponent), opt(r.half_width)])?;
        }
        w.flush()
    }
}

/// Runs [`run_tip`] for every Hurst index (same stream each time) and
/// compares tip probabilities across roughness. The comparison uses
/// `eps = 0.1` when the template contains it, else the smallest tip size.
pub fn hurst_sweep(h_values: &[f64], template: &TipExperiment, rng: &RngStream) -> Result<SweepReport> {
    if h_values.is_empty() {
        return Err(Error::Empty("Hurst values"));
    }
    let estimates = h_values
        .iter()
        .map(|&h| run_tip(&TipExperiment { hurst: h, ..template.clone() }, rng))
        .collect::<Result<Vec<_>>>()?;
    let rows = estimates
        .iter()
        .map(|e| SweepRow {
            hurst: e.hurst,
            exponent: e.fit.map(|f| f.slope),
            half_width: e.fit.map(|f| f.half_width),
        })
        .collect();

    let smallest = *template.epsilons.last().expect("validated");
    let mut by_h: Vec<&TipEstimate> = estimates.iter().filter(|e| !e.insufficient).collect();
    by_h.sort_by(|a, b| a.hurst.total_cmp(&b.hurst));
    let monotone_in_hurst = (by_h.len() >= 2).then(|| {
        let ps: Vec<f64> = by_h.iter().map(|e| e.point(smallest).map_or(f64::NAN, |p| p.p_hat)).collect();
        ps.windows(2).all(|w| w[0] > w[1])
    });

    let compare_eps = template
        .epsilons
        .iter()
        .copied()
        .find(|&e| (e - 0.1).abs() < 1e-12)
        .unwrap_or(smallest);
    let comparison = match (by_h.first(), by_h.last()) {
        (Some(rough), Some(smooth)) if by_h.len() >= 2 => {
            let (a, b) = (rough.point(compare_eps), smooth.point(compare_eps));
            a.zip(b).map(|(a, b)| {
                let pooled_se = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
                TipComparison {
                    epsilon: compare_eps,
                    rough_hurst: rough.hurst,
                    smooth_hurst: smooth.hurst,
                    p_rough: a.p_hat,
                    p_smooth: b.p_hat,
                    pooled_se,
                    rough_larger: a.p_hat - b.p_hat > 3.0 * pooled_se,
                }
            })
        }
        _ => None,
    };

    Ok(SweepReport {
        estimates,
        rows,
        monotone_epsilon: smallest,
        monotone_in_hurst,
        comparison,
    })
}
