//! Statistical helpers shared by the experiments.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Number of bootstrap resamples used for every confidence half-width.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Result of a weighted straight-line fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// 1.96 times the standard error of the slope.
    pub half_width: f64,
}

/// Base-2 Shannon entropy with the convention `0 log 0 = 0`.
pub fn entropy_base2(probs: &[f64]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::Empty("probability vector"));
    }
    if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
        return Err(Error::InvalidProbabilities(format!("negative or NaN entry {p}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities(format!("entries sum to {total}, not 1")));
    }
    Ok(entropy_unchecked(probs))
}

pub(crate) fn entropy_unchecked(probs: &[f64]) -> f64 {
    let h: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    // -0.0 for point masses
    h.max(0.0)
}

/// Entropy in bits of the empirical law given by integer counts.
pub fn entropy_of_counts(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Kolmogorov–Smirnov sup distance between the empirical CDF of `samples`
/// and `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x).clamp(0.0, 1.0);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d = d.max(above).max(below);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Weighted least-squares line `y = intercept + slope * x`.
///
/// The half-width is 1.96 times the residual-based standard error of the
/// slope. With exactly two points there are no residual degrees of freedom
/// and the weights are taken as inverse variances instead.
pub fn wls_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<FitResult> {
    if x.len() != y.len() || x.len() != w.len() {
        return Err(Error::DegenerateFit("x, y and w differ in length".into()));
    }
    if x.len() < 2 {
        return Err(Error::DegenerateFit(format!("need at least 2 points, got {}", x.len())));
    }
    if w.iter().any(|&wi| !(wi > 0.0) || !wi.is_finite()) {
        return Err(Error::DegenerateFit("weights must be positive and finite".into()));
    }
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ym = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        sxx += wi * (xi - xm) * (xi - xm);
        sxy += wi * (xi - xm) * (yi - ym);
    }
    let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    if sxx <= 1e-24 * sw * scale * scale {
        return Err(Error::DegenerateFit("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let n = x.len();
    let var_slope = if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .zip(w)
            .map(|((&xi, &yi), &wi)| {
                let r = yi - intercept - slope * xi;
                wi * r * r
            })
            .sum();
        rss / (n - 2) as f64 / sxx
    } else {
        1.0 / sxx
    };
    Ok(FitResult {
        slope,
        intercept,
        half_width: 1.96 * var_slope.sqrt(),
    })
}

/// Binomial standard error of the proportion `k / n`.
pub fn binomial_se(k: u64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    let p = k as f64 / n as f64;
    (p * (1.0 - p) / n as f64).sqrt()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Sample covariance of paired observations.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let mx = mean(xs);
    let my = mean(ys);
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Pearson correlation.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    covariance(xs, ys) / (variance(xs) * variance(ys)).sqrt()
}

/// Standard error of the sample covariance, estimated from the spread of the
/// centred products.
pub fn covariance_se(xs: &[f64], ys: &[f64]) -> f64 {
    let mx = mean(xs);
    let my = mean(ys);
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    (variance(&prods) / xs.len() as f64).sqrt()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sided Mann–Whitney rank test of H1: `lower` tends to be smaller than
/// `upper`. Returns the normal-approximation p-value (with tie correction).
pub fn mann_whitney_less(lower: &[f64], upper: &[f64]) -> Result<f64> {
    if lower.is_empty() || upper.is_empty() {
        return Err(Error::Empty("rank test sample"));
    }
    let n1 = lower.len();
    let n2 = upper.len();
    let mut pooled: Vec<(f64, bool)> = lower
        .iter()
        .map(|&v| (v, true))
        .chain(upper.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pooled.len();
    let mut rank_sum_lower = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        for item in &pooled[i..=j] {
            if item.1 {
                rank_sum_lower += avg_rank;
            }
        }
        i = j + 1;
    }
    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let u = rank_sum_lower - n1f * (n1f + 1.0) / 2.0;
    let mu = n1f * n2f / 2.0;
    let var = n1f * n2f / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if var <= 0.0 {
        return Ok(0.5);
    }
    let z = (u - mu + 0.5) / var.sqrt();
    Ok(normal_cdf(z))
}

/// Percentile bootstrap half-width `(q97.5 - q2.5) / 2` of `statistic` under
/// resampling of `data` with replacement.
pub fn bootstrap_half_width<T: Clone>(
    data: &[T],
    rng: &RngStream,
    statistic: impl Fn(&[T]) -> Option<f64>,
) -> f64 {
    if data.is_empty() {
        return f64::NAN;
    }
    let mut r = rng.rng();
    let mut buf = Vec::with_capacity(data.len());
    let mut stats = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        buf.clear();
        for _ in 0..data.len() {
            buf.push(data[r.gen_range(0..data.len())].clone());
        }
        if let Some(s) = statistic(&buf) {
            stats.push(s);
        }
    }
    if stats.len() < 2 {
        return f64::NAN;
    }
    stats.sort_by(f64::total_cmp);
    let q = |p: f64| stats[((stats.len() - 1) as f64 * p).round() as usize];
    (q(0.975) - q(0.025)) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_base2(&[1.0]).unwrap(), 0.0);
        assert_eq!(entropy_base2(&[0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(entropy_base2(&[0.25; 4]).unwrap(), 2.0);
        assert_eq!(entropy_base2(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_rejects_bad_input() {
        assert!(entropy_base2(&[-0.1, 1.1]).is_err());
        assert!(entropy_base2(&[0.3, 0.3]).is_err());
        assert!(entropy_base2(&[]).is_err());
    }

    #[test]
    fn ks_examples() {
        let cdf = |x: f64| x.clamp(0.0, 1.0);
        assert_eq!(ks_distance(&[0.5; 10], cdf).unwrap(), 0.5);
        assert_eq!(ks_distance(&[0.0], cdf).unwrap(), 1.0);
        assert!(ks_distance(&[], cdf).is_err());
    }

    #[test]
    fn ks_on_own_distribution() {
        let mut r = RngStream::new(5, 0).rng();
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
        let d = ks_distance(&xs, normal_cdf).unwrap();
        assert!(d < 1.95 / (n as f64).sqrt(), "d = {d}");
    }

    #[test]
    fn wls_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.5];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let fit = wls_fit(&x, &y, &[1.0, 2.0, 1.0, 0.5]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-14);
        assert!((fit.intercept - 1.0).abs() < 1e-14);
        assert!(fit.half_width < 1e-12);
    }

    #[test]
    fn wls_rejects_duplicate_x() {
        assert!(matches!(
            wls_fit(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0], &[1.0; 3]),
            Err(Error::DegenerateFit(_))
        ));
        assert!(wls_fit(&[1.0], &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn wls_planted_noise_coverage() {
        let mut r = RngStream::new(99, 0).rng();
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let sd: Vec<f64> = (0..10).map(|i| 0.1 + 0.05 * i as f64).collect();
        let w: Vec<f64> = sd.iter().map(|s| 1.0 / (s * s)).collect();
        let mut covered = 0;
        for _ in 0..1000 {
            let y: Vec<f64> = x
                .iter()
                .zip(&sd)
                .map(|(xi, s)| -0.7 * xi + 2.0 + s * Distribution::<f64>::sample(&StandardNormal, &mut r))
                .collect();
            let fit = wls_fit(&x, &y, &w).unwrap();
            if (fit.slope + 0.7).abs() <= 3.0 * fit.half_width {
                covered += 1;
            }
        }
        assert!(covered >= 950, "covered {covered}/1000");
    }

    #[test]
    fn rank_test_detects_shift() {
        let mut r = RngStream::new(3, 0).rng();
        let a: Vec<f64> = (0..300).map(|_| StandardNormal.sample(&mut r)).collect();
        let b: Vec<f64> = (0..300).map(|_| 0.5 + Distribution::<f64>::sample(&StandardNormal, &mut r)).collect();
        assert!(mann_whitney_less(&a, &b).unwrap() < 1e-3);
        assert!(mann_whitney_less(&b, &a).unwrap() > 0.5);
    }

    #[test]
    fn binomial_se_formula() {
        assert!((binomial_se(25, 100) - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn entropy_bounded_by_support(raw in prop::collection::vec(0.0f64..10.0, 1..40)) {
            let total: f64 = raw.iter().sum();
            prop_assume!(total > 0.0);
            let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let h = entropy_base2(&p).unwrap();
            let support = p.iter().filter(|&&v| v > 0.0).count() as f64;
            prop_assert!(h >= 0.0);
            prop_assert!(h <= support.log2() + 1e-12);
        }

        #[test]
        fn ks_in_unit_interval(xs in prop::collection::vec(-5.0f64..5.0, 1..50)) {
            let d = ks_distance(&xs, normal_cdf).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
        }

        #[test]
        fn wls_exact_on_lines(a in -5.0f64..5.0, b in -5.0f64..5.0,
                              xs in prop::collection::btree_set(-100i32..100, 2..12)) {
            let x: Vec<f64> = xs.iter().map(|&v| v as f64 / 10.0).collect();
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let fit = wls_fit(&x, &y, &vec![1.0; x.len()]).unwrap();
            prop_assert!((fit.slope - a).abs() < 1e-9);
            prop_assert!((fit.intercept - b).abs() < 1e-9);
        }
    }
}
