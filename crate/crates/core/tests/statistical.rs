//! Monte Carlo checks against closed-form laws. Each oracle is computed here,
//! independently of the code under test.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use statrs::distribution::{ContinuousCDF, Normal};

use hitlab::barrier::{
    conditional_tau_profile, first_crossing, lil_grid, lil_scales, lil_statistic, rotate_pair, sample_tau_exact,
    BarrierConfig,
};
use hitlab::paths::{sample_bm, sample_mixture, TimeGrid};
use hitlab::rng::par_replicates;
use hitlab::stats::{correlation, mann_whitney_less, mean, variance};
use hitlab::RngStream;

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

/// `P(sup_{t<=T} B_t >= a) = 2 P(B_T >= a)` by reflection.
fn reflection_cdf(a: f64, t: f64) -> f64 {
    2.0 * (1.0 - std_normal().cdf(a / t.sqrt()))
}

fn proportion_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn hit_probability_matches_reflection_principle() {
    let cfg = BarrierConfig::new(1.0, 1.0, 100.0, 1e-3).unwrap();
    let grid = Arc::new(TimeGrid::with_step(cfg.horizon, cfg.step).unwrap());
    let n = 10_000;
    let hits: Vec<bool> = par_replicates(&RngStream::new(100, 0), n, |r| {
        let b = sample_bm(&grid, r).unwrap();
        let w = sample_bm(&grid, r).unwrap();
        first_crossing(&b, &w, &cfg).unwrap().is_some()
    });
    let p_hat = hits.iter().filter(|&&h| h).count() as f64 / n as f64;
    let exact = reflection_cdf(1.0 / 2f64.sqrt(), 100.0);
    let se = proportion_se(exact, n);
    println!("P(hit by 100): {p_hat:.4} vs {exact:.4} (se {se:.4})");
    assert!((p_hat - exact).abs() < 4.0 * se);
}

#[test]
fn rotated_components_are_independent_brownian_motions() {
    let grid = Arc::new(TimeGrid::uniform(1.0, 16).unwrap());
    let n = 10_000;
    let ends: Vec<(f64, f64)> = par_replicates(&RngStream::new(101, 0), n, |r| {
        let b = sample_bm(&grid, r).unwrap();
        let w = sample_bm(&grid, r).unwrap();
        let (x, y) = rotate_pair(&b, &w, 2.0).unwrap();
        (x.last(), y.last())
    });
    let (x, y): (Vec<f64>, Vec<f64>) = ends.into_iter().unzip();
    assert!((variance(&x) - 1.0).abs() < 0.05, "Var X_1 = {}", variance(&x));
    assert!(correlation(&x, &y).abs() < 4.0 / (n as f64).sqrt());
}

#[test]
fn exact_first_passage_sampler() {
    let n = 1_000_000;
    let mut r = RngStream::new(102, 0).rng();
    let mut one: Vec<f64> = (0..n).map(|_| sample_tau_exact(1.0, &mut r).unwrap()).collect();
    for t in [0.5, 1.0, 2.0, 5.0] {
        let exact = reflection_cdf(1.0, t);
        let emp = one.iter().filter(|&&x| x <= t).count() as f64 / n as f64;
        assert!((emp - exact).abs() < 4.0 * proportion_se(exact, n), "t {t}: {emp} vs {exact}");
    }
    one.sort_by(f64::total_cmp);
    let median = one[n / 2];
    let q = std_normal().inverse_cdf(0.75);
    let exact_median = 1.0 / (q * q);
    assert!((median / exact_median - 1.0).abs() < 0.01, "{median} vs {exact_median}");

    let mut r = RngStream::new(102, 1).rng();
    let mut two: Vec<f64> = (0..n).map(|_| sample_tau_exact(2.0, &mut r).unwrap()).collect();
    two.sort_by(f64::total_cmp);
    // quantile-quantile slope over the central 80%
    let qs: Vec<(f64, f64)> = (1..=80).map(|k| {
        let i = n * (10 + k) / 100 - 1;
        (one[i], two[i])
    }).collect();
    let slope = qs.iter().map(|(a, b)| a * b).sum::<f64>() / qs.iter().map(|(a, _)| a * a).sum::<f64>();
    assert!((slope / 4.0 - 1.0).abs() < 0.02, "qq slope {slope}");
}

fn lil_values(alpha: Option<f64>, tag: &str, n: usize, smallest: f64) -> Vec<f64> {
    let grid = lil_grid(1e-2, smallest).unwrap();
    let scales = lil_scales(1e-2, smallest).unwrap();
    par_replicates(&RngStream::new(103, 0).derive(tag), n, |r| {
        let p = match alpha {
            None => sample_bm(&grid, r).unwrap(),
            Some(a) => sample_mixture(a, &grid, r).unwrap(),
        };
        lil_statistic(&p, &scales).unwrap().value
    })
}

#[test]
fn lil_statistic_of_brownian_paths_is_bracketed() {
    let bm = lil_values(None, "bm", 1000, 1e-6);
    let m = mean(&bm);
    println!("mean LIL statistic of BM: {m:.3}");
    assert!(m > 0.5 && m < 1.1);
}

#[test]
fn mixture_statistic_is_stochastically_smaller() {
    let bm = lil_values(None, "bm", 1000, 1e-6);
    for alpha in [-0.3, -FRAC_1_SQRT_2, -0.9] {
        let mix = lil_values(Some(alpha), &format!("mix{alpha}"), 1000, 1e-6);
        let p = mann_whitney_less(&mix, &bm).unwrap();
        println!("alpha {alpha:.3}: rank-test p = {p:.2e}");
        assert!(p < 1e-3);
    }
}

#[test]
fn halving_the_step_keeps_hit_probability() {
    let n = 100_000;
    let p_at = |step: f64, tag: &str| {
        let cfg = BarrierConfig::new(1.0, 1.0, 1.0, step).unwrap();
        let grid = Arc::new(TimeGrid::with_step(1.0, step).unwrap());
        let hits: Vec<bool> = par_replicates(&RngStream::new(104, 0).derive(tag), n, |r| {
            let b = sample_bm(&grid, r).unwrap();
            let w = sample_bm(&grid, r).unwrap();
            first_crossing(&b, &w, &cfg).unwrap().is_some()
        });
        hits.iter().filter(|&&h| h).count() as f64 / n as f64
    };
    let coarse = p_at(1e-3, "coarse");
    let fine = p_at(5e-4, "fine");
    let pooled = (proportion_se(coarse, n).powi(2) + proportion_se(fine, n).powi(2)).sqrt();
    println!("P(tau <= 1): step 1e-3 {coarse:.4}, step 5e-4 {fine:.4}, pooled se {pooled:.4}");
    assert!((coarse - fine).abs() < 3.0 * pooled);
}

#[test]
fn flat_barrier_hitting_time_has_full_dimension() {
    let rough = BarrierConfig::new(1.0, 1.0, 10.0, 1e-3).unwrap();
    let flat = BarrierConfig { sigma: 0.0, ..rough };
    let grid = Arc::new(TimeGrid::with_step(10.0, 1e-3).unwrap());
    let w = sample_bm(&grid, &mut RngStream::new(105, 0).rng()).unwrap();
    let rng = RngStream::new(105, 1);
    let p0 = conditional_tau_profile(&w, &flat, 100_000, &rng).unwrap();
    let slope0 = p0.slope_over(4, 10).unwrap();
    let p1 = conditional_tau_profile(&w, &rough, 100_000, &rng).unwrap();
    println!(
        "entropy slope over depths 4-10: sigma=0 {slope0:.3}, sigma=1 {:.3}",
        p1.slope_over(4, 10).unwrap()
    );
    assert!((slope0 - 1.0).abs() < 0.1);
}

#[test]
fn disjoint_brownian_increments_are_uncorrelated() {
    let grid = Arc::new(TimeGrid::uniform(1.0, 8).unwrap());
    let n = 100_000;
    let incs: Vec<(f64, f64)> = par_replicates(&RngStream::new(106, 0), n, |r| {
        let p = sample_bm(&grid, r).unwrap();
        let v = p.values();
        (v[2] - v[1], v[7] - v[5])
    });
    let (a, b): (Vec<f64>, Vec<f64>) = incs.into_iter().unzip();
    assert!(correlation(&a, &b).abs() < 4.0 / (n as f64).sqrt());
}

#[test]
fn doubling_tip_steps_keeps_tip_probabilities() {
    use hitlab::tip::{run_tip, TipExperiment};
    let at = |steps: usize| {
        let exp = TipExperiment {
            hurst: 0.5,
            epsilons: TipExperiment::geometric_epsilons(0.4, 5),
            horizon: 50.0,
            steps,
            replicates: 20_000,
        };
        run_tip(&exp, &RngStream::new(107, 0)).unwrap()
    };
    let (coarse, fine) = (at(1 << 12), at(1 << 13));
    for (a, b) in coarse.points.iter().zip(&fine.points) {
        let pooled = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
        println!("eps {}: {:.4} vs {:.4} (pooled se {pooled:.4})", a.epsilon, a.p_hat, b.p_hat);
        assert!((a.p_hat - b.p_hat).abs() < 3.0 * pooled, "eps {}", a.epsilon);
    }
}
