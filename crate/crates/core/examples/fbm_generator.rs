// Fractional Brownian motion by circulant embedding, checked against the
// exact covariance and the Cholesky generator.

use std::sync::Arc;

use hitlab::paths::{fbm_covariance, FbmGenerator, TimeGrid};
use hitlab::rng::par_replicates;
use hitlab::stats::covariance;
use hitlab::RngStream;

pub struct CovarianceCheck {
    pub hurst: f64,
    pub s: f64,
    pub t: f64,
    pub circulant: f64,
    pub cholesky: f64,
    pub exact: f64,
}

pub fn run_example(paths: usize) -> hitlab::Result<Vec<CovarianceCheck>> {
    let grid = Arc::new(TimeGrid::uniform(1.0, 64)?);
    let (i, j) = (16, 64);
    let (s, t) = (grid.times()[i], grid.times()[j]);
    let mut out = Vec::new();
    for hurst in [0.25, 0.5, 0.75] {
        let fast = FbmGenerator::new(hurst, &grid)?;
        let slow = FbmGenerator::cholesky(hurst, &grid)?;
        let cov = |g: &FbmGenerator, tag: &str| {
            let pairs: Vec<(f64, f64)> = par_replicates(&RngStream::new(5, 0).derive(tag), paths, |r| {
                let p = g.sample(r);
                (p.values()[i], p.values()[j])
            });
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            covariance(&a, &b)
        };
        out.push(CovarianceCheck {
            hurst,
            s,
            t,
            circulant: cov(&fast, "circulant"),
            cholesky: cov(&slow, "cholesky"),
            exact: fbm_covariance(hurst, s, t),
        });
    }
    Ok(out)
}

fn main() -> hitlab::Result<()> {
    for c in run_example(20_000)? {
        println!(
            "H = {:.2}  Cov(X_{}, X_{}): circulant {:.4}  cholesky {:.4}  exact {:.4}",
            c.hurst, c.s, c.t, c.circulant, c.cholesky, c.exact
        );
    }
    Ok(())
}
