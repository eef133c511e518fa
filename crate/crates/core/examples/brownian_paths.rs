// Brownian motion, Bessel(3) and their mixture on a shared grid: compares
// sample moments with the exact ones.

use std::sync::Arc;

use hitlab::paths::{sample_bes3, sample_bm, sample_mixture, TimeGrid};
use hitlab::rng::par_replicates;
use hitlab::stats::mean;
use hitlab::RngStream;

pub struct Moments {
    pub bm_var: f64,
    pub bes3_second_moment: f64,
    pub mixture_mean: f64,
    pub mixture_mean_exact: f64,
}

pub fn run_example(paths: usize) -> hitlab::Result<Moments> {
    let grid = Arc::new(TimeGrid::uniform(1.0, 256)?);
    let alpha = -std::f64::consts::FRAC_1_SQRT_2;
    let rng = RngStream::new(11, 0);
    let ends: Vec<[f64; 3]> = par_replicates(&rng, paths, |r| {
        [
            sample_bm(&grid, r).unwrap().last(),
            sample_bes3(&grid, r).unwrap().last(),
            sample_mixture(alpha, &grid, r).unwrap().last(),
        ]
    });
    let col = |i: usize| ends.iter().map(|e| e[i]).collect::<Vec<_>>();
    Ok(Moments {
        bm_var: mean(&col(0).iter().map(|x| x * x).collect::<Vec<_>>()),
        bes3_second_moment: mean(&col(1).iter().map(|x| x * x).collect::<Vec<_>>()),
        mixture_mean: mean(&col(2)),
        mixture_mean_exact: alpha * 2.0 * (2.0 / std::f64::consts::PI).sqrt(),
    })
}

fn main() -> hitlab::Result<()> {
    let m = run_example(20_000)?;
    println!("Var B(1)           {:.4}  (exact 1)", m.bm_var);
    println!("E R(1)^2           {:.4}  (exact 3)", m.bes3_second_moment);
    println!("E mixture(1)       {:.4}  (exact {:.4})", m.mixture_mean, m.mixture_mean_exact);
    Ok(())
}
