// Probability that a planar (fractional) Brownian path from (1, 0) first meets
// the negative axis within distance eps of the origin, and its power-law
// exponent across Hurst indices.

use hitlab::tip::{hurst_sweep, SweepReport, TipExperiment};
use hitlab::RngStream;

pub fn run_example(replicates: usize, steps: usize) -> hitlab::Result<SweepReport> {
    let template = TipExperiment {
        hurst: 0.5,
        epsilons: TipExperiment::geometric_epsilons(0.4, 5),
        horizon: 50.0,
        steps,
        replicates,
    };
    hurst_sweep(&[0.3, 0.5, 0.7], &template, &RngStream::new(2026, 0))
}

fn main() -> hitlab::Result<()> {
    let sweep = run_example(10_000, 1 << 12)?;
    for e in &sweep.estimates {
        let fit = e.fit.map(|f| format!("{:.3} +- {:.3}", f.slope, f.half_width)).unwrap_or("withheld".into());
        println!("H = {:.1}: hit fraction {:.3}, exponent {fit}", e.hurst, e.hit_fraction);
    }
    if let Some(c) = sweep.comparison {
        println!(
            "eps = {}: p(H={}) = {:.4}, p(H={}) = {:.4}, rough larger by 3 SE: {}",
            c.epsilon, c.rough_hurst, c.p_rough, c.smooth_hurst, c.p_smooth, c.rough_larger
        );
    }
    Ok(())
}
