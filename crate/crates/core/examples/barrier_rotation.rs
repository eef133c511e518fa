// B hits c + sigma W exactly when the rotated process hits c / sqrt(1 + sigma^2).
// Counts realisations where the two detectors disagree.

use std::sync::Arc;

use hitlab::barrier::{first_crossing, first_level_crossing, rotate_pair, BarrierConfig};
use hitlab::paths::{sample_bm, TimeGrid};
use hitlab::RngStream;

pub struct RotationCheck {
    pub sigma: f64,
    pub pairs: usize,
    pub hits: usize,
    pub index_mismatches: usize,
    pub max_relative_tau_error: f64,
}

pub fn run_example(pairs: usize) -> hitlab::Result<Vec<RotationCheck>> {
    let mut out = Vec::new();
    for sigma in [0.5, 1.0, 2.0] {
        let cfg = BarrierConfig::new(1.0, sigma, 10.0, 1e-3)?;
        let grid = Arc::new(TimeGrid::with_step(cfg.horizon, cfg.step)?);
        let mut check = RotationCheck {
            sigma,
            pairs,
            hits: 0,
            index_mismatches: 0,
            max_relative_tau_error: 0.0,
        };
        for i in 0..pairs {
            let mut r = RngStream::new(3, 0).child(i as u64).rng();
            let b = sample_bm(&grid, &mut r)?;
            let w = sample_bm(&grid, &mut r)?;
            let direct = first_crossing(&b, &w, &cfg)?;
            let (x, _) = rotate_pair(&b, &w, sigma)?;
            let rotated = first_level_crossing(&x, cfg.c_tilde(), cfg.horizon);
            match (direct, rotated) {
                (Some(d), Some(r)) => {
                    check.hits += 1;
                    check.index_mismatches += usize::from(d.index != r.index);
                    let err = (d.tau - r.tau).abs() / d.tau;
                    check.max_relative_tau_error = check.max_relative_tau_error.max(err);
                }
                (None, None) => {}
                _ => check.index_mismatches += 1,
            }
        }
        out.push(check);
    }
    Ok(out)
}

fn main() -> hitlab::Result<()> {
    for c in run_example(1000)? {
        println!(
            "sigma {:.1}: {} of {} pairs hit, {} index mismatches, max relative tau error {:.1e}",
            c.sigma, c.hits, c.pairs, c.index_mismatches, c.max_relative_tau_error
        );
    }
    Ok(())
}
