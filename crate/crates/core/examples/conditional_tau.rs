// Hitting-time law given one frozen barrier path: entropy growth with dyadic
// depth, against the flat barrier where the law has a density.

use std::sync::Arc;

use hitlab::barrier::{conditional_tau_profile, BarrierConfig, TauProfile};
use hitlab::paths::{sample_bm, TimeGrid};
use hitlab::RngStream;

pub fn run_example(replicates: usize) -> hitlab::Result<(TauProfile, TauProfile)> {
    let rough = BarrierConfig::new(1.0, 1.0, 10.0, 1e-3)?;
    let flat = BarrierConfig { sigma: 0.0, ..rough };
    let grid = Arc::new(TimeGrid::with_step(rough.horizon, rough.step)?);
    let w = sample_bm(&grid, &mut RngStream::new(21, 0).rng())?;
    let rng = RngStream::new(21, 1);
    Ok((
        conditional_tau_profile(&w, &rough, replicates, &rng)?,
        conditional_tau_profile(&w, &flat, replicates, &rng)?,
    ))
}

fn main() -> hitlab::Result<()> {
    let (rough, flat) = run_example(20_000)?;
    println!("depth  entropy(sigma=1)  entropy(sigma=0)");
    for ((d, a), b) in rough.depths.iter().zip(&rough.entropies).zip(&flat.entropies) {
        println!("{d:>5}  {a:>16.3}  {b:>16.3}");
    }
    println!(
        "slope over depths 4-10: sigma=1 {:.3}, sigma=0 {:.3}",
        rough.slope_over(4, 10).unwrap_or(f64::NAN),
        flat.slope_over(4, 10).unwrap_or(f64::NAN)
    );
    Ok(())
}
