// Exact first-passage times tau = c^2 / Z^2 against the law 2 Phi(-c / sqrt(t)).

use hitlab::barrier::{first_passage_cdf, sample_tau_exact};
use hitlab::stats::ks_distance;
use hitlab::RngStream;

pub fn run_example(draws: usize) -> hitlab::Result<f64> {
    let mut r = RngStream::new(2, 0).rng();
    let taus = (0..draws)
        .map(|_| sample_tau_exact(1.0, &mut r))
        .collect::<hitlab::Result<Vec<_>>>()?;
    ks_distance(&taus, |t| first_passage_cdf(1.0, t))
}

fn main() -> hitlab::Result<()> {
    let n = 1_000_000;
    let d = run_example(n)?;
    println!("KS distance over {n} draws: {d:.2e} (critical value at 5%: {:.2e})", 1.36 / (n as f64).sqrt());
    Ok(())
}
