// Iterated-logarithm statistic separating Brownian paths from the
// alpha BES(3) + sqrt(1 - alpha^2) BM mixture.

use hitlab::barrier::{lil_separation, LilSeparation};
use hitlab::RngStream;

pub fn run_example(paths_per_class: usize) -> hitlab::Result<Vec<LilSeparation>> {
    let alpha = -std::f64::consts::FRAC_1_SQRT_2;
    [1e-4, 1e-5, 1e-6]
        .into_iter()
        .map(|smallest| lil_separation(alpha, 1e-2, smallest, paths_per_class, &RngStream::new(9, 0)))
        .collect()
}

fn main() -> hitlab::Result<()> {
    for s in run_example(500)? {
        println!(
            "smallest scale {:.0e}: accuracy {:.3} at cut {:.3}, {:.3} at calibrated cut {:.3} (means {:.3} vs {:.3})",
            s.smallest_scale, s.accuracy, s.threshold, s.calibrated_accuracy, s.calibrated_threshold, s.bm_mean, s.mixture_mean
        );
    }
    Ok(())
}
