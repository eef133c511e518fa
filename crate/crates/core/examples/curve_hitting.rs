// Boundary measure of a randomly rotated curve rooted inside the unit disk,
// with its entropy dimension. A ray gives the uniform measure; a Brownian
// polyline gives whatever it gives.

use hitlab::curve::{boundary_measure, entropy_dimension, Domain, EntropyDimension, PlanarPath};
use hitlab::geometry::Point;
use hitlab::RngStream;

pub fn run_example(samples: usize) -> hitlab::Result<Vec<(&'static str, EntropyDimension)>> {
    let disk = Domain::disk(Point::default(), 1.0, 256)?;
    let root = Point::new(0.3, -0.2);
    let curves = [
        ("ray", PlanarPath::ray(0.0, 3.0)),
        ("brownian", PlanarPath::brownian(1 << 14, 16.0, &RngStream::new(8, 0))?),
    ];
    curves
        .into_iter()
        .map(|(name, c)| {
            let m = boundary_measure(&c, &disk, root, samples, &RngStream::new(8, 1), 14)?;
            Ok((name, entropy_dimension(&m, &RngStream::new(8, 2))?))
        })
        .collect()
}

fn main() -> hitlab::Result<()> {
    for (name, d) in run_example(50_000)? {
        println!(
            "{name:>8}: slope {:.3} +- {:.3} over depths {}..={}",
            d.slope, d.half_width, d.stable_depths.0, d.stable_depths.1
        );
    }
    Ok(())
}
