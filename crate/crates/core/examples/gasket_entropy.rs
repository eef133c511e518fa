// Exact hitting law of the simple random walk from the top of a Sierpinski
// gasket graph onto its bottom side, and its entropy against the bound n.

use hitlab::gasket::{build_gasket, entropy_bits, hitting_distribution, mc_srw_hitting, total_variation};
use hitlab::RngStream;

pub struct GasketRow {
    pub n: u32,
    pub vertices: usize,
    pub entropy: f64,
    pub mc_total_variation: Option<f64>,
}

pub fn run_example(n_max: u32, walks: usize) -> hitlab::Result<Vec<GasketRow>> {
    (1..=n_max)
        .map(|n| {
            let g = build_gasket(n)?;
            let law = hitting_distribution(&g, g.top(), g.bottom_side())?;
            let mc_total_variation = if n <= 3 {
                let mc = mc_srw_hitting(&g, g.top(), g.bottom_side(), walks, &RngStream::new(4, u64::from(n)))?;
                Some(total_variation(&law, &mc))
            } else {
                None
            };
            Ok(GasketRow {
                n,
                vertices: g.vertex_count(),
                entropy: entropy_bits(&law),
                mc_total_variation,
            })
        })
        .collect()
}

fn main() -> hitlab::Result<()> {
    println!(" n  vertices  entropy  bound  MC TV");
    for r in run_example(7, 100_000)? {
        let tv = r.mc_total_variation.map(|t| format!("{t:.4}")).unwrap_or_default();
        println!("{:>2}  {:>8}  {:>7.4}  {:>5}  {tv}", r.n, r.vertices, r.entropy, r.n);
    }
    Ok(())
}
