// Config-driven run: parses a TOML experiment, writes CSV, SVG and a JSON
// report into a directory.

use std::path::Path;

use hitlab::experiment::{run, ExperimentConfig, RunReport};

pub fn run_example(out: &Path) -> Result<RunReport, Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::load(
        r#"
kind = "gasket"
seed = 7

[gasket]
n_max = 4
subsets = [{ type = "bottom_side" }, { type = "random_k", k = 5, draws = 3 }]
"#,
    )?;
    cfg.output = out.to_path_buf();
    Ok(run(&cfg)?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("hitlab-run-config");
    let report = run_example(&dir)?;
    println!("status {:?}, files in {}:", report.status, dir.display());
    for f in &report.files {
        println!("  {f}");
    }
    Ok(())
}
