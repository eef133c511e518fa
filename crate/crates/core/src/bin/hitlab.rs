use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hitlab::experiment::{self, ExperimentConfig, CONFIG_ERROR_EXIT, KINDS};

#[derive(Parser)]
#[command(name = "hitlab", version, about = "Hitting-measure experiments from TOML configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// List experiment kinds.
    ListKinds,
    /// Re-render SVG charts from the CSV files in an output directory.
    Plot {
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        CONFIG_ERROR_EXIT as u8
    })?;
    ExperimentConfig::load(&text).map_err(|e| {
        eprintln!("{}:\n{e}", path.display());
        CONFIG_ERROR_EXIT as u8
    })
}

fn main() -> ExitCode {
    let code = match Cli::parse().command {
        Command::ListKinds => {
            for k in KINDS {
                println!("{k}");
            }
            0
        }
        Command::Validate { config } => match load(&config) {
            Ok(_) => {
                println!("ok");
                0
            }
            Err(c) => c,
        },
        Command::Plot { out } => match experiment::replot(&out) {
            Ok(files) => {
                for f in files {
                    println!("{}", out.join(f).display());
                }
                0
            }
            Err(e) => {
                eprintln!("{e}");
                2
            }
        },
        Command::Run { config, seed, parallelism, out } => match load(&config) {
            Err(c) => c,
            Ok(mut cfg) => {
                cfg.seed = seed.unwrap_or(cfg.seed);
                cfg.parallelism = parallelism.unwrap_or(cfg.parallelism);
                cfg.output = out.unwrap_or(cfg.output);
                match experiment::run(&cfg) {
                    Err(e) => {
                        eprintln!("{e}");
                        CONFIG_ERROR_EXIT as u8
                    }
                    Ok(report) => {
                        if let Some(e) = &report.error {
                            eprintln!("error: {e}");
                        }
                        println!("{}", cfg.output.join("report.json").display());
                        report.exit_code() as u8
                    }
                }
            }
        },
    };
    ExitCode::from(code)
}
