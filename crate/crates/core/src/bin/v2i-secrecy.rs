use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use v2i_secrecy::experiment::{run_experiment, OutputOptions, Preset};

/// Sum-secrecy-rate optimization for a V2I backscatter link.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// Flat TOML file with scenario keys; absent keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// convergence, beta_sweep, power_budget, distance_velocity, single or unit_slots.
    #[arg(long, default_value = "single")]
    preset: String,

    /// Directory for the CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Accepted and ignored: every run is deterministic.
    #[arg(long)]
    seed: Option<u64>,

    /// Write zero wall times so repeated runs produce identical files.
    #[arg(long)]
    no_timing: bool,
}

fn run(args: Args) -> anyhow::Result<String> {
    let preset: Preset = args.preset.parse()?;
    let base = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            text.parse::<toml::Table>().with_context(|| format!("parsing {}", path.display()))?
        }
        None => toml::Table::new(),
    };
    let opts = OutputOptions { timing: !args.no_timing };
    Ok(run_experiment(preset, &base, &args.out, opts)?)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
