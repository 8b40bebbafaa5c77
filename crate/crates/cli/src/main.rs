//! `klr`: rank sweeps, random-projection comparisons, numerical verification
//! suites and analytic spectra for kernel low-rank approximation.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{RatesArgs, SpectrumArgs, Suite};
use crate::config::{ExperimentConfig, RankGrid};
use crate::error::CliError;

/// Overrides the output directory when `--out` is absent.
const OUT_ENV: &str = "KLR_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "klr", version, about = "Kernel low-rank approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct ExperimentArgs {
    /// JSON experiment configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated ranks or `auto`.
    #[arg(long)]
    ranks: Option<RankGrid>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Truncation errors over a rank grid for each configured kernel.
    Sweep(ExperimentArgs),
    /// Spectral truncation against Gaussian random projections.
    Compare(ExperimentArgs),
    /// Numerical verification suites.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form eigenvalues and decay parameters.
    Spectrum(SpectrumArgs),
    /// Rank thresholds and error rates over a grid of sample sizes.
    Rates(RatesArgs),
}

fn output_dir(flag: Option<PathBuf>, config: Option<&ExperimentConfig>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| config.map(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn experiment(args: ExperimentArgs) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(ranks) = args.ranks {
        config.ranks = ranks;
    }
    let out = output_dir(args.out, Some(&config));
    Ok((config, out))
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Sweep(args) => {
            let (config, out) = experiment(args)?;
            for path in commands::sweep(&config, &out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Compare(args) => {
            let (config, out) = experiment(args)?;
            for path in commands::compare(&config, &out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Verify { suite, seed, out } => {
            let out = output_dir(out, None);
            if !commands::verify(suite, seed, &out)? {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Spectrum(args) => commands::spectrum(&args)?,
        Command::Rates(args) => commands::rates(&args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("klr: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
