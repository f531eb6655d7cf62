//! `shiftinv` command-line driver.
//!
//! ```text
//! shiftinv kernel      --config cfg.json [--out DIR] [--grid-size G] [--radius R] [--seed S]
//! shiftinv reconstruct --config cfg.json ...
//! shiftinv verify      --config cfg.json ...
//! ```
//!
//! Exit codes: 0 success, 2 config error, 3 degenerate kernel, 4 failed
//! numerical check.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{ExperimentConfig, Overrides};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::config(format!("{}: {e}", path.display()))
    }
}

impl From<shiftinv::Error> for CliError {
    fn from(e: shiftinv::Error) -> Self {
        let code = match e {
            shiftinv::Error::DegenerateKernel { .. } => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(name = "shiftinv", version, about = "Sampling formulas in shift-invariant spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write S_a and every T_{a,k} on the evaluation grid, plus a JSON dump.
    Kernel(Args),
    /// Sample a signal through the scheme, reconstruct it and report errors.
    Reconstruct(Args),
    /// Run the matrix, interpolation and biorthogonality checks.
    Verify(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output` or `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long)]
    radius: Option<usize>,
    /// Seed of the random signal.
    #[arg(long)]
    seed: Option<u64>,
}

fn prepare(args: &Args) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let cfg = ExperimentConfig::load(
        &args.config,
        Overrides {
            grid_size: args.grid_size,
            radius: args.radius,
            seed: args.seed,
        },
    )?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Kernel(args) => {
            let (cfg, out) = prepare(&args)?;
            commands::cmd_kernel(&cfg, &out)
        }
        Command::Reconstruct(args) => {
            let (cfg, out) = prepare(&args)?;
            commands::cmd_reconstruct(&cfg, &out).map(|_| ())
        }
        Command::Verify(args) => {
            let (cfg, out) = prepare(&args)?;
            if commands::cmd_verify(&cfg, &out)? {
                Ok(())
            } else {
                Err(CliError {
                    code: 4,
                    message: "verification failed".into(),
                })
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
