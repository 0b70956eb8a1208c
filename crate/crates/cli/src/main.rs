//! `jacobi`: spectral diagnostics for periodically modulated Jacobi matrices.
//!
//! Exit codes: 0 success, 2 degenerate regime (nothing to certify),
//! 1 numerical failure, 64 bad usage or configuration.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{RunContext, Status};
use config::RunConfig;

const EXIT_NUMERIC: u8 = 1;
const EXIT_DEGENERATE: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "jacobi", version, about = "Spectral diagnostics for periodically modulated Jacobi matrices")]
struct Cli {
    /// Tolerance profile used when the config has no `tolerances` block.
    #[arg(long, global = true, env = "JACOBI_TOLERANCE_PROFILE", default_value = "default",
          value_parser = ["default", "strict", "loose"])]
    tolerance_profile: String,

    /// Worker threads for λ sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the regime, check hypotheses and sweep λ.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's `n_max`.
        #[arg(long)]
        n_max: Option<usize>,
        /// Output directory (default: `out_dir` from the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generalized eigenvectors and Turán traces at one λ or over the config grid.
    Trace {
        #[arg(long)]
        config: PathBuf,
        /// Single λ; omit to sweep the config's `lambda` grid.
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        /// Initial direction α = (cos θ, sin θ).
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral gap estimate in the critical regime.
    Gap {
        #[arg(long)]
        config: PathBuf,
        /// Output JSON file (default: `<out_dir>/gap.json`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn fail(code: u8, err: anyhow::Error) -> ExitCode {
    eprintln!("error: {err:#}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let config_path = match &cli.command {
        Command::Analyze { config, .. } | Command::Trace { config, .. } | Command::Gap { config, .. } => config,
    };
    let prepared = RunConfig::load(config_path).and_then(|mut config| {
        if let Command::Analyze { n_max: Some(n), .. } = &cli.command {
            config.n_max = *n;
            config.validate()?;
        }
        let out = match &cli.command {
            Command::Analyze { out, .. } | Command::Trace { out, .. } => {
                commands::out_path(out.clone(), &config)?
            }
            Command::Gap { out, .. } => match out {
                Some(p) => p.clone(),
                None => commands::out_path(None, &config)?.join("gap.json"),
            },
        };
        Ok((RunContext::new(config, &cli.tolerance_profile)?, out))
    });
    let (ctx, out) = match prepared {
        Ok(p) => p,
        Err(e) => return fail(EXIT_USAGE, e),
    };

    let result = match cli.command {
        Command::Analyze { .. } => commands::analyze(&ctx, &out, cli.jobs),
        Command::Trace { lambda, alpha, .. } => commands::trace(&ctx, lambda, alpha, &out, cli.jobs),
        Command::Gap { .. } => commands::gap(&ctx, &out),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Degenerate) => {
            eprintln!("regime is degenerate: no spectral conclusion");
            ExitCode::from(EXIT_DEGENERATE)
        }
        Err(e) => fail(EXIT_NUMERIC, e),
    }
}
