//! `hyperrank`: analyses, mixing curves, conjugacies and nilpotent CRT
//! from JSON configs.
//!
//! Exit codes: 0 ok, 1 parse or other error, 2 certified obstruction,
//! 3 inconclusive factor search, 4 mode leaves the dual lattice,
//! 5 map not expanding.

mod analyze;
mod config;
mod conjugate;
mod crt;
mod error;
mod mixing;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(name = "hyperrank", version, about = "Exact analysis of commuting toral automorphisms and their extensions")]
struct Cli {
    /// Overrides the seed in the config.
    #[arg(long, global = true, env = "HYPERRANK_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ergodicity certificates, Lyapunov table, chambers and ergodic Z^2 search.
    Analyze {
        config: PathBuf,
        /// Search bound for ergodic elements and subgroups.
        #[arg(long)]
        bound: Option<u64>,
        /// Report path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact correlation curve with optional Monte Carlo columns.
    Mixing {
        config: PathBuf,
        #[arg(long)]
        nmax: Option<u64>,
        /// Monte Carlo samples (0 disables).
        #[arg(long)]
        mc: Option<usize>,
        /// Curve CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary JSON path (stdout when omitted).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Conjugacy of a perturbed expanding map with its linear part.
    Conjugate {
        config: PathBuf,
        /// Grid points per axis.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Field CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary JSON path (stdout when omitted).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Integer solution of the nilpotent Chinese remainder problem.
    Crt { structure: PathBuf, targets: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let seed = cli.seed;
    match cli.command {
        Command::Analyze { config, bound, out } => analyze::run(config, bound, out),
        Command::Mixing { config, nmax, mc, out, summary } => {
            mixing::run(mixing::MixingArgs { config, nmax, mc, out, summary, seed })
        }
        Command::Conjugate { config, grid, tol, out, summary } => {
            conjugate::run(conjugate::ConjugateArgs { config, grid, tol, out, summary, seed })
        }
        Command::Crt { structure, targets } => crt::run(structure, targets),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors, which is reserved for obstructions here
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
