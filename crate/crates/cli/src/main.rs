//! `hiercon`: analyze and simulate hierarchical consensus scenarios.
//!
//! Subcommands take one or more scenario JSON files; `--jobs` runs a
//! batch in parallel. Exit codes: 0 ok, 2 invalid scenario, 3 I/O or
//! parse failure, 4 unexpected divergence (suppressed by
//! `--allow-unstable`). Set `HIERCON_LOG=debug` for diagnostics.

mod commands;
mod report;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hiercon",
    version,
    about = "Hierarchical consensus analysis and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct BatchArgs {
    /// Scenario files.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Parallel workers for multi-file batches.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Clone)]
struct SimArgs {
    /// Trajectory CSV destination (overrides the scenario's output block).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Report JSON destination (otherwise printed to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Step size override in seconds.
    #[arg(long)]
    step: Option<f64>,
    /// Horizon override in seconds.
    #[arg(long)]
    t_end: Option<f64>,
    /// Exit 0 even when the trajectory diverges.
    #[arg(long)]
    allow_unstable: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check scenario files against every structural invariant.
    Validate {
        #[command(flatten)]
        batch: BatchArgs,
    },
    /// Layer spectra, spectrum-union verdict, and consensus weights.
    Spectrum {
        #[command(flatten)]
        batch: BatchArgs,
        /// Report JSON destination (otherwise printed to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also redraw random collecting vectors this many times and
        /// check the spectra stay put.
        #[arg(long, default_value_t = 0)]
        c_invariance_trials: usize,
        /// Seed for the invariance redraws.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Interlayer-delay bounds and stability verdict.
    Bounds {
        #[command(flatten)]
        batch: BatchArgs,
        /// Full report JSON destination; stdout carries the verdict only.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the delayed dynamics; write trajectory CSV and a report.
    Simulate {
        #[command(flatten)]
        batch: BatchArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Simulate and report the power-sharing outcome.
    Powershare {
        #[command(flatten)]
        batch: BatchArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("HIERCON_LOG")).init();
    let cli = Cli::parse();

    let (batch, runner): (&BatchArgs, commands::Runner) = match &cli.command {
        Command::Validate { batch } => (batch, Box::new(commands::validate)),
        Command::Spectrum {
            batch,
            out,
            c_invariance_trials,
            seed,
        } => {
            let out = out.clone();
            let trials = *c_invariance_trials;
            let seed = *seed;
            (
                batch,
                Box::new(move |path| commands::spectrum(path, out.as_deref(), trials, seed)),
            )
        }
        Command::Bounds { batch, out } => {
            let out = out.clone();
            (
                batch,
                Box::new(move |path| commands::bounds(path, out.as_deref())),
            )
        }
        Command::Simulate { batch, sim } => {
            let sim = sim.clone();
            (
                batch,
                Box::new(move |path| commands::simulate(path, &sim, false)),
            )
        }
        Command::Powershare { batch, sim } => {
            let sim = sim.clone();
            (
                batch,
                Box::new(move |path| commands::simulate(path, &sim, true)),
            )
        }
    };

    let code = commands::run_batch(&batch.paths, batch.jobs.max(1), &runner);
    ExitCode::from(code)
}
