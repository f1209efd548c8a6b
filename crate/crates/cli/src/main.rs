//! `hawkeye`: synthetic data generation, degradation pairing, training,
//! evaluation and ablations.

mod data;
mod eval;
mod flags;
mod run;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "hawkeye", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a synthetic labelled image set
    GenData(data::GenArgs),
    /// Build original/degraded pairs through the contrast filter
    Degrade(data::DegradeArgs),
    /// Train the policy on a paired set
    Train(run::TrainArgs),
    /// Score a labelled set with a checkpoint and report PLCC/SRCC
    Eval(eval::EvalArgs),
    /// Train every variant over several seeds and compare final windows
    Ablate(run::AblateArgs),
}

/// Caps the worker pool when `HAWKEYE_THREADS` is set.
fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("HAWKEYE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("HAWKEYE_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the worker pool")
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::GenData(a) => data::gen_data(&a),
        Command::Degrade(a) => data::degrade(&a),
        Command::Train(a) => run::cmd_train(&a),
        Command::Eval(a) => eval::cmd_eval(&a),
        Command::Ablate(a) => run::cmd_ablate(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
