//! Batch front-end for near-optimal, outlier-free subsampling of tall
//! regression datasets.

mod common;
mod error;
mod evaluate;
mod ingest;
mod manifest;
mod simulate;
mod subsample;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "odsample",
    version,
    about = "Select near D-/I-optimal subsamples from tall regression datasets, keeping \
             high-leverage points and response outliers out"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select n rows from a CSV pool.
    Subsample(subsample::SubsampleArgs),
    /// Generate built-in scenarios; the study scenario runs the full
    /// five-strategy comparison.
    Simulate(simulate::SimulateArgs),
    /// Score an existing sample file against a pool.
    Evaluate(evaluate::EvaluateArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Subsample(args) => subsample::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Evaluate(args) => evaluate::run(args),
    };
    if let Err(e) = outcome {
        eprintln!("error[{}]: {e}", e.code_name());
        std::process::exit(e.exit_code());
    }
}
