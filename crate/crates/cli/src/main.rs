use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use schulze_cli::bench::{run_bench, BenchArgs};
use schulze_cli::generate::{run_generate, GenerateArgs};
use schulze_cli::winners::{run_winners, WinnersArgs};
use schulze_cli::CliError;

/// Schulze winners on weighted tournament graphs.
#[derive(Debug, Parser)]
#[command(name = "schulze", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute winners of a profile, tournament or chart file.
    Winners(WinnersArgs),
    /// Write a synthetic instance and its metadata sidecar.
    Generate(GenerateArgs),
    /// Time the parallel engine over a grid of sizes, densities and thread counts.
    Bench(BenchArgs),
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Winners(args) => run_winners(args).and_then(|r| print_json(&r)),
        Command::Generate(args) => run_generate(args).and_then(|r| print_json(&r)),
        Command::Bench(args) => run_bench(args).and_then(|r| print_json(&r)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
