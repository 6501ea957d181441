//! Command-line driver for the preferential-attachment models: growth
//! simulation, analytic degree laws, simulation-vs-theory comparison, and
//! tail-exponent studies.
//!
//! Exit status: 0 on success, 1 when a configured tolerance is violated,
//! 2 on usage or validation errors.

mod commands;
mod config;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

#[derive(Parser)]
#[command(
    name = "dpa",
    version,
    about = "Preferential-attachment growth models: simulate graphs, evaluate the \
             limiting in/out-degree law three ways, and validate one against the other"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Grow a random graph and write degree data
    Simulate(commands::simulate::SimulateArgs),
    /// Evaluate the limiting joint degree distribution
    Analytic(commands::analytic::AnalyticArgs),
    /// Grow a graph and compare it against the analytic law
    Compare(commands::compare::CompareArgs),
    /// Tail exponents along rays and the maximizing ray
    Tail(commands::tail::TailArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Analytic(args) => commands::analytic::run(args),
        Command::Compare(args) => commands::compare::run(args),
        Command::Tail(args) => commands::tail::run(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
