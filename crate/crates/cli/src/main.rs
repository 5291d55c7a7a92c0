//! `gridrl`: train, evaluate, and analyse investment policies for the
//! two-region electricity-system environment.
//!
//! Exit codes: 0 success, 1 command-line usage, 2 configuration or scenario
//! problems, 3 failures during an otherwise valid run.

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use gridrl_cli::{baseline, evaluate, figures, sweep, train};

#[derive(Parser)]
#[command(
    name = "gridrl",
    version,
    about = "Reinforcement-learning harness for two-region electricity investment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent; writes metrics.csv, checkpoints, and a manifest.
    Train(train::TrainArgs),
    /// Roll out a checkpoint without exploration noise and summarise it.
    Evaluate(evaluate::EvaluateArgs),
    /// Train a grid of hidden-layer configurations and compare them.
    Sweep(sweep::SweepArgs),
    /// Run the simulator with no agent for a reference trace.
    Baseline(baseline::BaselineArgs),
    /// Re-shape run artifacts into per-figure CSV (and optional SVG) series.
    ExportFigures(figures::ExportFiguresArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Train(args) => train::cmd_train(args),
        Command::Evaluate(args) => evaluate::cmd_evaluate(args),
        Command::Sweep(args) => sweep::cmd_sweep(args),
        Command::Baseline(args) => baseline::cmd_baseline(args),
        Command::ExportFigures(args) => figures::cmd_export_figures(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
