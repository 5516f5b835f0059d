//! Command-line front end for the mechanism laboratory. Each scenario
//! subcommand loads a JSON scenario file, runs the task it declares, and
//! writes deterministic reports; `repro-all` re-derives the headline
//! numbers without a scenario file. Exit codes: 0 all rows pass, 1 bad
//! input, 2 at least one audit violation or failed bound.

mod reports;
mod runner;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::runner::Overrides;
use crate::scenario::Task;

#[derive(Parser)]
#[command(name = "mechlab", version, about = "candidate-constrained location mechanisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario description (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for the JSON and CSV reports.
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    /// Random seed; beats the scenario's own seed field.
    #[arg(long)]
    seed: Option<u64>,
    /// Misreport grid step for audits.
    #[arg(long)]
    grid_step: Option<f64>,
    /// Random samples for searches; 0 skips the search.
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Args)]
struct ReproArgs {
    /// Random samples per search row; 0 marks those rows skipped.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the table as CSV into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Misreport grid step for the truthfulness rows.
    #[arg(long)]
    grid_step: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Worst-case approximation ratios of mechanisms on instances.
    Eval(ScenarioArgs),
    /// Unilateral (and optionally coalition) truthfulness audits.
    Audit(ScenarioArgs),
    /// Round-trip checks between input formats.
    Reduce(ScenarioArgs),
    /// Adversarial constructions with stored, replayable audits.
    Lowerbound(ScenarioArgs),
    /// Randomized search for high-ratio instances.
    Search(ScenarioArgs),
    /// Collapse an instance to its three-block form, tracing each step.
    Compress(ScenarioArgs),
    /// Re-derive every headline number and print a pass/fail table.
    ReproAll(ReproArgs),
}

fn run() -> anyhow::Result<u8> {
    let cli = Cli::parse();
    let scenario_task = |task: Task, args: &ScenarioArgs| -> anyhow::Result<u8> {
        let ov = Overrides { seed: args.seed, grid_step: args.grid_step, samples: args.samples };
        runner::run_scenario(task, &args.scenario, &args.out, &ov)
    };
    match &cli.command {
        Command::Eval(args) => scenario_task(Task::Eval, args),
        Command::Audit(args) => scenario_task(Task::Audit, args),
        Command::Reduce(args) => scenario_task(Task::Reduce, args),
        Command::Lowerbound(args) => scenario_task(Task::Lowerbound, args),
        Command::Search(args) => scenario_task(Task::Search, args),
        Command::Compress(args) => scenario_task(Task::Compress, args),
        Command::ReproAll(args) => runner::repro_all(
            args.samples,
            args.seed,
            args.grid_step.unwrap_or(0.01),
            args.out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
