mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Truck-and-drone delivery routing: solve, check and benchmark plans.
#[derive(Debug, Parser)]
#[command(name = "fstsp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve an instance and write the plan and a CSV run report.
    Solve(SolveArgs),
    /// Check a plan against an instance and print its timeline.
    Eval(EvalArgs),
    /// Write the mixed-integer model as an LP file.
    ExportLp(ExportLpArgs),
    /// Generate a random instance.
    Gen(GenArgs),
    /// Time-to-target benchmark of GA presets over a directory of instances.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    Hgenfs,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "hgenfs")]
    method: Method,
    /// GA preset, case1 to case6.
    #[arg(long, default_value = "case2")]
    preset: String,
    /// Seconds.
    #[arg(long, default_value_t = 30.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Stop the GA once this cost is reached.
    #[arg(long)]
    target: Option<f64>,
    /// Solution file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append the run report to this CSV file instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the GA best-cost history as CSV.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solution: PathBuf,
}

#[derive(Debug, Args)]
struct ExportLpArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 10)]
    customers: usize,
    /// Square kilometres.
    #[arg(long, default_value_t = 13.0)]
    area: f64,
    /// Fraction of customers the drone may serve.
    #[arg(long, default_value_t = 0.85)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Drone endurance in minutes.
    #[arg(long, default_value_t = 20.0)]
    endurance: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory of instance files (*.json).
    #[arg(long)]
    instances: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "case1,case2,case3,case4,case5,case6")]
    presets: Vec<String>,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 30.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV of known optima (instance,optimum). Missing entries are solved
    /// exactly.
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Per-run CSV.
    #[arg(long)]
    out: PathBuf,
    /// Summary table CSV; printed to stdout when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(commands::EXIT_USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Eval(a) => commands::eval(a),
        Command::ExportLp(a) => commands::export_lp(a),
        Command::Gen(a) => commands::generate(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
