use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use memwave::runner::{emit_report, load_manifest, run_subcommand, Subcommand};

#[derive(Parser)]
#[command(name = "memwave", about = "Damped wave equation with nonlinear memory: runs and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Integrate one scenario and write its time series.
    Simulate(Common),
    /// Classify the scenario's (n, gamma, p) against the known existence and blow-up results.
    Classify(Common),
    /// Run the Cartesian product of the sweep axes.
    Sweep(Common),
    /// Run the numerical identity and inequality suites.
    Verify(Common),
    /// Tabulate critical exponents over a gamma grid.
    Exponents(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Keep every time step in the time-series CSV.
    #[arg(long)]
    full_resolution: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (subcommand, common) = match cli.command {
        Command::Simulate(c) => (Subcommand::Simulate, c),
        Command::Classify(c) => (Subcommand::Classify, c),
        Command::Sweep(c) => (Subcommand::Sweep, c),
        Command::Verify(c) => (Subcommand::Verify, c),
        Command::Exponents(c) => (Subcommand::Exponents, c),
    };
    let manifest = match &common.config {
        Some(path) => match load_manifest(path, subcommand) {
            Ok(mut m) => {
                m.workers = common.workers;
                m.full_resolution = common.full_resolution;
                Some(m)
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => None,
    };
    let out = common
        .out
        .clone()
        .or_else(|| manifest.as_ref().map(|m| m.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(memwave::runner::DEFAULT_OUTPUT_DIR));
    let report = match run_subcommand(subcommand, manifest.as_ref()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit_report(&report, &out) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    print!("{}", report.text);
    if report.failures > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
