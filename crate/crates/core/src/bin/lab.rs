//! Command-line front end for the experiment runners: parses a plain-text
//! config, runs the selected experiment, writes `report.json` plus one CSV
//! per observable, and exits nonzero unless every verdict passed.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use torus2micro::experiments::report::Report;
use torus2micro::experiments::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "lab", about = "numerical laboratory for averaged observables on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// List the observable presets understood by the runners and exit.
    #[arg(long)]
    list_observables: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Machine-precision operator identities over randomized inputs.
    Identities(RunArgs),
    /// Three time-scale windows of averaged observables on a ħ-ladder.
    Regimes(RunArgs),
    /// Escape of the internal frequency to infinity.
    Infinity(RunArgs),
    /// Concentration of near-eigenstates on critical closed geodesics.
    Quasimode(RunArgs),
    /// Projected invariant measures: caustics and tube-mass refinement.
    Projection(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Plain-text `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for `report.json` and the CSV files.
    #[arg(long)]
    out: PathBuf,
}

fn run(cmd: &Command) -> torus2micro::Result<Report> {
    let (args, runner): (&RunArgs, fn(&ExperimentConfig) -> torus2micro::Result<Report>) =
        match cmd {
            Command::Identities(a) => (a, experiments::run_identities),
            Command::Regimes(a) => (a, experiments::run_regimes),
            Command::Infinity(a) => (a, experiments::run_infinity),
            Command::Quasimode(a) => (a, experiments::run_quasimode),
            Command::Projection(a) => (a, experiments::run_projection),
        };
    let text = std::fs::read_to_string(&args.config)?;
    let cfg = ExperimentConfig::parse(&text)?;
    let report = runner(&cfg)?;
    report.write(&args.out)?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_observables {
        for (name, description) in experiments::observable_presets() {
            println!("{name}\t{description}");
        }
        return ExitCode::SUCCESS;
    }
    let Some(cmd) = cli.command else {
        eprintln!("error: expected a subcommand or --list-observables (see --help)");
        return ExitCode::from(2);
    };
    match run(&cmd) {
        Ok(report) => {
            for v in &report.verdicts {
                let tag = if v.passed { "pass" } else { "FAIL" };
                println!("[{tag}] {}: {}", v.name, v.detail);
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
