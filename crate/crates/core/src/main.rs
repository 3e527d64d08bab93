use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use shs_core::config::{load_config, Experiment};
use shs_core::runner::{execute, exit, exit_code};
use shs_core::Error;

#[derive(Parser)]
#[command(name = "shs-lab", version, about = "SHS combustion and limit-problem laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Exit with code 3 when a diagnostic or verdict fails.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-ε simulation.
    SimulateShs(RunArgs),
    /// Limit (hysteresis) simulation.
    SimulateLimit(RunArgs),
    /// ε-sweep against the limit solution.
    Converge(RunArgs),
    /// Reaction ODE selection study.
    OdeSelect(RunArgs),
    /// Traveling-wave speed and burned plateau.
    Wave(RunArgs),
    /// Front-speed oscillations over periodic reactant.
    Pulsate(RunArgs),
    /// Unignited-region temperature under grid refinement.
    PeakProbe(RunArgs),
    /// Cold- and hot-side kinetics checks.
    ValidateAssumptions(RunArgs),
}

impl Command {
    fn split(self) -> (Experiment, RunArgs) {
        match self {
            Command::SimulateShs(a) => (Experiment::SimulateShs, a),
            Command::SimulateLimit(a) => (Experiment::SimulateLimit, a),
            Command::Converge(a) => (Experiment::Converge, a),
            Command::OdeSelect(a) => (Experiment::OdeSelect, a),
            Command::Wave(a) => (Experiment::Wave, a),
            Command::Pulsate(a) => (Experiment::Pulsate, a),
            Command::PeakProbe(a) => (Experiment::PeakProbe, a),
            Command::ValidateAssumptions(a) => (Experiment::ValidateAssumptions, a),
        }
    }
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let (experiment, args) = Cli::parse().command.split();
    let cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return code(exit::CONFIG);
        }
    };
    if cfg.experiment != experiment {
        eprintln!(
            "config error: experiment is \"{}\" but the subcommand is {}",
            cfg.experiment.name(),
            experiment.name()
        );
        return code(exit::CONFIG);
    }
    let result = execute(&cfg, &args.out);
    match &result {
        Ok(o) => {
            let failed: Vec<&str> =
                o.manifest.reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
            let verdict = match o.verdict {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "none",
            };
            println!(
                "{}: verdict {verdict}, {} reports, {} failed{}",
                experiment.name(),
                o.manifest.reports.len(),
                failed.len(),
                if failed.is_empty() { String::new() } else { format!(" ({})", failed.join(", ")) }
            );
            println!("artifacts in {}", args.out.display());
        }
        Err(Error::NumericalFailure { node, t, .. }) => {
            eprintln!("numerical failure at node {node}, t = {t}; partial series written");
        }
        Err(e) => eprintln!("{e}"),
    }
    code(exit_code(&result, args.strict))
}
