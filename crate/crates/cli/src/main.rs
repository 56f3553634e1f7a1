//! `ics`: runs one named experiment and writes `<out>/<experiment>.csv` and
//! `<out>/<experiment>.json`.
//!
//! Exit status: 0 when every asserted bound holds, 1 on a bound violation,
//! 2 on a config error, 3 on a resource or convergence failure.

mod config;
mod experiments;
mod sample;

use std::fs;
use std::io;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Experiment, Flags};
use experiments::Failure;

#[derive(Parser)]
#[command(name = "ics", version, about = "Transfer-operator and Wasserstein contraction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in `--config`.
    Run(Flags),
    /// Contraction constants N, t, C, λ from θ, diam and Lip(A).
    Constants(Flags),
    /// W₁ between dual iterates of two Diracs against C·λⁿ·d(x,y).
    Contract(Flags),
    /// Gibbs measure as the fixed point of the dual operator.
    Gibbs(Flags),
    /// Lipschitz-norm decay of ℙⁿ applied to a centered observable.
    SpectralGap(Flags),
    /// Gibbs-measure and entropy stability under cosine tilts of the potential.
    StabilityPotential(Flags),
    /// Maximal-entropy measure stability under perturbations of a circle map.
    StabilityMap(Flags),
    /// Flow solver against closed forms and duality on random measures.
    OtSelftest(Flags),
}

const BOUND_VIOLATION: u8 = 1;
const CONFIG_ERROR: u8 = 2;
const RESOURCE_ERROR: u8 = 3;

/// Writes through a temporary file so readers never see a partial result.
fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn main() -> ExitCode {
    let (experiment, flags) = match Cli::parse().command {
        Command::Run(f) => (None, f),
        Command::Constants(f) => (Some(Experiment::Constants), f),
        Command::Contract(f) => (Some(Experiment::Contract), f),
        Command::Gibbs(f) => (Some(Experiment::Gibbs), f),
        Command::SpectralGap(f) => (Some(Experiment::SpectralGap), f),
        Command::StabilityPotential(f) => (Some(Experiment::StabilityPotential), f),
        Command::StabilityMap(f) => (Some(Experiment::StabilityMap), f),
        Command::OtSelftest(f) => (Some(Experiment::OtSelftest), f),
    };
    let job = match config::merge(experiment, flags).and_then(config::validate) {
        Ok(job) => job,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let outcome = match experiments::run(&job) {
        Ok(o) => o,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(CONFIG_ERROR);
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(RESOURCE_ERROR);
        }
    };
    let name = job.experiment.name();
    let csv = job.out.join(format!("{name}.csv"));
    let summary = job.out.join(format!("{name}.json"));
    let mut json = serde_json::to_string_pretty(&outcome.summary).expect("summary serializes");
    json.push('\n');
    let written = fs::create_dir_all(&job.out)
        .and_then(|_| write_atomic(&csv, &outcome.csv))
        .and_then(|_| write_atomic(&summary, json.as_bytes()));
    if let Err(e) = written {
        eprintln!("error: cannot write to {}: {e}", job.out.display());
        return ExitCode::from(RESOURCE_ERROR);
    }
    println!("{}\n{}", csv.display(), summary.display());
    match outcome.violation {
        Some(row) => {
            eprintln!("bound violated: {row}");
            ExitCode::from(BOUND_VIOLATION)
        }
        None => ExitCode::SUCCESS,
    }
}
