use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use slabsolve::config::ExperimentConfig;
use slabsolve::experiments::{self, EXPERIMENTS};
use slabsolve::Error;

/// Reproduce the worked examples: thresholds, iteration-scheme runs,
/// subsolution certification and slab exhaustion, with machine-readable
/// results and plot-ready data files.
#[derive(Parser)]
#[command(name = "slabsolve", version, about)]
struct Cli {
    /// Experiment to run (bratu-threshold, conformal, bratu-solve,
    /// sublinear-scaling, lane-emden, staircase, slab, verify)
    experiment: String,

    /// Flat key = value config file; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,

    /// Run schemes even when their hypothesis check fails
    #[arg(long)]
    force: bool,

    /// Output directory for the result record and plot data
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_REFUSED: u8 = 2;
const EXIT_CHECK_FAILED: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Config(_)
                | Error::Io(_)
                | Error::InvalidDomain(_)
                | Error::ResolutionTooCoarse { .. }
                | Error::Unsupported(_)
                | Error::ArgumentOutOfDomain { .. } => EXIT_CONFIG,
                Error::HypothesisNotSatisfied(_) => EXIT_REFUSED,
                _ => EXIT_CHECK_FAILED,
            };
            ExitCode::from(code)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    if !EXPERIMENTS.contains(&cli.experiment.as_str()) {
        return Err(Error::Config(format!(
            "unknown experiment `{}` (available: {})",
            cli.experiment,
            EXPERIMENTS.join(", ")
        )));
    }
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let config = ExperimentConfig::parse(&text)?;
            if config.experiment != cli.experiment {
                return Err(Error::Config(format!(
                    "config names experiment `{}` but `{}` was requested",
                    config.experiment, cli.experiment
                )));
            }
            config
        }
        None => ExperimentConfig::new(&cli.experiment),
    };
    if cli.force {
        config.set("force", true);
    }

    let started = Instant::now();
    let record = experiments::run(&config, &cli.out)?;
    // wall-clock chatter stays on the log stream so result files are
    // byte-stable for a fixed config
    eprintln!(
        "{}: finished in {:.2?} with {} workers",
        cli.experiment,
        started.elapsed(),
        experiments::worker_count()
    );

    let path = record.write(&cli.out)?;
    for check in &record.checks {
        println!(
            "{} {}: {}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    println!(
        "{}: {} ({} checks) -> {}",
        cli.experiment,
        if record.pass() { "pass" } else { "FAIL" },
        record.checks.len(),
        path.display()
    );
    Ok(record.pass())
}
