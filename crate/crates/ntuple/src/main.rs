use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use ntuple::commands::{self, Common, Outcome, SolveArgs};
use ntuple::error::{exit, CliError};

/// Solve and verify n-tupled fixed-point and coincidence-point problems.
#[derive(Debug, Parser)]
#[command(name = "ntuple", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Leave wall-clock timings out of the report.
    #[arg(long, global = true)]
    no_timings: bool,
    /// Seed for all sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of samples per sampled check.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Worker threads for sampling and enumeration.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a star operation and whether it is permuted.
    Star {
        #[arg(long, required_unless_present = "file", conflicts_with = "file")]
        preset: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        /// Matrix file: `n`, then `n` rows of 1-based entries.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Run the hypothesis checks of a problem config.
    Check { config: PathBuf },
    /// Run the checks, then iterate to a coincidence point.
    Solve {
        config: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Iterate even when a hypothesis fails.
        #[arg(long)]
        force: bool,
        /// Random starts for the uniqueness probe.
        #[arg(long)]
        probe: Option<usize>,
    },
    /// List all coincidence and common fixed points of a finite problem.
    Enumerate {
        config: PathBuf,
        /// Largest number of tuples to visit.
        #[arg(long)]
        bound: Option<u64>,
    },
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let common = Common {
        seed: cli.seed,
        samples: cli.samples,
        jobs: cli.jobs.map(|j| j as usize),
        no_timings: cli.no_timings,
    };
    let outcome = match &cli.command {
        Command::Star { preset, n, file } => commands::star(preset.as_deref(), *n, file.as_deref(), &common)?,
        Command::Check { config } => commands::check(config, &common)?,
        Command::Solve {
            config,
            tol,
            max_iter,
            force,
            probe,
        } => commands::solve(
            config,
            &common,
            &SolveArgs {
                tol: *tol,
                max_iter: *max_iter,
                force: *force,
                probe: *probe,
            },
        )?,
        Command::Enumerate { config, bound } => commands::enumerate(config, &common, *bound)?,
    };
    if let Some(path) = &cli.report {
        std::fs::write(path, outcome.report_text()).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(exit::USAGE),
            };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            ExitCode::from(outcome.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
