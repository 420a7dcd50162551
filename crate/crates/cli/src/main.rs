//! `sparsepoly`: convergence and stability studies from a TOML config.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::StudyConfig;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "sparsepoly", version, about = "Sparse polynomial approximation studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Study configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory. Results go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the data-parallel loops.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overrides the target-evaluation budget.
    #[arg(long, global = true)]
    budget_evals: Option<usize>,

    /// Adds a wall-clock `seconds` column to convergence tables.
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// A-priori index sets for each n.
    BuildSet,
    /// Sparse interpolation on a-priori sets.
    Interpolate,
    /// Least squares on a-priori sets.
    Lsq,
    /// Adaptive interpolation or least squares.
    Adapt,
    /// Empirical Gram-matrix failure probabilities.
    Phase,
    /// Adaptive piecewise-linear interpolation.
    Pl,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::BuildSet => "build-set",
            Command::Interpolate => "interpolate",
            Command::Lsq => "lsq",
            Command::Adapt => "adapt",
            Command::Phase => "phase",
            Command::Pl => "pl",
        }
    }
}

fn load(cli: &Cli) -> Result<StudyConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut config = StudyConfig::from_toml(&text)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(b) = cli.budget_evals {
        config.budget.evaluations = b;
    }
    config.validate()?;
    Ok(config)
}

fn set_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(t) = threads else { return Ok(()) };
    if t == 0 {
        return Err(CliError::Config("--threads must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(t)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    if t != 1 {
        eprintln!("warning: built without the parallel feature; running on one thread");
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    set_threads(cli.threads)?;
    let config = load(cli)?;
    let outputs = match cli.command {
        Command::BuildSet => commands::build_set(&config)?,
        Command::Interpolate => commands::interpolate(&config, cli.timings)?,
        Command::Lsq => commands::lsq(&config, cli.timings)?,
        Command::Adapt => commands::adapt(&config, cli.timings)?,
        Command::Phase => commands::phase(&config)?,
        Command::Pl => commands::pl(&config, cli.timings)?,
    };
    match &cli.out {
        Some(dir) => {
            for (name, text) in &outputs.files {
                output::emit(Some(dir), name, text)?;
            }
        }
        // only the primary table goes to stdout
        None => output::emit(None, "", &outputs.files[0].1)?,
    }
    for line in &outputs.summary {
        eprintln!("{}: {line}", cli.command.name());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sparsepoly {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
