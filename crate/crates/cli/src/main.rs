use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use festcircuit::ingest::Period;
use festcircuit_cli::{run, validate, Analysis, Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "festcircuit",
    version,
    about = "Film festival circuit analytics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root for relative dataset paths [default: $FESTCIRCUIT_DATA_DIR, else the config file's directory]
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,

    /// Event-year range, e.g. 2012-2021
    #[arg(long, global = true)]
    period: Option<Period>,

    /// Bootstrap seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Bootstrap repeats per scenario
    #[arg(long, global = true)]
    repeats: Option<usize>,

    /// ISO alpha-3 code of the distance reference country
    #[arg(long, global = true)]
    reference_country: Option<String>,

    /// Directory for analysis outputs and the run manifest
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads for parallel stages
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check inputs and print dataset counts
    Validate,
    /// Population and GDP per capita balance reports
    Balance,
    /// Regression of appearance counts on socioeconomic covariates
    Fit,
    /// Producer-to-host flow matrix, trade balances, star networks
    Flows,
    /// Threshold sweep of bootstrap diversity estimates
    Diversity,
    /// Every analysis
    All,
}

fn execute(cli: Cli) -> Result<()> {
    let overrides = Overrides {
        data_dir: cli.data_dir,
        period: cli.period,
        seed: cli.seed,
        repeats: cli.repeats,
        reference_country: cli.reference_country,
        out_dir: cli.out_dir,
        workers: cli.workers,
    };
    let config = RunConfig::load(cli.config.as_deref(), &overrides)?;
    let analysis = match cli.command {
        Command::Validate => {
            let report = validate(&config)?;
            writeln!(
                std::io::stdout().lock(),
                "{}",
                serde_json::to_string_pretty(&report)?
            )?;
            return Ok(());
        }
        Command::Balance => Analysis::Balance,
        Command::Fit => Analysis::Fit,
        Command::Flows => Analysis::Flows,
        Command::Diversity => Analysis::Diversity,
        Command::All => Analysis::All,
    };
    let outcome = run(&config, analysis)?;
    let mut stdout = std::io::stdout().lock();
    for name in &outcome.outputs {
        writeln!(stdout, "{}", outcome.out_dir.join(name).display())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// A closed stdout (e.g. piped into `head`) is not a failure.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.downcast_ref::<std::io::Error>()
        .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}
