mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{thread_count, RunConfig};
use output::exit_code;

const USAGE_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "decay-lab",
    version,
    about = "Decay-rate verification for the linearised compressible flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML run configuration; defaults apply to anything not given.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides `output_dir` from the configuration.
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check eigenvalue, propagator and semigroup invariants.
    VerifyEigen(RunArgs),
    /// Besov norms of the configured witness over the time grid.
    BesovNorm(RunArgs),
    /// Decay series and verdicts for the configured witness and norms.
    DecaySweep(RunArgs),
    /// Half-space tables and t^-2 lower-bound plateaus.
    LowerBound(RunArgs),
    /// Exponential decay of high and mid-band dyadic blocks.
    Midband(RunArgs),
    /// Aggregate existing artifacts into report.md and report.json.
    Report(RunArgs),
    /// Print the full default configuration.
    PrintDefaults,
}

fn load(args: &RunArgs) -> Result<RunConfig, String> {
    let mut config = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &args.output_dir {
        config.output_dir = dir.clone();
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE_ERROR } else { 0 });
        }
    };
    let (args, run): (&RunArgs, fn(&RunConfig) -> anyhow::Result<output::Status>) =
        match &cli.command {
            Command::PrintDefaults => {
                print!("{}", RunConfig::default().to_toml());
                return ExitCode::SUCCESS;
            }
            Command::VerifyEigen(a) => (a, commands::verify_eigen),
            Command::BesovNorm(a) => (a, commands::besov_norm),
            Command::DecaySweep(a) => (a, commands::decay_sweep),
            Command::LowerBound(a) => (a, commands::lower_bound),
            Command::Midband(a) => (a, commands::midband),
            Command::Report(a) => (a, commands::report),
        };
    let config = match load(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE_ERROR);
        }
    };
    let threads = match thread_count(&config) {
        Ok(n) => n,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE_ERROR);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
    {
        eprintln!("error: cannot start worker pool: {e}");
        return ExitCode::from(USAGE_ERROR);
    }
    match run(&config) {
        Ok(status) => {
            println!("{}: {:?}", config.output_dir.display(), status);
            ExitCode::from(exit_code(status))
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}
