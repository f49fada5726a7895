use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::CliError;

/// Batch experiments on two-locus weak-selection dynamics.
#[derive(Debug, Parser)]
#[command(name = "weaksel", version)]
struct Cli {
    /// JSON config for the subcommand; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config's `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one trajectory and write it as CSV plus metadata.
    Simulate,
    /// Check the one-step genotype/multiplicative-update identity on random cases.
    Equivalence,
    /// Check the regret bound on freshly simulated trajectories.
    Regret,
    /// Run the sign-flipping search on one matrix or a random batch.
    Flip,
    /// Monte Carlo estimates of equilibrium and positive-solution probabilities.
    Prob,
    /// Enumerate k x k support equilibria with certificates.
    Count,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    let cfg = cli.config.as_deref();
    match cli.command {
        Command::Simulate => commands::simulate::run(config::load(cfg, cli.seed)?, &cli.out),
        Command::Equivalence => commands::equivalence::run(config::load(cfg, cli.seed)?, &cli.out),
        Command::Regret => commands::regret::run(config::load(cfg, cli.seed)?, &cli.out),
        Command::Flip => commands::flip::run(config::load(cfg, cli.seed)?, &cli.out),
        Command::Prob => commands::prob::run(config::load(cfg, cli.seed)?, &cli.out),
        Command::Count => commands::count::run(config::load(cfg, cli.seed)?, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
