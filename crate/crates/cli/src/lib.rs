//! Command-line driver: data ingestion, configuration and file outputs for
//! the `pareto-welfare` library.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use commands::{bound, fairness, frontier, learn, simulate};
pub use error::{CliError, Result};

/// Environment variable holding the default number of worker threads.
pub const THREADS_ENV: &str = "PARETO_WELFARE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "pareto-welfare", version, about = "Pareto-optimal profit/welfare selection policies")]
pub struct Cli {
    /// JSON file whose keys mirror the subcommand's flags; flags win
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo frontier trials on correlated Gaussian scores
    Simulate(simulate::SimulateArgs),
    /// Frontier estimation from a CSV of precomputed scores
    Frontier(frontier::FrontierArgs),
    /// Ridge score learning on abalone-schema data
    Learn(learn::LearnArgs),
    /// Demographic-parity constrained selection and induced welfare
    Fairness(fairness::FairnessArgs),
    /// Closed-form plug-in lower bound table
    Bound(bound::BoundArgs),
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let path = cli.config.as_deref();
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.resolve(config::load(path)?)?;
            let summary = simulate::run(&cfg)?;
            log::info!(
                "simulate: {} trials, {} bound violations, outputs in {}",
                summary.trials,
                summary.l1_bound_violations,
                cfg.out.display()
            );
        }
        Command::Frontier(args) => {
            let cfg = args.resolve(config::load(path)?)?;
            frontier::run(&cfg)?;
            log::info!("frontier: outputs in {}", cfg.out.display());
        }
        Command::Learn(args) => {
            let cfg = args.resolve(config::load(path)?)?;
            let summary = learn::run(&cfg)?;
            log::info!(
                "learn: profit MAE {}, welfare MAE {}, outputs in {}",
                summary.mae.profit_mae,
                summary.mae.welfare_mae,
                cfg.out.display()
            );
        }
        Command::Fairness(args) => {
            let cfg = args.resolve(config::load(path)?)?;
            let report = fairness::run(&cfg)?;
            log::info!(
                "fairness: {} interior mismatches, outputs in {}",
                report.total_interior_mismatches,
                cfg.out.display()
            );
        }
        Command::Bound(args) => {
            let cfg = args.resolve(config::load(path)?)?;
            bound::run(&cfg)?;
            log::info!("bound: outputs in {}", cfg.out.display());
        }
    }
    Ok(())
}
