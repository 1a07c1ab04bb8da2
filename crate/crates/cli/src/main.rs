//! `mflsim`: experiment harness for the momentum federated learning
//! simulator.
//!
//! Exit codes: 0 success, 1 verified bound violations (`verify-gap`), 2
//! configuration or validation errors, 3 divergence (non-finite loss,
//! message names the iteration).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{ConfigFile, Problem};
use output::ensure_out_dir;

#[derive(Parser)]
#[command(
    name = "mflsim",
    about = "Simulate momentum federated learning and validate its convergence bounds",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured algorithms and write trace.csv.
    Run(CommonArgs),
    /// Final-loss table over the configured gamma grid (plus FL baseline).
    SweepGamma(CommonArgs),
    /// Final-loss table over the configured tau grid (MFL and FL).
    SweepTau(CommonArgs),
    /// Evaluate the closed-form convergence bounds.
    Bounds(BoundsArgs),
    /// Probe-based estimates of the regularity constants.
    Estimate(CommonArgs),
    /// Check the measured federation gap against its envelope (synthetic
    /// data only).
    VerifyGap(CommonArgs),
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Use probe-based constants even when exact ones are available.
    #[arg(long)]
    estimate: bool,
}

struct Prepared {
    config: ConfigFile,
    problem: Problem,
    seed: u64,
    out_dir: PathBuf,
}

fn prepare(args: &CommonArgs) -> Result<Prepared> {
    let config = ConfigFile::load(&args.config)?;
    let seed = args.seed.unwrap_or(config.seed);
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let out_dir = ensure_out_dir(&out_dir)?;
    let problem = Problem::build(&config, seed)?;
    Ok(Prepared {
        config,
        problem,
        seed,
        out_dir,
    })
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(args) => {
            let p = prepare(&args)?;
            commands::run::execute(&p.config, &p.problem, p.seed, &p.out_dir)?;
            Ok(0)
        }
        Command::SweepGamma(args) => {
            let p = prepare(&args)?;
            commands::sweep::execute_gamma(&p.config, &p.problem, p.seed, &p.out_dir)?;
            Ok(0)
        }
        Command::SweepTau(args) => {
            let p = prepare(&args)?;
            commands::sweep::execute_tau(&p.config, &p.problem, p.seed, &p.out_dir)?;
            Ok(0)
        }
        Command::Bounds(args) => {
            let p = prepare(&args.common)?;
            commands::bounds::execute(&p.config, &p.problem, p.seed, &p.out_dir, args.estimate)?;
            Ok(0)
        }
        Command::Estimate(args) => {
            let p = prepare(&args)?;
            commands::estimate::execute(&p.config, &p.problem, p.seed, &p.out_dir)?;
            Ok(0)
        }
        Command::VerifyGap(args) => {
            let p = prepare(&args)?;
            commands::verify_gap::execute(&p.config, &p.problem, p.seed, &p.out_dir)
        }
    }
}

/// Divergence gets its own exit code so sweeps and scripts can tell it from
/// configuration mistakes.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(mfl_core::Error::Divergence { .. }) = cause.downcast_ref::<mfl_core::Error>() {
            return 3;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}
