//! `sweep-gamma` and `sweep-tau`: final-loss tables over one hyperparameter,
//! with the momentum-free baseline alongside.
//!
//! Sweep points run in parallel; each point is internally deterministic, so
//! the assembled tables are byte-identical across invocations.

use std::path::Path;

use anyhow::{bail, Result};
use rayon::prelude::*;

use mfl_core::fed::{run_federated, Algorithm};
use mfl_core::Error;

use crate::config::{ConfigFile, Problem, SweepConfig};
use crate::output::{fmt_f64, CsvWriter};

/// Final loss of one run, or the iteration at which it left the finite
/// range.
enum PointOutcome {
    Finished(f64),
    Diverged(usize),
}

fn run_point(
    config: &ConfigFile,
    problem: &Problem,
    seed: u64,
    algorithm: Algorithm,
    gamma: f64,
    tau: usize,
) -> Result<PointOutcome> {
    let fed = super::fed_config(config, problem.model, seed, algorithm, gamma, tau);
    match run_federated(&fed, &problem.partition, None) {
        Ok(result) => Ok(PointOutcome::Finished(result.final_loss())),
        Err(Error::Divergence { iteration }) => Ok(PointOutcome::Diverged(iteration)),
        Err(other) => Err(other.into()),
    }
}

fn outcome_fields(outcome: &PointOutcome) -> (String, &'static str) {
    match outcome {
        PointOutcome::Finished(loss) => (fmt_f64(*loss), "false"),
        PointOutcome::Diverged(_) => (String::new(), "true"),
    }
}

pub fn execute_gamma(
    config: &ConfigFile,
    problem: &Problem,
    seed: u64,
    out_dir: &Path,
) -> Result<()> {
    let gammas = match &config.sweep {
        Some(SweepConfig::Gamma(values)) => values.clone(),
        _ => bail!("sweep-gamma needs a config with sweep = {{\"gamma\": [...]}}"),
    };

    let points: Vec<(f64, PointOutcome)> = gammas
        .par_iter()
        .map(|&gamma| {
            run_point(config, problem, seed, Algorithm::Mfl, gamma, config.tau)
                .map(|outcome| (gamma, outcome))
        })
        .collect::<Result<_>>()?;
    let baseline = run_point(
        config,
        problem,
        seed,
        Algorithm::Fl,
        config.gamma,
        config.tau,
    )?;

    let mut csv = CsvWriter::new(&["algorithm", "gamma", "final_loss", "diverged"]);
    for (gamma, outcome) in &points {
        let (loss, diverged) = outcome_fields(outcome);
        csv.row(&[
            "mfl".to_string(),
            fmt_f64(*gamma),
            loss,
            diverged.to_string(),
        ]);
    }
    let (loss, diverged) = outcome_fields(&baseline);
    csv.row(&["fl".to_string(), String::new(), loss, diverged.to_string()]);

    let path = out_dir.join("sweep_gamma.csv");
    csv.write_to(&path)?;
    println!("sweep-gamma: wrote {} ({} points)", path.display(), points.len());
    for (gamma, outcome) in &points {
        match outcome {
            PointOutcome::Finished(loss) => println!("  gamma {gamma}: final loss {loss}"),
            PointOutcome::Diverged(iter) => {
                println!("  gamma {gamma}: diverged at iteration {iter}")
            }
        }
    }
    Ok(())
}

pub fn execute_tau(config: &ConfigFile, problem: &Problem, seed: u64, out_dir: &Path) -> Result<()> {
    let taus = match &config.sweep {
        Some(SweepConfig::Tau(values)) => values.clone(),
        _ => bail!("sweep-tau needs a config with sweep = {{\"tau\": [...]}}"),
    };

    let points: Vec<(usize, PointOutcome, PointOutcome)> = taus
        .par_iter()
        .map(|&tau| {
            let mfl = run_point(config, problem, seed, Algorithm::Mfl, config.gamma, tau)?;
            let fl = run_point(config, problem, seed, Algorithm::Fl, config.gamma, tau)?;
            Ok((tau, mfl, fl))
        })
        .collect::<Result<_>>()?;

    let mut csv = CsvWriter::new(&["algorithm", "tau", "final_loss", "diverged"]);
    for (tau, mfl, _) in &points {
        let (loss, diverged) = outcome_fields(mfl);
        csv.row(&["mfl".to_string(), tau.to_string(), loss, diverged.to_string()]);
    }
    for (tau, _, fl) in &points {
        let (loss, diverged) = outcome_fields(fl);
        csv.row(&["fl".to_string(), tau.to_string(), loss, diverged.to_string()]);
    }

    let path = out_dir.join("sweep_tau.csv");
    csv.write_to(&path)?;
    println!("sweep-tau: wrote {} ({} points)", path.display(), points.len());
    Ok(())
}
