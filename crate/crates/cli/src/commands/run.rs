//! `run`: simulate the configured algorithms and emit one trace.csv.

use std::path::Path;

use anyhow::Result;

use mfl_core::fed::{run_federated, Algorithm};
use mfl_core::optim::run_centralized;
use mfl_core::trace::RunTrace;

use crate::config::{AlgorithmName, ConfigFile, Problem};
use crate::output::{fmt_f64, fmt_opt, CsvWriter};

const DEFAULT_ALGORITHMS: [AlgorithmName; 3] =
    [AlgorithmName::Mfl, AlgorithmName::Fl, AlgorithmName::Mgd];

pub fn execute(config: &ConfigFile, problem: &Problem, seed: u64, out_dir: &Path) -> Result<()> {
    let algorithms = config
        .algorithms
        .clone()
        .unwrap_or_else(|| DEFAULT_ALGORITHMS.to_vec());

    let mut traces: Vec<(&'static str, RunTrace)> = Vec::new();
    for name in &algorithms {
        let trace = simulate(*name, config, problem, seed)?;
        traces.push((name.label(), trace));
    }

    let mut csv = CsvWriter::new(&["t", "algorithm", "loss", "accuracy"]);
    for (label, trace) in &traces {
        for point in &trace.points {
            csv.row(&[
                point.iteration.to_string(),
                (*label).to_string(),
                fmt_f64(point.loss),
                fmt_opt(point.accuracy),
            ]);
        }
    }
    let path = out_dir.join("trace.csv");
    csv.write_to(&path)?;

    println!("run: wrote {}", path.display());
    for (label, trace) in &traces {
        let loss = trace.final_loss().unwrap_or(f64::NAN);
        match trace.final_accuracy() {
            Some(acc) => println!("  {label:>4} final loss {loss} accuracy {acc}"),
            None => println!("  {label:>4} final loss {loss}"),
        }
    }
    Ok(())
}

pub(crate) fn simulate(
    name: AlgorithmName,
    config: &ConfigFile,
    problem: &Problem,
    seed: u64,
) -> Result<RunTrace> {
    let test_set = problem.accuracy_test_set();
    match name {
        AlgorithmName::Mfl | AlgorithmName::Fl => {
            let algorithm = if name == AlgorithmName::Mfl {
                Algorithm::Mfl
            } else {
                Algorithm::Fl
            };
            let fed = super::fed_config(
                config,
                problem.model,
                seed,
                algorithm,
                config.gamma,
                config.tau,
            );
            Ok(run_federated(&fed, &problem.partition, test_set)?.trace)
        }
        AlgorithmName::Mgd => {
            let data = problem.partition.flatten();
            let fed = super::fed_config(
                config,
                problem.model,
                seed,
                Algorithm::Mfl,
                config.gamma,
                config.tau,
            );
            let w0 = fed.initial_w(problem.partition.dim());
            let run = run_centralized(
                &problem.model,
                &data,
                config.eta,
                config.gamma,
                config.total_iters,
                w0,
                test_set,
            )?;
            Ok(run.trace)
        }
    }
}
