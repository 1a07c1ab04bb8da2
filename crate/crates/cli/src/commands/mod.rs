pub mod bounds;
pub mod estimate;
pub mod run;
pub mod sweep;
pub mod verify_gap;

use anyhow::Result;

use mfl_core::fed::{run_federated, Algorithm, FedConfig, FedResult};
use mfl_core::models::{self, ModelSpec};
use mfl_core::optim::{run_interval_reference, IntervalTrace};

use crate::config::{ConfigFile, Problem};

pub(crate) fn fed_config(
    config: &ConfigFile,
    model: ModelSpec,
    seed: u64,
    algorithm: Algorithm,
    gamma: f64,
    tau: usize,
) -> FedConfig {
    FedConfig {
        eta: config.eta,
        gamma,
        tau,
        total_iters: config.total_iters,
        nodes: config.nodes,
        model,
        seed,
        algorithm,
        init: config.init.to_kind(),
    }
}

pub(crate) struct MflWithReferences {
    pub result: FedResult,
    pub references: Vec<IntervalTrace>,
    pub config: FedConfig,
}

/// Runs the momentum federated schedule and rebuilds the centralized
/// reference trajectory of every interval.
pub(crate) fn mfl_with_references(
    config: &ConfigFile,
    problem: &Problem,
    seed: u64,
) -> Result<MflWithReferences> {
    let fed = fed_config(
        config,
        problem.model,
        seed,
        Algorithm::Mfl,
        config.gamma,
        config.tau,
    );
    let result = run_federated(&fed, &problem.partition, problem.accuracy_test_set())?;
    let references = run_interval_reference(
        &problem.model,
        &problem.partition,
        &result.aggregate_snapshots,
        fed.eta,
        fed.gamma,
        fed.tau,
    )?;
    Ok(MflWithReferences {
        result,
        references,
        config: fed,
    })
}

/// Largest global gradient norm seen anywhere on the federated trajectory or
/// the interval references. For the synthetic least-squares problem the
/// gradient norm is convex in the parameter, so this maximum is a valid
/// Lipschitz constant for every segment the gap bound compares.
pub(crate) fn trajectory_rho(problem: &Problem, run: &MflWithReferences) -> Result<f64> {
    let mut rho: f64 = 0.0;
    for w in &run.result.params_per_iter {
        rho = rho.max(models::global_gradient(&problem.model, &problem.partition, w)?.norm());
    }
    for trace in &run.references {
        for w in &trace.w {
            rho = rho.max(models::global_gradient(&problem.model, &problem.partition, w)?.norm());
        }
    }
    Ok(rho)
}
