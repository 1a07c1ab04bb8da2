//! The federated engine: node-local update loops, synchronized weighted
//! aggregation of model and momentum, and tracking of the best aggregate.
//!
//! Two algorithms share the machinery. `Mfl` runs momentum steps locally and
//! averages both the parameter and the momentum buffer at every aggregation.
//! `Fl` is a deliberately separate code path whose local step never touches
//! a momentum buffer; that it coincides with `Mfl` at `gamma = 0` is a
//! tested equivalence, not a definition.

use crate::data::{Partition, Sample};
use crate::error::{Error, Result};
use crate::models::{self, ModelSpec};
use crate::optim::{descended, updated_momentum};
use crate::rng::{SeededRng, Stream};
use crate::trace::RunTrace;
use crate::vector::{weighted_average, ParamVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Mfl,
    Fl,
}

/// Initial model parameter: the zero vector, or seeded uniform entries in
/// `(-scale, scale)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum InitKind {
    #[default]
    Zeros,
    Uniform { scale: f64 },
}

/// Full hyperparameter record for one federated run.
#[derive(Debug, Clone)]
pub struct FedConfig {
    pub eta: f64,
    pub gamma: f64,
    /// Local iterations between aggregations.
    pub tau: usize,
    /// Total local iterations; must be a multiple of `tau`.
    pub total_iters: usize,
    pub nodes: usize,
    pub model: ModelSpec,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub init: InitKind,
}

impl FedConfig {
    pub fn validate(&self, partition: &Partition) -> Result<()> {
        let eta_ok = self.eta.is_finite() && self.eta > 0.0;
        if !eta_ok {
            return Err(Error::invalid("eta", "step size must be positive"));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::invalid("gamma", "momentum factor must be in [0, 1)"));
        }
        if self.tau < 1 {
            return Err(Error::invalid("tau", "aggregation interval must be >= 1"));
        }
        if self.total_iters < 1 {
            return Err(Error::invalid("total_iters", "need at least one iteration"));
        }
        if !self.total_iters.is_multiple_of(self.tau) {
            return Err(Error::invalid(
                "total_iters",
                format!(
                    "{} is not a multiple of the aggregation interval {}",
                    self.total_iters, self.tau
                ),
            ));
        }
        if self.nodes != partition.num_nodes() {
            return Err(Error::invalid(
                "nodes",
                format!(
                    "config expects {} nodes but the partition has {}",
                    self.nodes,
                    partition.num_nodes()
                ),
            ));
        }
        Ok(())
    }

    /// Initial parameter vector for the given dimension.
    pub fn initial_w(&self, dim: usize) -> ParamVector {
        match self.init {
            InitKind::Zeros => ParamVector::zeros(dim),
            InitKind::Uniform { scale } => {
                let mut rng = SeededRng::new(self.seed, Stream::Init);
                ParamVector::from_vec((0..dim).map(|_| rng.symmetric(scale)).collect())
                    .expect("uniform init is finite")
            }
        }
    }
}

/// One edge node's parameter and momentum buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub w: ParamVector,
    pub d: ParamVector,
}

/// Momentum local step: refresh the buffer from the node-local gradient,
/// then descend along it.
pub fn local_update(
    node: &NodeState,
    spec: &ModelSpec,
    data: &[Sample],
    eta: f64,
    gamma: f64,
) -> Result<NodeState> {
    let grad = models::gradient(spec, &node.w, data)?;
    let d = updated_momentum(&node.d, &grad, gamma);
    let w = descended(&node.w, &d, eta);
    Ok(NodeState { w, d })
}

/// Momentum-free local step used by the `Fl` path.
pub fn fl_local_update(
    node: &NodeState,
    spec: &ModelSpec,
    data: &[Sample],
    eta: f64,
) -> Result<NodeState> {
    let grad = models::gradient(spec, &node.w, data)?;
    let w = descended(&node.w, &grad, eta);
    Ok(NodeState {
        w,
        d: node.d.clone(),
    })
}

/// Size-weighted average of the node parameters and momenta, in node index
/// order.
pub fn global_aggregate(nodes: &[NodeState], sizes: &[usize]) -> Result<(ParamVector, ParamVector)> {
    let w_entries: Vec<(f64, &ParamVector)> = sizes
        .iter()
        .zip(nodes)
        .map(|(s, n)| (*s as f64, &n.w))
        .collect();
    let d_entries: Vec<(f64, &ParamVector)> = sizes
        .iter()
        .zip(nodes)
        .map(|(s, n)| (*s as f64, &n.d))
        .collect();
    Ok((weighted_average(&w_entries)?, weighted_average(&d_entries)?))
}

/// Post-aggregation global state at the end of interval `k` (`k = 0` is the
/// shared initial state).
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSnapshot {
    pub k: usize,
    pub iteration: usize,
    pub w: ParamVector,
    pub d: ParamVector,
}

/// A finished federated run.
#[derive(Debug, Clone)]
pub struct FedResult {
    /// Best aggregate: the parameter among `w(k*tau)` with the lowest global
    /// loss.
    pub w_f: ParamVector,
    pub w_f_loss: f64,
    pub trace: RunTrace,
    pub aggregate_snapshots: Vec<AggregateSnapshot>,
    /// Global parameter (the would-be aggregate) at every iteration,
    /// starting at iteration 0. Entries at multiples of `tau` are the real
    /// aggregates; the rest are read-only observations for plotting.
    pub params_per_iter: Vec<ParamVector>,
}

impl FedResult {
    pub fn final_loss(&self) -> f64 {
        self.trace.final_loss().expect("runs record at least t=0")
    }
}

/// Returns the best aggregate of a finished run.
pub fn final_model(result: &FedResult) -> &ParamVector {
    &result.w_f
}

/// Stepwise federated simulation; drive it with [`FedSimulation::advance`]
/// or use [`run_federated`] for the whole schedule at once.
pub struct FedSimulation<'a> {
    config: &'a FedConfig,
    partition: &'a Partition,
    test_set: Option<&'a [Sample]>,
    sizes: Vec<usize>,
    nodes: Vec<NodeState>,
    iteration: usize,
    trace: RunTrace,
    snapshots: Vec<AggregateSnapshot>,
    params: Vec<ParamVector>,
    best: Option<(f64, ParamVector)>,
}

impl<'a> FedSimulation<'a> {
    pub fn new(
        config: &'a FedConfig,
        partition: &'a Partition,
        test_set: Option<&'a [Sample]>,
    ) -> Result<Self> {
        config.validate(partition)?;
        let dim = partition.dim();
        let w0 = config.initial_w(dim);
        let d0 = ParamVector::zeros(dim);
        let nodes = vec![
            NodeState {
                w: w0.clone(),
                d: d0.clone(),
            };
            config.nodes
        ];
        let mut sim = FedSimulation {
            config,
            partition,
            test_set,
            sizes: partition.sizes(),
            nodes,
            iteration: 0,
            trace: RunTrace::default(),
            snapshots: vec![AggregateSnapshot {
                k: 0,
                iteration: 0,
                w: w0.clone(),
                d: d0,
            }],
            params: Vec::with_capacity(config.total_iters + 1),
            best: None,
        };
        sim.observe(w0)?;
        Ok(sim)
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_done(&self) -> bool {
        self.iteration >= self.config.total_iters
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn latest_snapshot(&self) -> &AggregateSnapshot {
        self.snapshots.last().expect("initial snapshot always present")
    }

    fn observe(&mut self, w: ParamVector) -> Result<f64> {
        let loss = models::global_loss(&self.config.model, self.partition, &w)?;
        if !loss.is_finite() {
            return Err(Error::Divergence {
                iteration: self.iteration,
            });
        }
        let accuracy = self
            .test_set
            .map(|t| models::accuracy(&self.config.model, &w, t));
        self.trace.push(self.iteration, loss, accuracy);
        self.params.push(w);
        Ok(loss)
    }

    /// Runs one local iteration on every node and, at interval boundaries,
    /// the synchronized aggregation.
    pub fn advance(&mut self) -> Result<()> {
        debug_assert!(!self.is_done());
        self.iteration += 1;
        for (node, data) in self.nodes.iter_mut().zip(self.partition.nodes()) {
            *node = match self.config.algorithm {
                Algorithm::Mfl => local_update(
                    node,
                    &self.config.model,
                    data,
                    self.config.eta,
                    self.config.gamma,
                )?,
                Algorithm::Fl => {
                    fl_local_update(node, &self.config.model, data, self.config.eta)?
                }
            };
        }

        if self.iteration.is_multiple_of(self.config.tau) {
            let (w, d) = global_aggregate(&self.nodes, &self.sizes)?;
            for node in &mut self.nodes {
                node.w = w.clone();
                node.d = d.clone();
            }
            let k = self.iteration / self.config.tau;
            self.snapshots.push(AggregateSnapshot {
                k,
                iteration: self.iteration,
                w: w.clone(),
                d,
            });
            let loss = self.observe(w.clone())?;
            let better = match &self.best {
                Some((best_loss, _)) => loss < *best_loss,
                None => true,
            };
            if better {
                self.best = Some((loss, w));
            }
        } else {
            // Read-only observation of the would-be aggregate.
            let w_entries: Vec<(f64, &ParamVector)> = self
                .sizes
                .iter()
                .zip(&self.nodes)
                .map(|(s, n)| (*s as f64, &n.w))
                .collect();
            let virtual_w = weighted_average(&w_entries)?;
            self.observe(virtual_w)?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<FedResult> {
        let (w_f_loss, w_f) = self.best.ok_or_else(|| {
            Error::invalid("total_iters", "run finished without any aggregation")
        })?;
        Ok(FedResult {
            w_f,
            w_f_loss,
            trace: self.trace,
            aggregate_snapshots: self.snapshots,
            params_per_iter: self.params,
        })
    }
}

/// Runs the full federated schedule described by `config` on `partition`.
pub fn run_federated(
    config: &FedConfig,
    partition: &Partition,
    test_set: Option<&[Sample]>,
) -> Result<FedResult> {
    let mut sim = FedSimulation::new(config, partition, test_set)?;
    while !sim.is_done() {
        sim.advance()?;
    }
    sim.finish()
}
