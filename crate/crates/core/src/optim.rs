//! Centralized gradient descent and momentum gradient descent, plus the
//! per-interval reference runs that the drift bound compares against.

use crate::data::{Partition, Sample};
use crate::error::{Error, Result};
use crate::fed::AggregateSnapshot;
use crate::models::{self, ModelSpec};
use crate::trace::RunTrace;
use crate::vector::ParamVector;

/// Optimizer state: model parameter, momentum buffer, iteration counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptState {
    pub w: ParamVector,
    pub d: ParamVector,
    pub iteration: usize,
}

impl OptState {
    /// Fresh state at iteration 0 with a zero momentum buffer.
    pub fn new(w0: ParamVector) -> Self {
        let d = ParamVector::zeros(w0.dim());
        OptState {
            w: w0,
            d,
            iteration: 0,
        }
    }
}

/// `gamma * d + grad`, elementwise. Shared by the centralized stepper and
/// the federated local update so equivalence between the two is exact.
pub(crate) fn updated_momentum(d: &ParamVector, grad: &ParamVector, gamma: f64) -> ParamVector {
    let values = d
        .iter()
        .zip(grad.iter())
        .map(|(dj, gj)| gamma * dj + gj)
        .collect();
    ParamVector::from_vec(values).expect("momentum update stays finite")
}

/// `w - eta * step`, elementwise.
pub(crate) fn descended(w: &ParamVector, step: &ParamVector, eta: f64) -> ParamVector {
    let values = w
        .iter()
        .zip(step.iter())
        .map(|(wj, sj)| wj - eta * sj)
        .collect();
    ParamVector::from_vec(values).expect("descent step stays finite")
}

/// Plain gradient descent step; the momentum buffer is carried along
/// unused.
pub fn gd_step(state: &OptState, grad: &ParamVector, eta: f64) -> OptState {
    debug_assert!(eta > 0.0);
    OptState {
        w: descended(&state.w, grad, eta),
        d: state.d.clone(),
        iteration: state.iteration + 1,
    }
}

/// Momentum step: the buffer is refreshed first, then the parameter moves
/// along the refreshed buffer.
pub fn mgd_step(state: &OptState, grad: &ParamVector, eta: f64, gamma: f64) -> OptState {
    debug_assert!(eta > 0.0);
    debug_assert!((0.0..1.0).contains(&gamma));
    let d = updated_momentum(&state.d, grad, gamma);
    let w = descended(&state.w, &d, eta);
    OptState {
        w,
        d,
        iteration: state.iteration + 1,
    }
}

/// A finished centralized run: the scalar trace, the parameter at every
/// iteration (index 0 is the start), and the final optimizer state.
#[derive(Debug, Clone)]
pub struct CentralizedRun {
    pub trace: RunTrace,
    pub params: Vec<ParamVector>,
    pub final_state: OptState,
}

/// Runs full-batch MGD (GD when `gamma` is zero) on one dataset, recording
/// loss (and accuracy against `test_set`, when given) at every iteration.
/// Aborts with a divergence error naming the iteration if the loss leaves
/// the finite range.
pub fn run_centralized(
    spec: &ModelSpec,
    data: &[Sample],
    eta: f64,
    gamma: f64,
    steps: usize,
    w0: ParamVector,
    test_set: Option<&[Sample]>,
) -> Result<CentralizedRun> {
    let eta_ok = eta.is_finite() && eta > 0.0;
    if !eta_ok {
        return Err(Error::invalid("eta", "step size must be positive"));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::invalid("gamma", "momentum factor must be in [0, 1)"));
    }
    if steps < 1 {
        return Err(Error::invalid("steps", "at least one iteration required"));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let mut state = OptState::new(w0);
    let mut trace = RunTrace::default();
    let mut params = Vec::with_capacity(steps + 1);

    let observe = |w: &ParamVector, iteration: usize, trace: &mut RunTrace| -> Result<()> {
        let loss = models::loss(spec, w, data)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { iteration });
        }
        let accuracy = test_set.map(|t| models::accuracy(spec, w, t));
        trace.push(iteration, loss, accuracy);
        Ok(())
    };

    observe(&state.w, 0, &mut trace)?;
    params.push(state.w.clone());
    for t in 1..=steps {
        let grad = models::gradient(spec, &state.w, data)?;
        state = if gamma == 0.0 {
            gd_step(&state, &grad, eta)
        } else {
            mgd_step(&state, &grad, eta, gamma)
        };
        observe(&state.w, t, &mut trace)?;
        params.push(state.w.clone());
    }

    Ok(CentralizedRun {
        trace,
        params,
        final_state: state,
    })
}

/// Centralized MGD restarted from one aggregation snapshot: parameters and
/// momenta for local offsets `0..=tau` within the interval.
#[derive(Debug, Clone)]
pub struct IntervalTrace {
    /// Interval index, starting at 1.
    pub k: usize,
    /// Global iteration of the interval start, `(k - 1) * tau`.
    pub start_iteration: usize,
    pub w: Vec<ParamVector>,
    pub d: Vec<ParamVector>,
}

/// For every interval, restarts centralized MGD from the federated
/// aggregate at the interval start and runs `tau` steps on the global loss.
///
/// `snapshots` must hold the aggregates in order, starting with the initial
/// state (interval index 0).
pub fn run_interval_reference(
    spec: &ModelSpec,
    partition: &Partition,
    snapshots: &[AggregateSnapshot],
    eta: f64,
    gamma: f64,
    tau: usize,
) -> Result<Vec<IntervalTrace>> {
    if snapshots.len() < 2 {
        return Err(Error::invalid(
            "snapshots",
            "need the initial state and at least one aggregation",
        ));
    }
    if tau < 1 {
        return Err(Error::invalid("tau", "aggregation interval must be >= 1"));
    }
    for (i, snap) in snapshots.iter().enumerate() {
        if snap.k != i || snap.iteration != i * tau {
            return Err(Error::invalid(
                "snapshots",
                format!(
                    "missing or misordered aggregate snapshot at position {i} \
                     (found k={}, iteration={})",
                    snap.k, snap.iteration
                ),
            ));
        }
    }

    let intervals = snapshots.len() - 1;
    let mut traces = Vec::with_capacity(intervals);
    for k in 1..=intervals {
        let start = &snapshots[k - 1];
        let mut w_list = Vec::with_capacity(tau + 1);
        let mut d_list = Vec::with_capacity(tau + 1);
        w_list.push(start.w.clone());
        d_list.push(start.d.clone());
        let mut w = start.w.clone();
        let mut d = start.d.clone();
        for _ in 0..tau {
            let grad = models::global_gradient(spec, partition, &w)?;
            d = updated_momentum(&d, &grad, gamma);
            w = descended(&w, &d, eta);
            w_list.push(w.clone());
            d_list.push(d.clone());
        }
        traces.push(IntervalTrace {
            k,
            start_iteration: (k - 1) * tau,
            w: w_list,
            d: d_list,
        });
    }
    Ok(traces)
}
