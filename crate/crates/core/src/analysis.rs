//! Closed-form convergence machinery.
//!
//! The central object is the drift envelope `h(x)`: an upper bound on how
//! far the federated parameter can wander from a centralized momentum run
//! that was synchronized with it `x` local steps ago. From it follow the
//! per-interval gap bound, the global convergence bounds for the momentum
//! and plain federated algorithms, and the acceleration verdict comparing
//! the two.
//!
//! Estimators for the regularity constants (smoothness, function Lipschitz,
//! gradient divergence) and for the run geometry (momentum/gradient angle
//! and norm ratio, distance-to-optimum scale) supply the inputs when exact
//! values are not known.

use crate::data::Partition;
use crate::error::{Error, Result};
use crate::models::{self, ModelSpec};
use crate::optim::IntervalTrace;
use crate::rng::{SeededRng, Stream};
use crate::vector::{weighted_average, ParamVector};

fn check_rates(eta: f64, beta: f64) -> Result<()> {
    let eta_ok = eta.is_finite() && eta > 0.0;
    if !eta_ok {
        return Err(Error::invalid("eta", "step size must be positive"));
    }
    let beta_ok = beta.is_finite() && beta > 0.0;
    if !beta_ok {
        return Err(Error::invalid("beta", "smoothness constant must be positive"));
    }
    Ok(())
}

fn check_gamma_open(gamma: f64) -> Result<()> {
    let ok = gamma > 0.0 && gamma < 1.0;
    if !ok {
        return Err(Error::invalid("gamma", "momentum factor must be in (0, 1)"));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    let ok = delta.is_finite() && delta >= 0.0;
    if !ok {
        return Err(Error::invalid("delta", "gradient divergence must be nonnegative"));
    }
    Ok(())
}

/// Roots of the characteristic quadratic
/// `gamma x^2 - (1 + gamma + eta beta) x + 1 = 0`
/// that governs the drift recurrence: `(larger, smaller)`.
///
/// The discriminant is strictly positive on the whole domain, and the
/// smaller root comes from the product identity `A B = 1/gamma` rather than
/// the subtractive formula, which loses digits for small `gamma`.
pub fn characteristic_roots(eta: f64, beta: f64, gamma: f64) -> Result<(f64, f64)> {
    check_rates(eta, beta)?;
    check_gamma_open(gamma)?;
    let s = 1.0 + gamma + eta * beta;
    let disc = s * s - 4.0 * gamma;
    debug_assert!(disc > 0.0);
    let larger = (s + disc.sqrt()) / (2.0 * gamma);
    let smaller = 1.0 / (gamma * larger);
    Ok((larger, smaller))
}

/// Weights of the growing and decaying geometric modes in the accumulated
/// drift: `(weight_major, weight_minor)`. Their sum is `1 / (eta beta)`.
pub fn accumulation_weights(root_major: f64, root_minor: f64, gamma: f64) -> (f64, f64) {
    let spread = root_major - root_minor;
    let weight_major = root_major / (spread * (gamma * root_major - 1.0));
    let weight_minor = root_minor / (spread * (1.0 - gamma * root_minor));
    (weight_major, weight_minor)
}

/// The full coefficient set of the drift recurrence: both characteristic
/// roots, their convex shares, and the accumulation weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapCoefficients {
    /// Larger root; `gamma * root_major > 1` (the growing mode).
    pub root_major: f64,
    /// Smaller root; `gamma * root_minor < 1` (the decaying mode).
    pub root_minor: f64,
    /// Share of the major mode; `share_major + share_minor = 1`.
    pub share_major: f64,
    pub share_minor: f64,
    /// Accumulated weights; `weight_major + weight_minor = 1 / (eta beta)`.
    pub weight_major: f64,
    pub weight_minor: f64,
}

impl GapCoefficients {
    pub fn new(eta: f64, beta: f64, gamma: f64) -> Result<Self> {
        let (root_major, root_minor) = characteristic_roots(eta, beta, gamma)?;
        let spread = root_major - root_minor;
        let (weight_major, weight_minor) =
            accumulation_weights(root_major, root_minor, gamma);
        Ok(GapCoefficients {
            root_major,
            root_minor,
            share_major: (root_major - 1.0) / spread,
            share_minor: (1.0 - root_minor) / spread,
            weight_major,
            weight_minor,
        })
    }

    /// `share_major * (gamma A)^t + share_minor * (gamma B)^t - 1`, the
    /// step-t drift kernel. Zero at `t = 0` up to rounding.
    pub fn step_kernel(&self, gamma: f64, t: usize) -> f64 {
        self.share_major * (gamma * self.root_major).powi(t as i32)
            + self.share_minor * (gamma * self.root_minor).powi(t as i32)
            - 1.0
    }
}

/// Closed-form drift envelope: an upper bound on the parameter distance
/// between the federated run and its synchronized centralized reference
/// after `x` local steps.
///
/// `x <= 1` returns exactly zero by construction: those values vanish
/// analytically and evaluating the formula would subtract large near-equal
/// terms instead.
pub fn drift_bound(x: usize, eta: f64, beta: f64, gamma: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if x <= 1 {
        check_rates(eta, beta)?;
        check_gamma_open(gamma)?;
        return Ok(0.0);
    }
    let coeffs = GapCoefficients::new(eta, beta, gamma)?;
    let ga = gamma * coeffs.root_major;
    let gb = gamma * coeffs.root_minor;
    let xf = x as f64;
    let tail = (gamma * (gamma.powi(x as i32) - 1.0) - (gamma - 1.0) * xf)
        / ((gamma - 1.0) * (gamma - 1.0));
    let bracket = coeffs.weight_major * ga.powi(x as i32)
        + coeffs.weight_minor * gb.powi(x as i32)
        - 1.0 / (eta * beta)
        - tail;
    Ok(eta * delta * bracket)
}

/// Brute-force evaluation of the same envelope by accumulating the step
/// kernel through the double sum
/// `eta delta * sum_{i=1..x} sum_{j=0..i-1} gamma^(i-1-j) kernel(j)`.
///
/// This is the independent cross-check for [`drift_bound`]; it shares only
/// the root computation, not the closed-form geometric-series algebra.
pub fn drift_bound_accumulated(
    x: usize,
    eta: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
) -> Result<f64> {
    check_rates(eta, beta)?;
    check_gamma_open(gamma)?;
    check_delta(delta)?;
    let coeffs = GapCoefficients::new(eta, beta, gamma)?;
    let kernels: Vec<f64> = (0..x).map(|j| coeffs.step_kernel(gamma, j)).collect();
    let mut total = 0.0;
    for i in 1..=x {
        let mut inner = 0.0;
        for (j, kernel) in kernels.iter().enumerate().take(i) {
            inner += gamma.powi((i - 1 - j) as i32) * kernel;
        }
        total += inner;
    }
    Ok(eta * delta * total)
}

/// Drift envelope of the momentum-free federated baseline:
/// `(delta / beta) ((eta beta + 1)^tau - 1) - eta delta tau`.
///
/// Vanishes analytically for `tau <= 1`; returns exact zero there, matching
/// [`drift_bound`].
pub fn drift_bound_fl(tau: usize, eta: f64, beta: f64, delta: f64) -> Result<f64> {
    check_rates(eta, beta)?;
    check_delta(delta)?;
    if tau <= 1 {
        return Ok(0.0);
    }
    Ok(delta / beta * ((eta * beta + 1.0).powi(tau as i32) - 1.0) - eta * delta * tau as f64)
}

/// Loss-gap bound within interval `k`: the Lipschitz constant times the
/// drift envelope at the local offset `t - (k-1) tau`.
#[allow(clippy::too_many_arguments)]
pub fn interval_gap_bound(
    t: usize,
    k: usize,
    tau: usize,
    rho: f64,
    eta: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
) -> Result<f64> {
    if k < 1 {
        return Err(Error::invalid("k", "interval index starts at 1"));
    }
    let start = (k - 1) * tau;
    if t < start || t > k * tau {
        return Err(Error::invalid(
            "t",
            format!("iteration {t} outside interval {k} = [{start}, {}]", k * tau),
        ));
    }
    Ok(rho * drift_bound(t - start, eta, beta, gamma, delta)?)
}

/// Everything the closed-form bounds consume: problem constants, schedule,
/// measured run geometry, and the derived rate terms.
#[derive(Debug, Clone)]
pub struct BoundParams {
    pub eta: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub rho: f64,
    pub tau: usize,
    pub total_iters: usize,
    /// `1 / max_k ||w((k-1) tau) - w*||^2`, measured over interval starts.
    pub omega: f64,
    /// Cosine of the widest angle between the reference momentum and the
    /// global gradient.
    pub cos_theta: f64,
    /// Largest ratio of momentum norm to gradient norm.
    pub p: f64,
    /// Momentum descent rate:
    /// `eta (1 - beta eta / 2) + eta gamma (1 - beta eta) cos_theta
    ///  - beta eta^2 gamma^2 p^2 / 2`.
    pub alpha: f64,
    /// Momentum-free descent rate scale: `omega (1 - eta beta / 2)`.
    pub phi: f64,
    /// Drift coefficients; absent exactly when `gamma = 0`.
    pub coeffs: Option<GapCoefficients>,
}

impl BoundParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        eta: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
        rho: f64,
        tau: usize,
        total_iters: usize,
        omega: f64,
        cos_theta: f64,
        p: f64,
    ) -> Result<Self> {
        check_rates(eta, beta)?;
        check_delta(delta)?;
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::invalid("gamma", "momentum factor must be in [0, 1)"));
        }
        let rho_ok = rho.is_finite() && rho >= 0.0;
        if !rho_ok {
            return Err(Error::invalid("rho", "Lipschitz constant must be nonnegative"));
        }
        if tau < 1 || total_iters < 1 {
            return Err(Error::invalid("tau", "schedule lengths must be >= 1"));
        }
        let omega_ok = omega.is_finite() && omega > 0.0;
        if !omega_ok {
            return Err(Error::invalid("omega", "omega must be positive"));
        }
        if !(-1.0..=1.0).contains(&cos_theta) {
            return Err(Error::invalid("cos_theta", "cosine must lie in [-1, 1]"));
        }
        let p_ok = p.is_finite() && p >= 0.0;
        if !p_ok {
            return Err(Error::invalid("p", "norm ratio must be nonnegative"));
        }
        let alpha = eta * (1.0 - beta * eta / 2.0)
            + eta * gamma * (1.0 - beta * eta) * cos_theta
            - beta * eta * eta * gamma * gamma * p * p / 2.0;
        let phi = omega * (1.0 - eta * beta / 2.0);
        let coeffs = if gamma > 0.0 {
            Some(GapCoefficients::new(eta, beta, gamma)?)
        } else {
            None
        };
        Ok(BoundParams {
            eta,
            beta,
            gamma,
            delta,
            rho,
            tau,
            total_iters,
            omega,
            cos_theta,
            p,
            alpha,
            phi,
            coeffs,
        })
    }
}

fn bound_from_terms(half: f64, gap: f64, rate: f64, tau: usize) -> f64 {
    if gap == 0.0 {
        half + half
    } else {
        half + (half * half + gap / (rate * tau as f64)).sqrt() + gap
    }
}

/// Closed-form convergence bound of the momentum federated algorithm after
/// `total_iters` local iterations with aggregation interval `tau`.
///
/// Hypotheses: `cos_theta >= 0`, `0 < eta beta < 1`, `0 <= gamma < 1`, and
/// `alpha > 0`; violations are reported by name. At `gamma = 0` the bound
/// degenerates to the momentum-free one and is computed through the same
/// expression, so the two agree bit for bit.
pub fn mfl_bound(total_iters: usize, tau: usize, params: &BoundParams) -> Result<f64> {
    if params.cos_theta < 0.0 {
        return Err(Error::HypothesisViolated {
            condition: format!("cos(theta) = {} < 0", params.cos_theta),
        });
    }
    let eta_beta = params.eta * params.beta;
    if !(eta_beta > 0.0 && eta_beta < 1.0) {
        return Err(Error::HypothesisViolated {
            condition: format!("eta * beta = {eta_beta} outside (0, 1)"),
        });
    }
    if params.alpha <= 0.0 {
        return Err(Error::HypothesisViolated {
            condition: format!("alpha = {} <= 0", params.alpha),
        });
    }
    if params.gamma == 0.0 {
        return fl_bound(
            total_iters,
            tau,
            params.eta,
            params.phi,
            params.rho,
            params.beta,
            params.delta,
        );
    }
    let rate = params.omega * params.alpha;
    let gap = params.rho * drift_bound(tau, params.eta, params.beta, params.gamma, params.delta)?;
    let half = 1.0 / (2.0 * total_iters as f64 * rate);
    Ok(bound_from_terms(half, gap, rate, tau))
}

/// Closed-form convergence bound of the momentum-free federated baseline.
pub fn fl_bound(
    total_iters: usize,
    tau: usize,
    eta: f64,
    phi: f64,
    rho: f64,
    beta: f64,
    delta: f64,
) -> Result<f64> {
    let eta_beta = eta * beta;
    if !(eta_beta > 0.0 && eta_beta < 1.0) {
        return Err(Error::HypothesisViolated {
            condition: format!("eta * beta = {eta_beta} outside (0, 1)"),
        });
    }
    let phi_ok = phi.is_finite() && phi > 0.0;
    if !phi_ok {
        return Err(Error::HypothesisViolated {
            condition: format!("phi = {phi} <= 0"),
        });
    }
    let rate = eta * phi;
    let gap = rho * drift_bound_fl(tau, eta, beta, delta)?;
    let half = 1.0 / (2.0 * total_iters as f64 * rate);
    Ok(bound_from_terms(half, gap, rate, tau))
}

/// Empirical regularity constants, each a maximum over finite probes and
/// therefore a lower bound on the true constant.
#[derive(Debug, Clone)]
pub struct EstimatedConstants {
    pub beta_hat: f64,
    pub rho_hat: f64,
    pub delta_i_hat: Vec<f64>,
    pub delta_hat: f64,
    pub probes: usize,
    pub radius: f64,
    pub seed: u64,
}

/// Probes the node losses at seeded points in a ball around the origin and
/// reports the worst observed smoothness ratio, function Lipschitz ratio,
/// and per-node gradient divergence.
pub fn estimate_constants(
    spec: &ModelSpec,
    partition: &Partition,
    probes: usize,
    radius: f64,
    seed: u64,
) -> Result<EstimatedConstants> {
    if probes < 2 {
        return Err(Error::invalid("probes", "need at least two probe points"));
    }
    let radius_ok = radius.is_finite() && radius > 0.0;
    if !radius_ok {
        return Err(Error::invalid("radius", "probe radius must be positive"));
    }
    let dim = partition.dim();
    let mut rng = SeededRng::new(seed, Stream::Probes);
    let points: Vec<ParamVector> = (0..probes)
        .map(|_| ParamVector::from_vec(rng.in_ball(dim, radius)).expect("finite"))
        .collect();

    // Cache per-node losses and gradients at every probe point.
    let mut node_losses: Vec<Vec<f64>> = Vec::with_capacity(partition.num_nodes());
    let mut node_grads: Vec<Vec<ParamVector>> = Vec::with_capacity(partition.num_nodes());
    for node in partition.nodes() {
        let mut losses = Vec::with_capacity(probes);
        let mut grads = Vec::with_capacity(probes);
        for point in &points {
            losses.push(models::loss(spec, point, node)?);
            grads.push(models::gradient(spec, point, node)?);
        }
        node_losses.push(losses);
        node_grads.push(grads);
    }

    let mut beta_hat: f64 = 0.0;
    let mut rho_hat: f64 = 0.0;
    let mut usable_pairs = 0usize;
    for a in 0..probes {
        for b in (a + 1)..probes {
            let dist = points[a].distance(&points[b]);
            if dist == 0.0 {
                continue;
            }
            usable_pairs += 1;
            for i in 0..partition.num_nodes() {
                beta_hat = beta_hat.max(node_grads[i][a].distance(&node_grads[i][b]) / dist);
                rho_hat = rho_hat.max((node_losses[i][a] - node_losses[i][b]).abs() / dist);
            }
        }
    }
    if usable_pairs == 0 {
        return Err(Error::invalid("probes", "all probe pairs were degenerate"));
    }

    let sizes = partition.sizes();
    let weights: Vec<f64> = sizes.iter().map(|s| *s as f64).collect();
    let mut delta_i_hat = vec![0.0f64; partition.num_nodes()];
    for (pi, _point) in points.iter().enumerate() {
        let entries: Vec<(f64, &ParamVector)> = weights
            .iter()
            .zip(&node_grads)
            .map(|(w, grads)| (*w, &grads[pi]))
            .collect();
        let global = weighted_average(&entries)?;
        for (i, grads) in node_grads.iter().enumerate() {
            delta_i_hat[i] = delta_i_hat[i].max(global.distance(&grads[pi]));
        }
    }
    let total: f64 = weights.iter().sum();
    let delta_hat = weights
        .iter()
        .zip(&delta_i_hat)
        .map(|(w, d)| w * d)
        .sum::<f64>()
        / total;

    Ok(EstimatedConstants {
        beta_hat,
        rho_hat,
        delta_i_hat,
        delta_hat,
        probes,
        radius,
        seed,
    })
}

/// Run geometry measured on the interval reference traces.
#[derive(Debug, Clone, Copy)]
pub struct RunGeometry {
    /// Widest momentum/gradient angle, radians.
    pub theta: f64,
    pub cos_theta: f64,
    /// Largest momentum-to-gradient norm ratio.
    pub p: f64,
    /// `1 / max_k ||w((k-1) tau) - w*||^2`.
    pub omega: f64,
    /// True when every momentum vector was zero, leaving the angle
    /// undefined; `theta` is reported as 0 in that case.
    pub momentum_always_zero: bool,
    /// Instants skipped because the momentum (or gradient) vanished there.
    pub skipped_instants: usize,
}

/// Scans the reference traces for the worst momentum/gradient angle, the
/// worst norm ratio, and the farthest interval start from the optimum.
pub fn measure_run_geometry(
    traces: &[IntervalTrace],
    spec: &ModelSpec,
    partition: &Partition,
    w_star: &ParamVector,
) -> Result<RunGeometry> {
    if traces.is_empty() {
        return Err(Error::invalid("traces", "no interval traces supplied"));
    }
    let mut min_cos = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    let mut max_start_dist: f64 = 0.0;
    let mut skipped = 0usize;
    let mut saw_momentum = false;

    for trace in traces {
        max_start_dist = max_start_dist.max(trace.w[0].distance(w_star));
        for (w, d) in trace.w.iter().zip(&trace.d) {
            let momentum_norm = d.norm();
            if momentum_norm == 0.0 {
                skipped += 1;
                continue;
            }
            saw_momentum = true;
            let grad = models::global_gradient(spec, partition, w)?;
            let grad_norm = grad.norm();
            if grad_norm == 0.0 {
                skipped += 1;
                continue;
            }
            max_ratio = max_ratio.max(momentum_norm / grad_norm);
            let cos = (grad.dot(d) / (grad_norm * momentum_norm)).clamp(-1.0, 1.0);
            min_cos = min_cos.min(cos);
        }
    }

    if max_start_dist == 0.0 {
        return Err(Error::invalid(
            "traces",
            "every interval starts exactly at the optimum; omega is undefined",
        ));
    }
    let omega = 1.0 / (max_start_dist * max_start_dist);
    if !saw_momentum {
        return Ok(RunGeometry {
            theta: 0.0,
            cos_theta: 1.0,
            p: 0.0,
            omega,
            momentum_always_zero: true,
            skipped_instants: skipped,
        });
    }
    Ok(RunGeometry {
        theta: min_cos.acos(),
        cos_theta: min_cos,
        p: max_ratio,
        omega,
        momentum_always_zero: false,
        skipped_instants: skipped,
    })
}

/// Outcome of comparing the two convergence rates.
#[derive(Debug, Clone, Copy)]
pub struct AccelerationVerdict {
    pub omega_alpha: f64,
    pub eta_phi: f64,
    /// Momentum ceiling `2 (1 - beta eta) cos_theta / (beta eta p^2)`;
    /// momentum factors strictly below it (and in (0, 1)) accelerate.
    pub gamma_ceiling: f64,
    pub accelerated: bool,
}

/// Compares the momentum rate `omega * alpha` against the momentum-free
/// rate `eta * phi`.
pub fn acceleration_check(params: &BoundParams) -> AccelerationVerdict {
    let eta_phi = params.eta * params.phi;
    // With no momentum the two rates coincide by definition.
    let omega_alpha = if params.gamma == 0.0 {
        eta_phi
    } else {
        params.omega * params.alpha
    };
    let gamma_ceiling = if params.p == 0.0 {
        f64::INFINITY
    } else {
        2.0 * (1.0 - params.beta * params.eta) * params.cos_theta
            / (params.beta * params.eta * params.p * params.p)
    };
    AccelerationVerdict {
        omega_alpha,
        eta_phi,
        gamma_ceiling,
        accelerated: omega_alpha > eta_phi && params.gamma > 0.0 && params.gamma < 1.0,
    }
}
