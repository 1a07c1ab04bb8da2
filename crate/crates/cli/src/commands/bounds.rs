//! `bounds`: evaluate the closed-form convergence bounds with exact or
//! estimated constants, print the report, and write the same numbers as
//! JSON.

use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use mfl_core::analysis::{
    acceleration_check, drift_bound, drift_bound_fl, estimate_constants, fl_bound,
    measure_run_geometry, mfl_bound, BoundParams, EstimatedConstants,
};
use mfl_core::optim::run_centralized;
use mfl_core::{Error, ParamVector};

use crate::config::{ConfigFile, Problem};
use crate::output::fmt_f64;

#[derive(Serialize)]
struct CoefficientReport {
    root_major: f64,
    root_minor: f64,
    share_major: f64,
    share_minor: f64,
    weight_major: f64,
    weight_minor: f64,
}

#[derive(Serialize)]
struct ParamsReport {
    eta: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    rho: f64,
    tau: usize,
    total_iters: usize,
    omega: f64,
    cos_theta: f64,
    theta: f64,
    p: f64,
    alpha: f64,
    phi: f64,
    coefficients: Option<CoefficientReport>,
}

#[derive(Serialize)]
struct AccelerationReport {
    omega_alpha: f64,
    eta_phi: f64,
    /// Momentum ceiling; `null` encodes an infinite ceiling (zero momentum
    /// ratio).
    gamma_ceiling: Option<f64>,
    accelerated: bool,
}

#[derive(Serialize)]
struct DriftRow {
    x: usize,
    h: f64,
    h_fl: f64,
}

#[derive(Serialize)]
struct EstimateReport {
    beta_hat: f64,
    rho_hat: f64,
    delta_hat: f64,
    delta_i_hat: Vec<f64>,
    probes: usize,
    radius: f64,
    seed: u64,
}

#[derive(Serialize)]
struct BoundsReport {
    constants_source: &'static str,
    rho_source: &'static str,
    params: ParamsReport,
    mfl_bound: Option<f64>,
    mfl_bound_error: Option<String>,
    fl_bound: Option<f64>,
    fl_bound_error: Option<String>,
    acceleration: AccelerationReport,
    drift_table: Vec<DriftRow>,
    estimated: Option<EstimateReport>,
}

impl From<&EstimatedConstants> for EstimateReport {
    fn from(est: &EstimatedConstants) -> Self {
        EstimateReport {
            beta_hat: est.beta_hat,
            rho_hat: est.rho_hat,
            delta_hat: est.delta_hat,
            delta_i_hat: est.delta_i_hat.clone(),
            probes: est.probes,
            radius: est.radius,
            seed: est.seed,
        }
    }
}

fn bound_or_violation(result: mfl_core::Result<f64>) -> Result<(Option<f64>, Option<String>)> {
    match result {
        Ok(v) => Ok((Some(v), None)),
        Err(Error::HypothesisViolated { condition }) => Ok((None, Some(condition))),
        Err(other) => Err(other.into()),
    }
}

pub fn execute(
    config: &ConfigFile,
    problem: &Problem,
    seed: u64,
    out_dir: &Path,
    force_estimate: bool,
) -> Result<()> {
    let run = super::mfl_with_references(config, problem, seed)?;

    // Optimum: exact for the synthetic problem, otherwise approximated by a
    // long centralized momentum run on the pooled data.
    let w_star: ParamVector = match &problem.truth {
        Some(truth) => truth.w_star.clone(),
        None => {
            let data = problem.partition.flatten();
            let w0 = run.config.initial_w(problem.partition.dim());
            run_centralized(
                &problem.model,
                &data,
                config.eta,
                config.gamma,
                2 * config.total_iters,
                w0,
                None,
            )?
            .final_state
            .w
        }
    };
    let geometry = measure_run_geometry(
        &run.references,
        &problem.model,
        &problem.partition,
        &w_star,
    )?;

    let estimate_cfg = config.estimate.unwrap_or_default();
    let use_estimates = force_estimate || problem.truth.is_none();
    let (beta, delta, rho, constants_source, rho_source, estimated) = if use_estimates {
        let est = estimate_constants(
            &problem.model,
            &problem.partition,
            estimate_cfg.probes,
            estimate_cfg.radius,
            seed,
        )?;
        let report = EstimateReport::from(&est);
        (
            est.beta_hat,
            est.delta_hat,
            est.rho_hat,
            "estimated_probes",
            "probe_ratio",
            Some(report),
        )
    } else {
        let truth = problem.truth.as_ref().expect("checked above");
        let rho = super::trajectory_rho(problem, &run)?;
        (
            truth.beta,
            truth.delta,
            rho,
            "exact_synthetic",
            "trajectory_sup_gradient",
            None,
        )
    };

    let params = BoundParams::new(
        config.eta,
        beta,
        config.gamma,
        delta,
        rho,
        config.tau,
        config.total_iters,
        geometry.omega,
        geometry.cos_theta,
        geometry.p,
    )?;
    let (f1, f1_err) = bound_or_violation(mfl_bound(config.total_iters, config.tau, &params))?;
    let (f2, f2_err) = bound_or_violation(fl_bound(
        config.total_iters,
        config.tau,
        params.eta,
        params.phi,
        params.rho,
        params.beta,
        params.delta,
    ))?;
    let verdict = acceleration_check(&params);

    let mut drift_table = Vec::with_capacity(config.tau + 1);
    for x in 0..=config.tau {
        let h = if config.gamma > 0.0 {
            drift_bound(x, params.eta, params.beta, params.gamma, params.delta)?
        } else {
            drift_bound_fl(x, params.eta, params.beta, params.delta)?
        };
        let h_fl = drift_bound_fl(x, params.eta, params.beta, params.delta)?;
        drift_table.push(DriftRow { x, h, h_fl });
    }

    let report = BoundsReport {
        constants_source,
        rho_source,
        params: ParamsReport {
            eta: params.eta,
            beta: params.beta,
            gamma: params.gamma,
            delta: params.delta,
            rho: params.rho,
            tau: params.tau,
            total_iters: params.total_iters,
            omega: params.omega,
            cos_theta: params.cos_theta,
            theta: geometry.theta,
            p: params.p,
            alpha: params.alpha,
            phi: params.phi,
            coefficients: params.coeffs.map(|c| CoefficientReport {
                root_major: c.root_major,
                root_minor: c.root_minor,
                share_major: c.share_major,
                share_minor: c.share_minor,
                weight_major: c.weight_major,
                weight_minor: c.weight_minor,
            }),
        },
        mfl_bound: f1,
        mfl_bound_error: f1_err,
        fl_bound: f2,
        fl_bound_error: f2_err,
        acceleration: AccelerationReport {
            omega_alpha: verdict.omega_alpha,
            eta_phi: verdict.eta_phi,
            gamma_ceiling: verdict.gamma_ceiling.is_finite().then_some(verdict.gamma_ceiling),
            accelerated: verdict.accelerated,
        },
        drift_table,
        estimated,
    };

    let json_path = out_dir.join("bounds.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&report)?)?;
    print_report(&report);
    println!("bounds: wrote {}", json_path.display());
    Ok(())
}

fn print_report(report: &BoundsReport) {
    let p = &report.params;
    println!(
        "bounds report (constants: {}, rho: {})",
        report.constants_source, report.rho_source
    );
    println!(
        "  eta {}  beta {}  gamma {}  delta {}  rho {}",
        fmt_f64(p.eta),
        fmt_f64(p.beta),
        fmt_f64(p.gamma),
        fmt_f64(p.delta),
        fmt_f64(p.rho)
    );
    println!("  tau {}  total_iters {}", p.tau, p.total_iters);
    println!(
        "  omega {}  cos_theta {}  theta {}  p {}",
        fmt_f64(p.omega),
        fmt_f64(p.cos_theta),
        fmt_f64(p.theta),
        fmt_f64(p.p)
    );
    println!("  alpha {}  phi {}", fmt_f64(p.alpha), fmt_f64(p.phi));
    if let Some(c) = &p.coefficients {
        println!(
            "  roots {} / {}  shares {} / {}  weights {} / {}",
            fmt_f64(c.root_major),
            fmt_f64(c.root_minor),
            fmt_f64(c.share_major),
            fmt_f64(c.share_minor),
            fmt_f64(c.weight_major),
            fmt_f64(c.weight_minor)
        );
    }
    match (&report.mfl_bound, &report.mfl_bound_error) {
        (Some(v), _) => println!("  mfl bound f1(T) = {}", fmt_f64(*v)),
        (None, Some(reason)) => println!("  mfl bound f1(T): {reason}"),
        (None, None) => {}
    }
    match (&report.fl_bound, &report.fl_bound_error) {
        (Some(v), _) => println!("  fl bound f2(T) = {}", fmt_f64(*v)),
        (None, Some(reason)) => println!("  fl bound f2(T): {reason}"),
        (None, None) => {}
    }
    let a = &report.acceleration;
    let ceiling = a
        .gamma_ceiling
        .map(fmt_f64)
        .unwrap_or_else(|| "infinite".to_string());
    println!(
        "  accelerated: {} (omega*alpha {} vs eta*phi {}, gamma ceiling {})",
        a.accelerated,
        fmt_f64(a.omega_alpha),
        fmt_f64(a.eta_phi),
        ceiling
    );
    println!("  drift table:");
    for row in &report.drift_table {
        println!(
            "    x {}: h {}  h_fl {}",
            row.x,
            fmt_f64(row.h),
            fmt_f64(row.h_fl)
        );
    }
    if let Some(est) = &report.estimated {
        println!(
            "  estimates: beta_hat {}  rho_hat {}  delta_hat {} ({} probes, radius {}, seed {})",
            fmt_f64(est.beta_hat),
            fmt_f64(est.rho_hat),
            fmt_f64(est.delta_hat),
            est.probes,
            fmt_f64(est.radius),
            est.seed
        );
    }
}
