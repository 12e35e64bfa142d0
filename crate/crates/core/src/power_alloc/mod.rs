//! Sum-rate maximizing power allocation under a total budget
//! `sum p_S + p_R <= P_T`, for one-bit ADCs and DACs.
//!
//! Each iteration replaces `log(1 + gamma_k)` by the monomial bound
//! `omega_k gamma_k^mu_k`, `mu_k = g_k / (1 + g_k)`, tight at the current SINR
//! `g_k`, and solves the resulting geometric program in
//! `(p_S, p_R, gamma)` with the trust region `g_k / theta <= gamma_k <= theta g_k`.

mod coefficients;
mod gp;

pub use coefficients::{sinr_coefficients, SinrCoefficients};
pub use gp::{solve_gp, GeometricProgram, GpOptions, GpSolution, Monomial, Posynomial};

use crate::channel::SystemConfig;
use crate::closed_form::corollary_rate;
use crate::error::{Error, Result};
use crate::report::{HardwareCase, RateReport};

pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_THETA: f64 = 1.1;
pub const MAX_ITERATIONS: usize = 500;
/// Lower bound on every power, relative to `P_T`.
pub const POWER_FLOOR: f64 = 1e-12;
pub const MAX_RETRIES: usize = 20;
/// Allowed decrease of the sum rate between iterations.
pub const MONOTONE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    /// Expansion point of this iteration.
    pub gamma_hat: Vec<f64>,
    /// SINR variables returned by the GP.
    pub gp_gamma: Vec<f64>,
    /// Closed-form sum rate at the iterate.
    pub objective: f64,
    /// Times `gamma_hat` was halved after an infeasible GP.
    pub retries: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub p_s: Vec<f64>,
    pub p_r: f64,
    /// Closed-form SINRs at `(p_s, p_r)`.
    pub gamma: Vec<f64>,
    pub sum_rate: f64,
    pub per_user_rate: Vec<f64>,
    pub hw_case: HardwareCase,
    pub trace: Vec<TraceEntry>,
    pub converged: bool,
    pub iterations: usize,
}

impl AllocationResult {
    pub fn total_power(&self) -> f64 {
        self.p_s.iter().sum::<f64>() + self.p_r
    }

    fn from_report(p_s: Vec<f64>, p_r: f64, report: RateReport, trace: Vec<TraceEntry>, converged: bool) -> Self {
        AllocationResult {
            iterations: trace.len(),
            p_s,
            p_r,
            gamma: report.sinr,
            sum_rate: report.sum_rate,
            per_user_rate: report.per_user_rate,
            hw_case: report.hw_case,
            trace,
            converged,
        }
    }
}

fn check_budget(total_power: f64) -> Result<()> {
    if total_power > 0.0 && total_power.is_finite() {
        Ok(())
    } else {
        Err(Error::config("P_T", format!("must be positive and finite, got {total_power}")))
    }
}

fn rate_at(config: &SystemConfig, hw_case: HardwareCase, p_s: &[f64], p_r: f64) -> Result<RateReport> {
    let cfg = SystemConfig {
        p_s: p_s.to_vec(),
        p_r,
        ..config.clone()
    };
    corollary_rate(&cfg, hw_case)
}

/// The baseline split `p_S,k = P_T / (2K)`, `p_R = P_T / 2`.
pub fn uniform_allocation(config: &SystemConfig, total_power: f64, hw_case: HardwareCase) -> Result<AllocationResult> {
    check_budget(total_power)?;
    let p_s = vec![total_power / (2.0 * config.k as f64); config.k];
    let p_r = total_power / 2.0;
    let report = rate_at(config, hw_case, &p_s, p_r)?;
    Ok(AllocationResult::from_report(p_s, p_r, report, Vec::new(), true))
}

/// `(omega, mu)` with `omega g^mu = 1 + g` and matching derivative at `g`.
pub fn monomial_fit(gamma_hat: f64) -> (f64, f64) {
    let mu = gamma_hat / (1.0 + gamma_hat);
    ((1.0 + gamma_hat) * gamma_hat.powf(-mu), mu)
}

/// Variable layout: `[p_S,1..p_S,K, p_R, gamma_1..gamma_K]`.
fn subproblem(coef: &SinrCoefficients, gamma_hat: &[f64], total_power: f64, theta: f64) -> GeometricProgram {
    let k = coef.k;
    let n = 2 * k + 1;
    let (pr, g) = (k, |j: usize| k + 1 + j);
    let mu = gamma_hat.iter().map(|&x| monomial_fit(x).1);
    let objective = Posynomial::new(vec![Monomial::sparse(
        n,
        1.0,
        &mu.enumerate().map(|(j, m)| (g(j), -m)).collect::<Vec<_>>(),
    )]);
    let mut constraints = Vec::with_capacity(4 * k + 2);
    for j in 0..k {
        let mut terms = Vec::with_capacity(2 * k + 2);
        for i in 0..k {
            terms.push(Monomial::sparse(n, coef.a(j, i), &[(g(j), 1.0), (i, 1.0), (j, -1.0)]));
            terms.push(Monomial::sparse(n, coef.b(j, i), &[(g(j), 1.0), (i, 1.0), (pr, -1.0), (j, -1.0)]));
        }
        terms.push(Monomial::sparse(n, coef.c[j], &[(g(j), 1.0), (pr, -1.0), (j, -1.0)]));
        terms.push(Monomial::sparse(n, coef.d[j], &[(g(j), 1.0), (j, -1.0)]));
        constraints.push(Posynomial::new(terms));
    }
    constraints.push(Posynomial::new(
        (0..=k).map(|i| Monomial::sparse(n, 1.0 / total_power, &[(i, 1.0)])).collect(),
    ));
    for j in 0..k {
        constraints.push(Posynomial::new(vec![Monomial::sparse(n, gamma_hat[j] / theta, &[(g(j), -1.0)])]));
        constraints.push(Posynomial::new(vec![Monomial::sparse(n, 1.0 / (theta * gamma_hat[j]), &[(g(j), 1.0)])]));
    }
    for i in 0..=k {
        constraints.push(Posynomial::new(vec![Monomial::sparse(n, POWER_FLOOR * total_power, &[(i, -1.0)])]));
    }
    GeometricProgram {
        vars: n,
        objective,
        constraints,
    }
}

/// Interior starting point: powers shrunk by `c = theta^(-1/8)` so the SINR
/// drops by at most `c^2`, SINR variables at `gamma_hat theta^(-1/2)`.
fn interior_start(p_s: &[f64], p_r: f64, gamma_hat: &[f64], total_power: f64, theta: f64) -> Vec<f64> {
    let c = theta.powf(-0.125);
    let floor = 10.0 * POWER_FLOOR * total_power;
    p_s.iter()
        .chain(std::iter::once(&p_r))
        .map(|&p| (c * p).max(floor))
        .chain(gamma_hat.iter().map(|&g| g / theta.sqrt()))
        .collect()
}

/// Successive geometric-programming approximation for the one-bit ADC/DAC
/// system (Case IV), started from the uniform split. Stops when the largest
/// change between the GP's SINR variables and the expansion point is below
/// `epsilon`.
pub fn successive_approx(config: &SystemConfig, total_power: f64, epsilon: f64, theta: f64) -> Result<AllocationResult> {
    check_budget(total_power)?;
    if !(epsilon > 0.0) {
        return Err(Error::config("epsilon", "must be positive"));
    }
    if !(theta > 1.0) {
        return Err(Error::config("theta", "must exceed 1"));
    }
    let coef = sinr_coefficients(config)?;
    let k = config.k;
    let start = uniform_allocation(config, total_power, HardwareCase::IV)?;
    let (mut p_s, mut p_r) = (start.p_s, start.p_r);
    let mut objective = start.sum_rate;
    let mut trace = Vec::new();
    let opts = GpOptions::default();

    for iteration in 0..MAX_ITERATIONS {
        let mut gamma_hat = coef.sinr(&p_s, p_r);
        let mut retries = 0;
        let solution = loop {
            let gp = subproblem(&coef, &gamma_hat, total_power, theta);
            let x0 = interior_start(&p_s, p_r, &gamma_hat, total_power, theta);
            match solve_gp(&gp, &x0, &opts) {
                Ok(s) => break s,
                Err(Error::Infeasible(_)) if retries < MAX_RETRIES => {
                    retries += 1;
                    gamma_hat.iter_mut().for_each(|g| *g *= 0.5);
                }
                Err(Error::NonConvergence { iterations, context }) => {
                    return Err(Error::NonConvergence {
                        iterations,
                        context: format!("GP subproblem {iteration}: {context}"),
                    })
                }
                Err(e) => return Err(e),
            }
        };
        let x = &solution.x;
        let next_p: Vec<f64> = x[..k].to_vec();
        let next_r = x[k];
        // Raising a SINR variable to its constraint boundary only lowers the
        // GP objective, so the returned point is polished that way.
        let gp_gamma: Vec<f64> = (0..k)
            .map(|j| x[k + 1 + j].max((next_p[j] / coef.xi(j, &next_p, next_r)).min(theta * gamma_hat[j])))
            .collect();
        let report = rate_at(config, HardwareCase::IV, &next_p, next_r)?;
        let change = gp_gamma.iter().zip(&gamma_hat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if report.sum_rate < objective - MONOTONE_TOL {
            // The GP optimum is only accurate to the barrier gap; a decrease
            // this small means the iterate has stopped moving.
            let report = rate_at(config, HardwareCase::IV, &p_s, p_r)?;
            return Ok(AllocationResult::from_report(p_s, p_r, report, trace, true));
        }
        objective = report.sum_rate;
        p_s = next_p;
        p_r = next_r;
        trace.push(TraceEntry {
            gamma_hat,
            gp_gamma,
            objective,
            retries,
        });
        if change < epsilon {
            return Ok(AllocationResult::from_report(p_s, p_r, report, trace, true));
        }
    }
    let report = rate_at(config, HardwareCase::IV, &p_s, p_r)?;
    Ok(AllocationResult::from_report(p_s, p_r, report, trace, false))
}
