//! The invariant suite behind the `validate` experiment.

use std::f64::consts::{FRAC_2_PI, PI};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{PilotKind, SystemConfig, REFERENCE_BETA_RD, REFERENCE_BETA_SR};
use crate::closed_form::{rate_ordering_check, rate_ratios, required_antennas, theorem1_rate, Scaling};
use crate::error::Result;
use crate::estimation::{
    build_pilot, compare_pilots, estimation_stats, lmmse_cov_general, sigma_identity, simulate_pilot_mse,
    PilotPreference,
};
use crate::numerics::{complex_gaussian, db_to_linear, mean, norm_sqr, std_error, CMatrix, Cholesky, SimRng};
use crate::power_alloc::{
    sinr_coefficients, successive_approx, uniform_allocation, DEFAULT_EPSILON, DEFAULT_THETA, MONOTONE_TOL,
};
use crate::quantizer::{arcsine_output_cov, bussgang_gain, one_bit_quantize};
use crate::relay_mc::{approx_rate_mc, exact_rate_mc};
use crate::report::HardwareCase;

/// Outcome of one check. `value` is the headline statistic compared with
/// the tolerance stated in `detail`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub detail: String,
    pub seconds: f64,
}

type CheckFn = fn(u64, usize) -> Result<(bool, f64, String)>;

/// Every check, in report order. The second argument of each function is
/// the Monte-Carlo trial count.
pub const CHECKS: [(&str, CheckFn); 11] = [
    ("arcsine-law", arcsine_law),
    ("bussgang-uncorrelated", bussgang_uncorrelated),
    ("estimation-closed-forms", estimation_closed_forms),
    ("pilot-preference-rule", pilot_preference_rule),
    ("closed-form-vs-mc", closed_form_vs_mc),
    ("exact-approx-gap", exact_approx_gap),
    ("case-ordering", case_ordering),
    ("rate-ratio-limits", rate_ratio_limits),
    ("required-antennas", required_antennas_check),
    ("power-allocation", power_allocation),
    ("fourth-moment", fourth_moment),
];

pub fn run_checks(seed: u64, trials: usize) -> Vec<Check> {
    CHECKS
        .iter()
        .enumerate()
        .map(|(i, (name, f))| {
            let start = Instant::now();
            let (passed, value, detail) = match f(seed.wrapping_add(i as u64), trials) {
                Ok(r) => r,
                Err(e) => (false, f64::NAN, format!("error: {e}")),
            };
            Check {
                name,
                passed,
                value,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

fn correlated_pair(rng: &mut SimRng, rho: f64) -> Result<[Complex64; 2]> {
    let z = complex_gaussian(rng, 2, 1.0)?;
    Ok([z[0], rho * z[0] + (1.0 - rho * rho).sqrt() * z[1]])
}

fn arcsine_law(seed: u64, _: usize) -> Result<(bool, f64, String)> {
    const N: usize = 1_000_000;
    let mut pick = SimRng::new(seed, u64::MAX);
    let rhos: Vec<f64> = (0..20).map(|_| -0.99 + 1.98 * pick.uniform()).collect();
    let errors = rhos
        .par_iter()
        .enumerate()
        .map(|(i, &rho)| {
            let mut rng = SimRng::new(seed, i as u64);
            let mut acc = 0.0;
            for _ in 0..N {
                let r = one_bit_quantize(&correlated_pair(&mut rng, rho)?);
                acc += (r[0] * r[1].conj()).re;
            }
            let r_yy = CMatrix::from_fn(2, 2, |a, b| if a == b { 1.0.into() } else { rho.into() });
            Ok((acc / N as f64 - arcsine_output_cov(&r_yy)?[(0, 1)].re).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = errors.iter().cloned().fold(0.0, f64::max);
    Ok((worst < 0.005, worst, format!("max |empirical - (2/pi) arcsin rho| over 20 rho, N = {N}; tol 0.005")))
}

fn bussgang_uncorrelated(seed: u64, _: usize) -> Result<(bool, f64, String)> {
    const N: usize = 1_000_000;
    let n = 4;
    let mut rng = SimRng::new(seed, 0);
    let b = CMatrix::from_col_major(n, n, complex_gaussian(&mut rng, n * n, 1.0)?)?;
    let raw = b.matmul(&b.adjoint())?;
    let d: Vec<f64> = raw.diag_real().iter().map(|v| 1.0 / v.sqrt()).collect();
    let r_yy = raw.scale_rows_cols(&d, &d);
    let l = Cholesky::new(&r_yy)?.factor().clone();
    let gain = bussgang_gain(&r_yy)?;
    let mut cross = vec![Complex64::new(0.0, 0.0); n * n];
    for _ in 0..N {
        let y = l.mul_vec(&complex_gaussian(&mut rng, n, 1.0)?)?;
        let r = one_bit_quantize(&y);
        for i in 0..n {
            let q = r[i] - gain[i] * y[i];
            for j in 0..n {
                cross[i * n + j] += q * y[j].conj();
            }
        }
    }
    let worst = cross.iter().map(|c| c.norm() / N as f64).fold(0.0, f64::max);
    let bound = 5.0 / (N as f64).sqrt();
    Ok((worst < bound, worst, format!("max |E q y^H| entry, N = {N}; bound 5/sqrt(N) = {bound:.1e}")))
}

fn estimation_closed_forms(seed: u64, _: usize) -> Result<(bool, f64, String)> {
    const TRIALS: usize = 10_000;
    let betas = [0.6, 0.3, 0.1, 0.9];
    let identity = build_pilot(PilotKind::Identity, 4)?;
    let mut id_err = 0.0f64;
    for p_p in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let q = lmmse_cov_general(&identity, &betas, p_p)?;
        for (k, &b) in betas.iter().enumerate() {
            let s = sigma_identity(b, 4, p_p);
            id_err = id_err.max((q[(k, k)].re - s).abs() / s);
        }
    }
    let hadamard = build_pilot(PilotKind::Hadamard, 4)?;
    let mut had_err = 0.0f64;
    for (i, p_p) in [0.1, 0.03, 0.01].into_iter().enumerate() {
        let theory = estimation_stats(PilotKind::Hadamard, &betas, p_p).mse;
        let mut rng = SimRng::new(seed, i as u64);
        let sim = simulate_pilot_mse(&hadamard, &betas, p_p, 32, TRIALS, &mut rng)?;
        for (t, s) in theory.iter().zip(&sim) {
            had_err = had_err.max((s / t - 1.0).abs());
        }
    }
    Ok((
        id_err <= 1e-10 && had_err <= 0.02,
        had_err,
        format!("identity relative error {id_err:.1e} (tol 1e-10); Hadamard MSE vs pipeline {had_err:.4} (tol 0.02) at p_p in {{0.1, 0.03, 0.01}}, M = 32, {TRIALS} trials"),
    ))
}

fn pilot_preference_rule(seed: u64, _: usize) -> Result<(bool, f64, String)> {
    let mut rng = SimRng::new(seed, 0);
    let (mut agree, mut total) = (0usize, 0usize);
    for _ in 0..100 {
        let betas: Vec<f64> = (0..8).map(|_| 10f64.powf(-2.0 + 2.0 * rng.uniform())).collect();
        let p_p = db_to_linear(-10.0 + 30.0 * rng.uniform());
        let avg = mean(&betas);
        for (b, pref) in betas.iter().zip(compare_pilots(&betas, p_p)) {
            let rule = if *b < avg {
                PilotPreference::Identity
            } else if *b > avg {
                PilotPreference::Hadamard
            } else {
                PilotPreference::Tie
            };
            total += 1;
            agree += usize::from(rule == pref);
        }
    }
    let frac = agree as f64 / total as f64;
    Ok((agree == total, frac, format!("{agree}/{total} users follow the beta-vs-mean rule")))
}

/// Sweep used by the closed-form vs Monte-Carlo comparison.
pub const MC_GRID: [(usize, usize); 9] = [
    (64, 5),
    (64, 10),
    (64, 20),
    (128, 5),
    (128, 10),
    (128, 20),
    (256, 5),
    (256, 10),
    (256, 20),
];

fn closed_form_vs_mc(seed: u64, trials: usize) -> Result<(bool, f64, String)> {
    let p = db_to_linear(10.0);
    let (mut exceed, mut total, mut worst) = (0usize, 0usize, 0.0f64);
    for (i, &(m, k)) in MC_GRID.iter().enumerate() {
        let cfg = SystemConfig::symmetric(m, k, p, p, p);
        let cf = theorem1_rate(&cfg)?;
        let mc = approx_rate_mc(&cfg, trials, &mut SimRng::new(seed, i as u64))?;
        for j in 0..k {
            let z = (cf.per_user_rate[j] - mc.per_user_rate[j]).abs() / mc.std_err[j];
            worst = worst.max(z);
            exceed += usize::from(!(z <= 2.0));
            total += 1;
        }
    }
    Ok((
        exceed == 0,
        worst,
        format!("{exceed}/{total} per-user differences exceed 2 standard errors ({trials} trials, 10 dB powers); largest |z| = {worst:.2}"),
    ))
}

fn exact_approx_gap(seed: u64, trials: usize) -> Result<(bool, f64, String)> {
    let p = db_to_linear(10.0);
    let gap = |i: u64, m: usize| -> Result<f64> {
        let cfg = SystemConfig::symmetric(m, m / 10, p, p, p);
        let rng = SimRng::new(seed, i);
        let exact = exact_rate_mc(&cfg, trials, &mut rng.clone())?;
        let approx = approx_rate_mc(&cfg, trials, &mut rng.clone())?;
        Ok(approx.sum_rate - exact.sum_rate)
    };
    let (g80, g200) = (gap(0, 80)?, gap(1, 200)?);
    let band = |g: f64| (0.15..=0.40).contains(&g);
    Ok((
        g80 > g200 && band(g80) && band(g200),
        g80 - g200,
        format!("approx - exact sum rate: {g80:.4} at M = 80, {g200:.4} at M = 200 (K = M/10, {trials} trials); band [0.15, 0.40]"),
    ))
}

fn case_ordering(_: u64, _: usize) -> Result<(bool, f64, String)> {
    let p = db_to_linear(10.0);
    let check = rate_ordering_check(&SystemConfig::symmetric(512, 5, p, p, p))?;
    let sums: Vec<String> = check.reports.iter().map(|r| format!("{:.4}", r.sum_rate)).collect();
    let margin = check
        .reports
        .windows(2)
        .map(|w| w[0].sum_rate - w[1].sum_rate)
        .fold(f64::INFINITY, f64::min);
    Ok((check.holds, margin, format!("sum rates I..IV = [{}] at M = 512, K = 5", sums.join(", "))))
}

fn rate_ratio_limits(_: u64, _: usize) -> Result<(bool, f64, String)> {
    let p = db_to_linear(10.0);
    let base = SystemConfig::symmetric(64, 5, p, p, p);
    let lim = 4.0 / (PI * PI);
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (scaling, want) in [
        (Scaling::SourcePower, [1.0, lim, lim]),
        (Scaling::RelayPower, [FRAC_2_PI, FRAC_2_PI, lim]),
    ] {
        let (d1, d2, d3) = rate_ratios(&base, scaling, 1e-3, 10_000)?;
        for (g, w) in [d1, d2, d3].iter().zip(want) {
            worst = worst.max((g / w - 1.0).abs());
        }
        parts.push(format!("{}: ({d1:.4}, {d2:.4}, {d3:.4})", scaling.as_str()));
    }
    Ok((
        worst <= 0.02,
        worst,
        format!("{} at E = 1e-3, M = 10^4; max relative deviation {worst:.4} (tol 0.02)", parts.join("; ")),
    ))
}

fn required_antennas_check(_: u64, _: usize) -> Result<(bool, f64, String)> {
    let p = db_to_linear(10.0);
    let cfg = SystemConfig::symmetric(64, 5, p, db_to_linear(-10.0), p);
    let m1 = required_antennas(&cfg, HardwareCase::I, 5.0)?;
    let m4 = required_antennas(&cfg, HardwareCase::IV, 5.0)?;
    let dev = ((m1 as f64 / 208.0 - 1.0).abs()).max((m4 as f64 / 512.0 - 1.0).abs());
    Ok((
        dev <= 0.10,
        dev,
        format!("Case I needs M = {m1} (ref 208), Case IV needs M = {m4} (ref 512) with tau_c = {}", cfg.tau_c),
    ))
}

/// Users 0 and 3 of the reference sets.
pub fn two_user_reference(m: usize) -> SystemConfig {
    let mut cfg = SystemConfig::symmetric(m, 2, 1.0, 1.0, db_to_linear(10.0));
    cfg.beta_sr = vec![REFERENCE_BETA_SR[0], REFERENCE_BETA_SR[3]];
    cfg.beta_rd = vec![REFERENCE_BETA_RD[0], REFERENCE_BETA_RD[3]];
    cfg
}

/// Five-user reference configuration at `m` antennas, `p_p = 10 dB`.
pub fn five_user_reference(m: usize) -> SystemConfig {
    let mut cfg = SystemConfig::symmetric(m, 5, 1.0, 1.0, db_to_linear(10.0));
    cfg.beta_sr = REFERENCE_BETA_SR.to_vec();
    cfg.beta_rd = REFERENCE_BETA_RD.to_vec();
    cfg
}

/// Best closed-form sum rate over the grid `p = j P_T / (n - 1)` in every
/// coordinate, restricted to `p_S,1 + p_S,2 + p_R <= P_T` and `p_R > 0`.
pub fn two_user_grid_best(config: &SystemConfig, total: f64, n: usize) -> Result<f64> {
    let coef = sinr_coefficients(config)?;
    let step = total / (n - 1) as f64;
    let pref = config.prefactor();
    let best = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for j in 0..n {
                for r in 1..n {
                    let (p, pr) = ([i as f64 * step, j as f64 * step], r as f64 * step);
                    if p[0] + p[1] + pr > total * (1.0 + 1e-12) {
                        break;
                    }
                    let rate: f64 = coef.sinr(&p, pr).iter().map(|g| (1.0 + g).log2()).sum();
                    best = best.max(pref * rate);
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

fn power_allocation(_: u64, _: usize) -> Result<(bool, f64, String)> {
    let total = db_to_linear(10.0);
    let mut ok = true;
    let mut margin = f64::INFINITY;
    let mut notes = Vec::new();
    for m in [100, 200, 300, 400, 500] {
        let cfg = five_user_reference(m);
        let a = successive_approx(&cfg, total, DEFAULT_EPSILON, DEFAULT_THETA)?;
        let monotone = a.trace.windows(2).all(|w| w[1].objective >= w[0].objective - MONOTONE_TOL);
        let best_uniform = [HardwareCase::II, HardwareCase::III, HardwareCase::IV]
            .iter()
            .map(|&c| uniform_allocation(&cfg, total, c).map(|u| u.sum_rate))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        margin = margin.min(a.sum_rate - best_uniform);
        ok &= a.converged && monotone && a.sum_rate > best_uniform;
        notes.push(format!("M = {m}: {:.4} vs {best_uniform:.4} ({} it)", a.sum_rate, a.iterations));
    }
    let cfg = two_user_reference(128);
    let a = successive_approx(&cfg, total, DEFAULT_EPSILON, DEFAULT_THETA)?;
    let grid = two_user_grid_best(&cfg, total, 200)?;
    let excess = grid / a.sum_rate - 1.0;
    ok &= excess <= 0.005;
    Ok((
        ok,
        margin,
        format!(
            "optimized vs best uniform II/III/IV: {}; K = 2 grid 200^3 beats optimum by {:.3}% (tol 0.5%)",
            notes.join(", "),
            100.0 * excess
        ),
    ))
}

fn fourth_moment(seed: u64, _: usize) -> Result<(bool, f64, String)> {
    const DRAWS: usize = 100_000;
    let (m, beta) = (64usize, 0.7);
    let samples = (0..DRAWS)
        .into_par_iter()
        .map(|t| {
            let g = complex_gaussian(&mut SimRng::new(seed, t as u64), m, beta)?;
            Ok(norm_sqr(&g).powi(2))
        })
        .collect::<Result<Vec<f64>>>()?;
    let want = (m * (m + 1)) as f64 * beta * beta;
    let z = (mean(&samples) - want) / std_error(&samples);
    Ok((z.abs() <= 3.0, z, format!("E||g||^4 = {:.2} vs M(M+1) beta^2 = {want:.2}, z = {z:.2}", mean(&samples))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_checks_pass() {
        for (name, f) in CHECKS {
            if matches!(name, "case-ordering" | "rate-ratio-limits" | "required-antennas" | "pilot-preference-rule") {
                let (ok, _, detail) = f(1, 10).unwrap();
                assert!(ok, "{name}: {detail}");
            }
        }
    }

    #[test]
    fn grid_oracle_is_feasible_only() {
        let cfg = two_user_reference(64);
        let coarse = two_user_grid_best(&cfg, 10.0, 11).unwrap();
        let fine = two_user_grid_best(&cfg, 10.0, 21).unwrap();
        assert!(fine >= coarse && coarse > 0.0);
    }
}
