//! Monte-Carlo evaluation of the achievable rate with one-bit ADCs and DACs.
//!
//! Per channel draw the relay chain is linearized as
//! `x~ = A_d W (A_a y + q_a) + q_d`, `W = conj(G^_RD) G^_SR^H`. With the row
//! vector `h_k = (A_d g_RD,k)^T W`, `u_k = h_k A_a` and `s_ki = u_k g_SR,i`,
//! destination `k` sees
//!
//! ```text
//! A_k = p_k |E s_kk|^2
//! B_k = p_k Var(s_kk)
//! C_k = sum_{i != k} p_i E|s_ki|^2
//! D_k = E ||u_k||^2             (relay noise)
//! E_k = E h_k R_qa h_k^H        (ADC distortion)
//! F_k = E g_RD,k^T R_qd g_RD,k^* (DAC distortion)
//! SINR_k = A_k / (B_k + C_k + D_k + E_k + F_k + M / p_R)
//! ```
//!
//! The last term is the destination noise after the relay scales its unit
//! power one-bit outputs by `sqrt(p_R / M)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{generate_channels, ChannelSet, SystemConfig};
use crate::closed_form::{DiagonalGains, HopVariances};
use crate::error::{Error, Result};
use crate::estimation::estimation_stats;
use crate::numerics::{dotc, dotu, mean, norm_sqr, std_error, CMatrix, SimRng};
use crate::quantizer::{quantization_noise_cov, QuantizerStats, DISTORTION_POWER};
use crate::report::{spectral_efficiency, HardwareCase, Method, RateReport};

/// Largest accepted `|Im| / max(1, |Re|)` of the distortion quadratic forms.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;

/// Second-order statistics of one realization of the relay chain.
#[derive(Debug, Clone)]
pub struct RelayChain {
    /// `G_SR P G_SR^H + I`.
    pub r_yy: CMatrix,
    pub adc: QuantizerStats,
    /// `W R_rr W^H`, the covariance at the DAC input.
    pub r_xx: CMatrix,
    pub dac: QuantizerStats,
}

/// `W = conj(G^_RD) G^_SR^H`.
pub fn beamformer(ch: &ChannelSet) -> Result<CMatrix> {
    ch.ghat_rd.conj().matmul(&ch.ghat_sr.adjoint())
}

/// Evaluates the relay chain for one channel draw with analytic quantizer
/// statistics at both converters.
pub fn relay_chain_once(ch: &ChannelSet, config: &SystemConfig) -> Result<RelayChain> {
    if config.p_s.len() != ch.users() {
        return Err(Error::DimensionMismatch(format!(
            "{} source powers for {} users",
            config.p_s.len(),
            ch.users()
        )));
    }
    let m = ch.antennas();
    let gp = ch.g_sr.scale_rows_cols(&vec![1.0; m], &config.p_s);
    let mut r_yy = gp.matmul(&ch.g_sr.adjoint())?;
    for i in 0..m {
        r_yy[(i, i)] += 1.0;
    }
    r_yy.symmetrize();
    let adc = quantization_noise_cov(&r_yy)?;
    // W R_rr W^H through the K x K core G^_SR^H R_rr G^_SR.
    let core = ch.ghat_sr.adjoint_matmul(&adc.output_cov.matmul(&ch.ghat_sr)?)?;
    let mut r_xx = ch.ghat_rd.conj().matmul(&core)?.matmul(&ch.ghat_rd.transpose())?;
    r_xx.symmetrize();
    let dac = quantization_noise_cov(&r_xx)?;
    Ok(RelayChain { r_yy, adc, r_xx, dac })
}

/// Converter model used inside one Monte-Carlo trial.
enum Converters<'a> {
    Exact(&'a RelayChain),
    Diagonal { a_a: f64, a_d: f64 },
}

/// Per-trial quantities of every destination.
#[derive(Debug, Clone)]
pub struct TrialTerms {
    /// `s_ki`, row `k` for destination `k`.
    pub s: CMatrix,
    pub d: Vec<f64>,
    pub e: Vec<f64>,
    pub f: Vec<f64>,
}

fn real_form(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > IMAG_RESIDUE_TOL * z.re.abs().max(1.0) {
        return Err(Error::Degenerate(format!("{what} quadratic form has imaginary part {}", z.im)));
    }
    Ok(z.re.abs())
}

fn trial_terms(ch: &ChannelSet, conv: Converters<'_>) -> Result<TrialTerms> {
    let (m, k) = (ch.antennas(), ch.users());
    let (a_a, a_d): (Vec<f64>, Vec<f64>) = match &conv {
        Converters::Exact(chain) => (chain.adc.gain.clone(), chain.dac.gain.clone()),
        Converters::Diagonal { a_a, a_d } => (vec![*a_a; m], vec![*a_d; m]),
    };
    let mut out = TrialTerms {
        s: CMatrix::zeros(k, k),
        d: Vec::with_capacity(k),
        e: Vec::with_capacity(k),
        f: Vec::with_capacity(k),
    };
    let mut v = vec![Complex64::new(0.0, 0.0); m];
    let mut h = vec![Complex64::new(0.0, 0.0); m];
    let mut u = vec![Complex64::new(0.0, 0.0); m];
    for kk in 0..k {
        let g_rd = ch.g_rd.col(kk);
        for ((vi, g), a) in v.iter_mut().zip(g_rd).zip(&a_d) {
            *vi = g * a;
        }
        h.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for j in 0..k {
            let w = dotc(ch.ghat_rd.col(j), &v);
            for (hm, g) in h.iter_mut().zip(ch.ghat_sr.col(j)) {
                *hm += w * g.conj();
            }
        }
        for ((ui, hi), a) in u.iter_mut().zip(&h).zip(&a_a) {
            *ui = hi * a;
        }
        for i in 0..k {
            out.s[(kk, i)] = dotu(&u, ch.g_sr.col(i));
        }
        out.d.push(norm_sqr(&u));
        let (e, f) = match &conv {
            Converters::Exact(chain) => {
                let hc: Vec<Complex64> = h.iter().map(|z| z.conj()).collect();
                let gc: Vec<Complex64> = g_rd.iter().map(|z| z.conj()).collect();
                (
                    real_form(chain.adc.noise_cov.quad_form(&hc), "ADC distortion")?,
                    real_form(chain.dac.noise_cov.quad_form(&gc), "DAC distortion")?,
                )
            }
            Converters::Diagonal { .. } => (DISTORTION_POWER * norm_sqr(&h), DISTORTION_POWER * norm_sqr(g_rd)),
        };
        out.e.push(e);
        out.f.push(f);
    }
    Ok(out)
}

/// Channel-averaged terms of the SINR, one entry per destination.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTerms {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub e: Vec<f64>,
    pub f: Vec<f64>,
    /// Destination-noise term `M / p_R`.
    pub noise: f64,
}

impl RateTerms {
    pub fn sinr(&self) -> Vec<f64> {
        (0..self.a.len())
            .map(|k| self.a[k] / (self.b[k] + self.c[k] + self.d[k] + self.e[k] + self.f[k] + self.noise))
            .collect()
    }
}

/// Monte-Carlo terms together with the report built from them.
#[derive(Debug, Clone)]
pub struct McOutcome {
    pub terms: RateTerms,
    pub report: RateReport,
}

const STATS: usize = 7;

/// Means, SINR and delta-method standard errors. Per-user SINR depends on
/// the means of `(Re s_kk, Im s_kk, |s_kk|^2, C, D, E, F)`; the rate
/// influence of each trial is the gradient applied to its deviation.
fn assemble(trials: &[TrialTerms], config: &SystemConfig, method: Method) -> McOutcome {
    let k = config.k;
    let n = trials.len();
    let p = &config.p_s;
    let noise = config.m as f64 / config.p_r;
    let pref = config.prefactor();
    let mut terms = RateTerms {
        a: vec![0.0; k],
        b: vec![0.0; k],
        c: vec![0.0; k],
        d: vec![0.0; k],
        e: vec![0.0; k],
        f: vec![0.0; k],
        noise,
    };
    let mut influence_sum = vec![0.0; n];
    let mut std_err = vec![0.0; k];
    let mut sinr = vec![0.0; k];
    for j in 0..k {
        let cols: Vec<Vec<f64>> = (0..STATS)
            .map(|q| {
                trials
                    .iter()
                    .map(|t| {
                        let z = t.s[(j, j)];
                        match q {
                            0 => z.re,
                            1 => z.im,
                            2 => z.norm_sqr(),
                            3 => (0..k).filter(|&i| i != j).map(|i| p[i] * t.s[(j, i)].norm_sqr()).sum(),
                            4 => t.d[j],
                            5 => t.e[j],
                            _ => t.f[j],
                        }
                    })
                    .collect()
            })
            .collect();
        let mu: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
        let sig = mu[0] * mu[0] + mu[1] * mu[1];
        let a = p[j] * sig;
        let b = (p[j] * (mu[2] - sig)).max(0.0);
        let den = b + mu[3] + mu[4] + mu[5] + mu[6] + noise;
        terms.a[j] = a;
        terms.b[j] = b;
        terms.c[j] = mu[3];
        terms.d[j] = mu[4];
        terms.e[j] = mu[5];
        terms.f[j] = mu[6];
        let x = if den.is_finite() { a / den } else { 0.0 };
        sinr[j] = x;
        if !den.is_finite() || den <= 0.0 {
            continue;
        }
        let d2 = den * den;
        let grad = [
            2.0 * p[j] * mu[0] * (den + a) / d2,
            2.0 * p[j] * mu[1] * (den + a) / d2,
            -a * p[j] / d2,
            -a / d2,
            -a / d2,
            -a / d2,
            -a / d2,
        ];
        let scale = pref / ((1.0 + x) * std::f64::consts::LN_2);
        let infl: Vec<f64> = (0..n)
            .map(|t| scale * (0..STATS).map(|q| grad[q] * (cols[q][t] - mu[q])).sum::<f64>())
            .collect();
        std_err[j] = std_error(&infl);
        for (s, v) in influence_sum.iter_mut().zip(&infl) {
            *s += v;
        }
    }
    let per_user_rate: Vec<f64> = sinr.iter().map(|&x| pref * spectral_efficiency(x)).collect();
    let report = RateReport {
        sum_rate: per_user_rate.iter().sum(),
        per_user_rate,
        sinr,
        method,
        hw_case: HardwareCase::IV,
        trials: n,
        std_err,
        sum_std_err: std_error(&influence_sum),
        prefactor: pref,
    };
    McOutcome { terms, report }
}

/// Runs `trials` independent channel draws; trial `t` uses stream `t` of a
/// seed forked from `rng`, so the result does not depend on scheduling.
pub fn rate_terms_mc(config: &SystemConfig, trials: usize, rng: &mut SimRng, method: Method) -> Result<McOutcome> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    let seed = rng.fork_seed();
    let diagonal = match method {
        Method::ExactMc => None,
        Method::ApproxMc => {
            let sr = estimation_stats(config.pilot_kind, &config.beta_sr, config.p_p).est_var;
            let rd = estimation_stats(config.pilot_kind, &config.beta_rd, config.p_p).est_var;
            Some(DiagonalGains::with_variances(config, &HopVariances { sr, rd }))
        }
        Method::ClosedForm => return Err(Error::config("method", "closed-form is not a Monte-Carlo method")),
    };
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut trng = SimRng::new(seed, t as u64);
            let ch = generate_channels(config, &mut trng)?;
            match diagonal {
                None => trial_terms(&ch, Converters::Exact(&relay_chain_once(&ch, config)?)),
                Some(g) => trial_terms(
                    &ch,
                    Converters::Diagonal {
                        a_a: g.alpha_a_sq.sqrt(),
                        a_d: g.alpha_d_sq.sqrt(),
                    },
                ),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(&per_trial, config, method))
}

/// Exact rate: arcsine-law converter statistics per realization.
pub fn exact_rate_mc(config: &SystemConfig, trials: usize, rng: &mut SimRng) -> Result<RateReport> {
    Ok(rate_terms_mc(config, trials, rng, Method::ExactMc)?.report)
}

/// Approximate rate: diagonal large-array converter statistics.
pub fn approx_rate_mc(config: &SystemConfig, trials: usize, rng: &mut SimRng) -> Result<RateReport> {
    Ok(rate_terms_mc(config, trials, rng, Method::ApproxMc)?.report)
}
