//! Closed-form achievable rates for the four relay front-ends, hardware
//! ordering, power-scaling limits and required-power searches.
//!
//! All four cases share one SINR assembler. With estimate variances `s_k`
//! (source-relay) and `r_k` (relay-destination), `S = sum s_n r_n`,
//! `L = 1 + sum p_n beta_SR,n` and `t_k = M r_k^2 s_k + beta_RD,k S`:
//!
//! ```text
//! A_k = p_k M^4 s_k^2 r_k^2
//! B_k = p_k M^2 (M s_k^2 r_k beta_RD,k + beta_SR,k t_k)
//! C_k = M^2 sum_{i != k} p_i (M s_i^2 r_i beta_RD,k + beta_SR,i t_k)
//! D_k = M^2 t_k
//! E_k = (q_a / g_a) D_k
//! F_k = q_d M beta_RD,k / (g_a alpha_d^2)
//! G_k = (M / p_R) / (g_a alpha_d^2)
//! ```
//!
//! where `g_a`, `q_a` are the ADC gain and distortion power (`2/(pi L)`,
//! `1 - 2/pi` for one-bit, `1`, `0` for perfect ADCs) and `1/alpha_d^2` is
//! `pi x / 2` for one-bit DACs and `x` for perfect ones, with
//! `x = M (g_a + q_a) S + M g_a sum s_n r_n (M p_n s_n + L - 1)`.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::estimation::sigma_identity;
use crate::quantizer::DISTORTION_POWER;
use crate::report::{spectral_efficiency, HardwareCase, RateReport};

/// Estimate variances of both hops as seen by the relay. Perfect ADCs use
/// the unquantized LMMSE variance `pi/2 * sigma^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HopVariances {
    pub sr: Vec<f64>,
    pub rd: Vec<f64>,
}

impl HopVariances {
    pub fn for_case(config: &SystemConfig, one_bit_adc: bool) -> Self {
        let k = config.k;
        let scale = if one_bit_adc { 1.0 } else { FRAC_PI_2 };
        let v = |betas: &[f64]| betas.iter().map(|&b| scale * sigma_identity(b, k, config.p_p)).collect();
        HopVariances {
            sr: v(&config.beta_sr),
            rd: v(&config.beta_rd),
        }
    }
}

/// Diagonal large-array approximations of the ADC and DAC Bussgang gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalGains {
    /// `alpha_a^2 = 2/pi / (1 + sum p beta_SR)`.
    pub alpha_a_sq: f64,
    /// Average per-antenna power of the precoded relay signal before the DAC.
    pub alpha_hat_d: f64,
    /// `alpha_d^2 = 2 / (pi alpha_hat_d)`.
    pub alpha_d_sq: f64,
}

fn load(config: &SystemConfig) -> f64 {
    1.0 + config.p_s.iter().zip(&config.beta_sr).map(|(p, b)| p * b).sum::<f64>()
}

/// `x = M (g_a + q_a) S + M g_a sum s_n r_n (M p_n s_n + sum p beta_SR)`.
fn precoded_power(config: &SystemConfig, v: &HopVariances, g_a: f64, q_a: f64) -> f64 {
    let m = config.m as f64;
    let l1 = load(config) - 1.0;
    let mut s = 0.0;
    let mut w = 0.0;
    for n in 0..config.k {
        let sr = v.sr[n] * v.rd[n];
        s += sr;
        w += sr * (m * config.p_s[n] * v.sr[n] + l1);
    }
    m * (g_a + q_a) * s + m * g_a * w
}

impl DiagonalGains {
    /// Gains for identity-pilot one-bit estimate variances.
    pub fn new(config: &SystemConfig) -> Self {
        Self::with_variances(config, &HopVariances::for_case(config, true))
    }

    pub fn with_variances(config: &SystemConfig, v: &HopVariances) -> Self {
        let alpha_a_sq = FRAC_2_PI / load(config);
        let alpha_hat_d = precoded_power(config, v, alpha_a_sq, DISTORTION_POWER);
        DiagonalGains {
            alpha_a_sq,
            alpha_hat_d,
            alpha_d_sq: 2.0 / (PI * alpha_hat_d),
        }
    }
}

/// The SINR terms of one hardware case. For Case IV these are the terms
/// `A~ ... G~`; the other cases zero or rescale the quantization terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormTerms {
    pub hw_case: HardwareCase,
    pub tilde_a: Vec<f64>,
    pub tilde_b: Vec<f64>,
    pub tilde_c: Vec<f64>,
    pub tilde_d: Vec<f64>,
    /// ADC distortion.
    pub tilde_e: Vec<f64>,
    /// DAC distortion.
    pub tilde_f: Vec<f64>,
    /// Destination noise after relay power normalization.
    pub tilde_g: Vec<f64>,
    pub t: Vec<f64>,
    /// Per-antenna precoded power `x` (`alpha_hat_d` in Case IV).
    pub alpha_hat_d: f64,
}

impl ClosedFormTerms {
    pub fn new(config: &SystemConfig, hw_case: HardwareCase) -> Result<Self> {
        config.validate()?;
        let (k, m) = (config.k, config.m as f64);
        let v = HopVariances::for_case(config, hw_case.one_bit_adc());
        let (s, r) = (&v.sr, &v.rd);
        let p = &config.p_s;
        let l = load(config);
        let (g_a, q_a) = if hw_case.one_bit_adc() {
            (FRAC_2_PI / l, DISTORTION_POWER)
        } else {
            (1.0, 0.0)
        };
        let x = precoded_power(config, &v, g_a, q_a);
        let (inv_ad_sq, q_d) = if hw_case.one_bit_dac() {
            (FRAC_PI_2 * x, DISTORTION_POWER)
        } else {
            (x, 0.0)
        };
        let big_s: f64 = s.iter().zip(r).map(|(a, b)| a * b).sum();
        let m2 = m * m;
        let t: Vec<f64> = (0..k).map(|j| m * r[j] * r[j] * s[j] + config.beta_rd[j] * big_s).collect();
        let mut out = ClosedFormTerms {
            hw_case,
            tilde_a: Vec::with_capacity(k),
            tilde_b: Vec::with_capacity(k),
            tilde_c: Vec::with_capacity(k),
            tilde_d: Vec::with_capacity(k),
            tilde_e: Vec::with_capacity(k),
            tilde_f: Vec::with_capacity(k),
            tilde_g: Vec::with_capacity(k),
            t: t.clone(),
            alpha_hat_d: x,
        };
        for j in 0..k {
            let (bsr, brd) = (config.beta_sr[j], config.beta_rd[j]);
            out.tilde_a.push(p[j] * m2 * m2 * s[j] * s[j] * r[j] * r[j]);
            out.tilde_b.push(p[j] * m2 * (m * s[j] * s[j] * r[j] * brd + bsr * t[j]));
            let c: f64 = (0..k)
                .filter(|&i| i != j)
                .map(|i| p[i] * (m * s[i] * s[i] * r[i] * brd + config.beta_sr[i] * t[j]))
                .sum();
            out.tilde_c.push(m2 * c);
            let d = m2 * t[j];
            out.tilde_d.push(d);
            out.tilde_e.push(q_a / g_a * d);
            out.tilde_f.push(q_d * m * brd * inv_ad_sq / g_a);
            out.tilde_g.push(m / config.p_r * inv_ad_sq / g_a);
        }
        Ok(out)
    }

    pub fn denominator(&self, k: usize) -> f64 {
        self.tilde_b[k] + self.tilde_c[k] + self.tilde_d[k] + self.tilde_e[k] + self.tilde_f[k] + self.tilde_g[k]
    }

    pub fn sinr(&self) -> Vec<f64> {
        (0..self.tilde_a.len()).map(|k| self.tilde_a[k] / self.denominator(k)).collect()
    }
}

/// Closed-form rate with one-bit ADCs and DACs.
pub fn theorem1_rate(config: &SystemConfig) -> Result<RateReport> {
    corollary_rate(config, HardwareCase::IV)
}

/// Closed-form rate of any hardware case.
pub fn corollary_rate(config: &SystemConfig, hw_case: HardwareCase) -> Result<RateReport> {
    let terms = ClosedFormTerms::new(config, hw_case)?;
    Ok(RateReport::closed_form(terms.sinr(), config.prefactor(), hw_case))
}

/// Outcome of the hardware-case comparison.
#[derive(Debug, Clone)]
pub struct OrderingCheck {
    /// Reports for Cases I-IV in that order.
    pub reports: Vec<RateReport>,
    /// Cases sorted by decreasing sum rate.
    pub ordered: Vec<HardwareCase>,
    /// Whether `R_I > R_II > R_III > R_IV` holds for every user.
    pub holds: bool,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
}

impl OrderingCheck {
    /// Per-user `f2 / f1`, the large-`M` SINR ratio of Case II over Case III.
    pub fn f_ratio(&self) -> Vec<f64> {
        self.f1.iter().zip(&self.f2).map(|(a, b)| b / a).collect()
    }
}

/// Large-`M` leading coefficients of the Case II (`f1`) and Case III (`f2`)
/// SINR denominators, both normalized by the common signal term.
pub fn ordering_coefficients(config: &SystemConfig) -> (Vec<f64>, Vec<f64>) {
    let v = HopVariances::for_case(config, true);
    let (s, r, p) = (&v.sr, &v.rd, &config.p_s);
    let k = config.k;
    let l = load(config);
    let relay: f64 = (0..k).map(|i| p[i] * s[i] * s[i] * r[i]).sum();
    let mut f1 = Vec::with_capacity(k);
    let mut f2 = Vec::with_capacity(k);
    for j in 0..k {
        let (bsr, brd) = (config.beta_sr[j], config.beta_rd[j]);
        let own = p[j] * s[j] * s[j] * r[j] * brd + p[j] * r[j] * r[j] * s[j] * bsr;
        let cross: f64 = (0..k)
            .filter(|&i| i != j)
            .map(|i| p[i] * (s[j] * r[j] * r[j] * config.beta_sr[i] + s[i] * s[i] * r[i] * brd))
            .sum();
        let noise = s[j] * r[j] * r[j];
        f1.push(FRAC_2_PI * (own + cross) + noise + DISTORTION_POWER * brd * relay + relay / config.p_r);
        f2.push(own + cross + (FRAC_PI_2 - 1.0) * l * noise + relay / config.p_r);
    }
    (f1, f2)
}

/// Evaluates all four cases. A violated ordering is reported through
/// `holds`, never as an error, since the ordering is only guaranteed for
/// large `M`.
pub fn rate_ordering_check(config: &SystemConfig) -> Result<OrderingCheck> {
    let reports = HardwareCase::ALL
        .iter()
        .map(|&c| corollary_rate(config, c))
        .collect::<Result<Vec<_>>>()?;
    let mut ordered = HardwareCase::ALL.to_vec();
    ordered.sort_by(|a, b| reports[*b as usize].sum_rate.total_cmp(&reports[*a as usize].sum_rate));
    let holds = (0..config.k).all(|j| reports.windows(2).all(|w| w[0].per_user_rate[j] > w[1].per_user_rate[j]));
    let (f1, f2) = ordering_coefficients(config);
    Ok(OrderingCheck {
        reports,
        ordered,
        holds,
        f1,
        f2,
    })
}

/// Which power shrinks as `E / M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    SourcePower,
    RelayPower,
}

impl Scaling {
    pub fn as_str(self) -> &'static str {
        match self {
            Scaling::SourcePower => "source",
            Scaling::RelayPower => "relay",
        }
    }

    /// The base config with the scaled power set to `e / m` at `m` antennas.
    pub fn apply(self, base: &SystemConfig, e: f64, m: usize) -> SystemConfig {
        let c = base.with_antennas(m);
        match self {
            Scaling::SourcePower => c.with_source_powers(e / m as f64),
            Scaling::RelayPower => c.with_relay_power(e / m as f64),
        }
    }
}

/// `M -> infinity` per-user rates (prefactor applied) of Cases I and IV.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingLimit {
    pub case_i: Vec<f64>,
    pub case_iv: Vec<f64>,
}

impl ScalingLimit {
    pub fn sum(v: &[f64]) -> f64 {
        v.iter().sum()
    }
}

/// Limit SINRs under power scaling. The source limits are
/// `2/pi E sigma_SR,k^2` (Case IV) and `E sigma_hat_SR,k^2` (Case I); the
/// relay limits are `c E p_k s_k^2 r_k^2 / sum p_i s_i^2 r_i` with `c = 2/pi`
/// on one-bit variances and `c = 1` on perfect-ADC variances.
pub fn scaling_limit(base: &SystemConfig, scaling: Scaling, e: f64) -> Result<ScalingLimit> {
    if !(e > 0.0) {
        return Err(Error::Domain(format!("scaled energy {e} must be positive")));
    }
    base.validate()?;
    let pref = base.prefactor();
    let limit = |one_bit: bool| -> Vec<f64> {
        let v = HopVariances::for_case(base, one_bit);
        let c = if one_bit { FRAC_2_PI } else { 1.0 };
        let sinr: Vec<f64> = match scaling {
            Scaling::SourcePower => v.sr.iter().map(|s| c * e * s).collect(),
            Scaling::RelayPower => {
                let p = &base.p_s;
                let den: f64 = (0..base.k).map(|i| p[i] * v.sr[i] * v.sr[i] * v.rd[i]).sum();
                (0..base.k)
                    .map(|j| c * e * p[j] * (v.sr[j] * v.rd[j]).powi(2) / den)
                    .collect()
            }
        };
        sinr.into_iter().map(|x| pref * spectral_efficiency(x)).collect()
    };
    Ok(ScalingLimit {
        case_i: limit(false),
        case_iv: limit(true),
    })
}

/// `(R_II / R_I, R_III / R_I, R_IV / R_I)` on sum rates at `m` antennas with
/// the scaled power set to `e / m`.
pub fn rate_ratios(base: &SystemConfig, scaling: Scaling, e: f64, m: usize) -> Result<(f64, f64, f64)> {
    let cfg = scaling.apply(base, e, m);
    let rates = HardwareCase::ALL
        .iter()
        .map(|&c| corollary_rate(&cfg, c).map(|r| r.sum_rate))
        .collect::<Result<Vec<_>>>()?;
    if !(rates[0] > 0.0) {
        return Err(Error::Degenerate("perfect-hardware rate is zero".into()));
    }
    Ok((rates[1] / rates[0], rates[2] / rates[0], rates[3] / rates[0]))
}

/// Which power `required_power` searches over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerTarget {
    /// Common source power `p_S`.
    Source,
    Relay,
}

pub const POWER_BRACKET: (f64, f64) = (1e-6, 1e6);
pub const POWER_REL_TOL: f64 = 1e-4;

/// Smallest power (common source power or relay power) reaching
/// `target_sum_rate` at `m` antennas, by geometric bisection over
/// [`POWER_BRACKET`].
pub fn required_power(
    config: &SystemConfig,
    hw_case: HardwareCase,
    target_sum_rate: f64,
    which: PowerTarget,
    m: usize,
) -> Result<f64> {
    if target_sum_rate <= 0.0 {
        return Ok(0.0);
    }
    let base = config.with_antennas(m);
    let rate = |p: f64| -> Result<f64> {
        let c = match which {
            PowerTarget::Source => base.with_source_powers(p),
            PowerTarget::Relay => base.with_relay_power(p),
        };
        Ok(corollary_rate(&c, hw_case)?.sum_rate)
    };
    let (mut lo, mut hi) = POWER_BRACKET;
    let ceiling = rate(hi)?;
    if ceiling < target_sum_rate {
        return Err(Error::Infeasible(format!(
            "sum rate {target_sum_rate} exceeds {ceiling:.4} reached at power {hi:e} (Case {hw_case}, M = {m})"
        )));
    }
    if rate(lo)? >= target_sum_rate {
        return Ok(lo);
    }
    while hi / lo - 1.0 > POWER_REL_TOL {
        let mid = (lo * hi).sqrt();
        if rate(mid)? >= target_sum_rate {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub const MAX_ANTENNAS: usize = 1 << 20;

/// Smallest antenna count whose closed-form sum rate reaches the target.
pub fn required_antennas(config: &SystemConfig, hw_case: HardwareCase, target_sum_rate: f64) -> Result<usize> {
    let rate = |m: usize| corollary_rate(&config.with_antennas(m), hw_case).map(|r| r.sum_rate);
    if rate(1)? >= target_sum_rate {
        return Ok(1);
    }
    let mut hi = 2;
    while rate(hi)? < target_sum_rate {
        if hi >= MAX_ANTENNAS {
            return Err(Error::Infeasible(format!(
                "sum rate {target_sum_rate} not reached with {MAX_ANTENNAS} antennas (Case {hw_case})"
            )));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if rate(mid)? >= target_sum_rate {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::db_to_linear;
    use proptest::prelude::*;

    fn sym(m: usize, k: usize) -> SystemConfig {
        SystemConfig::symmetric(m, k, 10.0, 10.0, 10.0)
    }

    // Case IV terms transcribed term by term, independent of the assembler.
    fn case_iv_sinr(c: &SystemConfig) -> Vec<f64> {
        let (m, k) = (c.m as f64, c.k);
        let s: Vec<f64> = c.beta_sr.iter().map(|&b| sigma_identity(b, k, c.p_p)).collect();
        let r: Vec<f64> = c.beta_rd.iter().map(|&b| sigma_identity(b, k, c.p_p)).collect();
        let ss: f64 = (0..k).map(|n| s[n] * r[n]).sum();
        let l = 1.0 + (0..k).map(|n| c.p_s[n] * c.beta_sr[n]).sum::<f64>();
        let ps4: f64 = (0..k).map(|n| c.p_s[n] * s[n].powi(2) * r[n]).sum();
        (0..k)
            .map(|j| {
                let t = m * r[j].powi(2) * s[j] + c.beta_rd[j] * ss;
                let a = c.p_s[j] * m.powi(4) * s[j].powi(2) * r[j].powi(2);
                let b = c.p_s[j] * m.powi(2) * (m * s[j].powi(2) * r[j] * c.beta_rd[j] + c.beta_sr[j] * t);
                let cc: f64 = (0..k)
                    .filter(|&i| i != j)
                    .map(|i| c.p_s[i] * m.powi(2) * (m * s[i].powi(2) * r[i] * c.beta_rd[j] + c.beta_sr[i] * t))
                    .sum();
                let d = m.powi(3) * s[j] * r[j].powi(2) + m.powi(2) * c.beta_rd[j] * ss;
                let e = (PI / 2.0 - 1.0) * l * m.powi(2) * t;
                let f = c.beta_rd[j] * (PI / 2.0 - 1.0) * m.powi(3) * ps4
                    + c.beta_rd[j] * m.powi(2) * PI / 2.0 * (PI / 2.0 - 1.0) * l * ss;
                let g = m.powi(3) * PI / (2.0 * c.p_r) * ps4 + m.powi(2) * PI * PI / (4.0 * c.p_r) * l * ss;
                a / (b + cc + d + e + f + g)
            })
            .collect()
    }

    #[test]
    fn case_iv_matches_transcription() {
        let mut c = sym(100, 4);
        c.beta_sr = vec![0.6, 0.3, 0.1, 0.9];
        c.beta_rd = vec![0.2, 0.5, 1.1, 0.4];
        c.p_s = vec![1.0, 3.0, 0.5, 7.0];
        let got = theorem1_rate(&c).unwrap().sinr;
        for (g, w) in got.iter().zip(case_iv_sinr(&c)) {
            assert!((g / w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn case_iii_rescales_relay_noise() {
        let c = sym(64, 3);
        let iv = ClosedFormTerms::new(&c, HardwareCase::IV).unwrap();
        let iii = ClosedFormTerms::new(&c, HardwareCase::III).unwrap();
        for j in 0..3 {
            assert!(iii.tilde_f[j] == 0.0);
            assert!((iii.tilde_g[j] - FRAC_2_PI * iv.tilde_g[j]).abs() < 1e-9 * iv.tilde_g[j]);
            assert_eq!(iii.tilde_e[j], iv.tilde_e[j]);
        }
    }

    #[test]
    fn perfect_hardware_has_no_distortion_terms() {
        let c = sym(64, 3);
        let i = ClosedFormTerms::new(&c, HardwareCase::I).unwrap();
        let m = 64.0;
        let s = FRAC_PI_2 * sigma_identity(1.0, 3, 10.0);
        // alpha~_d = M K s^2 + M K s^2 (M p s + K p)
        let x = m * 3.0 * s * s + m * 3.0 * s * s * (m * 10.0 * s + 30.0);
        for j in 0..3 {
            assert_eq!(i.tilde_e[j], 0.0);
            assert_eq!(i.tilde_f[j], 0.0);
            assert!((i.tilde_g[j] / (x * m / 10.0) - 1.0).abs() < 1e-12);
        }
        let ii = ClosedFormTerms::new(&c, HardwareCase::II).unwrap();
        assert!((ii.tilde_f[0] / ((FRAC_PI_2 - 1.0) * m * x) - 1.0).abs() < 1e-12);
        assert!((ii.tilde_g[0] / (PI * x / (2.0 * 10.0 / m)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ordering_at_large_m() {
        let chk = rate_ordering_check(&sym(512, 5)).unwrap();
        assert!(chk.holds);
        use HardwareCase::*;
        assert_eq!(chk.ordered, vec![I, II, III, IV]);
        assert!(chk.f_ratio().iter().all(|&r| r > 1.0));
        let big_pr = rate_ordering_check(&sym(512, 5).with_relay_power(1e12)).unwrap();
        assert!(big_pr.f_ratio().iter().all(|&r| r > 1.0));
    }

    #[test]
    fn zero_source_power_gives_zero_rates() {
        let chk = rate_ordering_check(&sym(64, 3).with_source_powers(0.0)).unwrap();
        assert!(chk.reports.iter().all(|r| r.sum_rate == 0.0));
        assert!(!chk.holds);
    }

    #[test]
    fn interference_limited_ceiling() {
        let a = theorem1_rate(&sym(128, 5).with_source_powers(1e6)).unwrap().sum_rate;
        let b = theorem1_rate(&sym(128, 5).with_source_powers(1e7)).unwrap().sum_rate;
        assert!((b / a - 1.0).abs() < 1e-3);
    }

    #[test]
    fn source_scaling_limit_small_energy() {
        let base = sym(128, 5);
        let lim = scaling_limit(&base, Scaling::SourcePower, 1e-3).unwrap();
        let s = sigma_identity(1.0, 5, 10.0);
        let lin = base.prefactor() * FRAC_2_PI * 1e-3 * s / std::f64::consts::LN_2;
        assert!((lim.case_iv[0] / lin - 1.0).abs() < 1e-3);
        assert!(scaling_limit(&base, Scaling::SourcePower, 0.0).is_err());
    }

    #[test]
    fn relay_scaling_limit_symmetric() {
        let base = sym(128, 5);
        let e = 2.0;
        let lim = scaling_limit(&base, Scaling::RelayPower, e).unwrap();
        let s = sigma_identity(1.0, 5, 10.0);
        let sinr = 2.0 * e / PI * s.powi(4) / (5.0 * s.powi(3));
        assert!((lim.case_iv[2] - base.prefactor() * spectral_efficiency(sinr)).abs() < 1e-12);
    }

    #[test]
    fn finite_m_approaches_limits() {
        let base = sym(128, 5);
        for (sc, e) in [(Scaling::SourcePower, 1.0), (Scaling::RelayPower, 1.0)] {
            let lim = scaling_limit(&base, sc, e).unwrap();
            let c = sc.apply(&base, e, 10_000);
            let iv = theorem1_rate(&c).unwrap().sum_rate;
            let i = corollary_rate(&c, HardwareCase::I).unwrap().sum_rate;
            assert!((iv / ScalingLimit::sum(&lim.case_iv) - 1.0).abs() < 0.01, "{sc:?} IV");
            assert!((i / ScalingLimit::sum(&lim.case_i) - 1.0).abs() < 0.01, "{sc:?} I");
        }
    }

    #[test]
    fn ratio_limits() {
        let base = sym(128, 5);
        let (d1, d2, d3) = rate_ratios(&base, Scaling::SourcePower, 1e-3, 10_000).unwrap();
        let f = 4.0 / (PI * PI);
        assert!((d1 - 1.0).abs() < 0.02 && (d2 / f - 1.0).abs() < 0.02 && (d3 / f - 1.0).abs() < 0.02);
        let (d1, d2, d3) = rate_ratios(&base, Scaling::RelayPower, 1e-3, 10_000).unwrap();
        assert!((d1 / FRAC_2_PI - 1.0).abs() < 0.02 && (d2 / FRAC_2_PI - 1.0).abs() < 0.02);
        assert!((d3 / f - 1.0).abs() < 0.02);
    }

    #[test]
    fn required_antennas_reference() {
        let base = SystemConfig::symmetric(128, 5, db_to_linear(10.0), db_to_linear(-10.0), db_to_linear(10.0));
        assert_eq!(required_antennas(&base, HardwareCase::I, 5.0).unwrap(), 208);
        assert_eq!(required_antennas(&base, HardwareCase::IV, 5.0).unwrap(), 512);
    }

    #[test]
    fn required_power_behaviour() {
        let base = sym(128, 5);
        assert_eq!(required_power(&base, HardwareCase::IV, 0.0, PowerTarget::Source, 128).unwrap(), 0.0);
        let p1 = required_power(&base, HardwareCase::IV, 5.0, PowerTarget::Source, 128).unwrap();
        let p2 = required_power(&base, HardwareCase::IV, 5.0, PowerTarget::Source, 256).unwrap();
        assert!(p2 < p1);
        let r = corollary_rate(&base.with_source_powers(p1), HardwareCase::IV).unwrap().sum_rate;
        assert!((5.0..5.01).contains(&r));
        assert!(matches!(
            required_power(&base, HardwareCase::IV, 100.0, PowerTarget::Source, 128),
            Err(Error::Infeasible(_))
        ));
    }

    proptest! {
        #[test]
        fn monotone_in_m_and_relay_power(
            m in 8usize..400, k in 1usize..8, ps in 0.1f64..100.0, pr in 0.1f64..100.0, pp in 0.1f64..100.0,
        ) {
            let c = SystemConfig::symmetric(m, k, ps, pr, pp);
            for case in HardwareCase::ALL {
                let r = corollary_rate(&c, case).unwrap();
                let rm = corollary_rate(&c.with_antennas(2 * m), case).unwrap();
                let rp = corollary_rate(&c.with_relay_power(2.0 * pr), case).unwrap();
                for j in 0..k {
                    prop_assert!(rm.per_user_rate[j] >= r.per_user_rate[j]);
                    prop_assert!(rp.per_user_rate[j] >= r.per_user_rate[j]);
                }
            }
        }

        #[test]
        fn ratios_in_unit_interval(e in 1e-3f64..10.0, m in 16usize..2000) {
            for sc in [Scaling::SourcePower, Scaling::RelayPower] {
                let (a, b, c) = rate_ratios(&sym(128, 4), sc, e, m).unwrap();
                for d in [a, b, c] {
                    prop_assert!(d > 0.0 && d <= 1.0 + 1e-12);
                }
            }
        }
    }
}
