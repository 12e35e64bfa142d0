//! Posynomial form of the one-bit ADC/DAC SINR.
//!
//! The closed-form SINR is rewritten as `gamma_k = p_k / xi_k` with
//!
//! ```text
//! xi_k = sum_i a_ki p_i + (sum_i b_ki p_i + c_k) / p_R + d_k
//! ```
//!
//! Dividing the closed-form denominator by `M^4 s_k^2 r_k^2` and collecting
//! powers gives, with `S = sum s_n r_n`,
//!
//! ```text
//! a_ki = pi/2 (beta_RD,k s_i^2 r_i + beta_SR,i s_k r_k^2) / (M s_k^2 r_k^2)
//!        + pi^2/4 beta_SR,i beta_RD,k S / (M^2 s_k^2 r_k^2)
//! b_ki = (pi/2 M s_i^2 r_i + pi^2/4 beta_SR,i S) / (M^2 s_k^2 r_k^2)
//! c_k  = pi^2/4 S / (M^2 s_k^2 r_k^2)
//! d_k  = pi / (2 M s_k) + pi^2/4 beta_RD,k S / (M^2 s_k^2 r_k^2)
//! ```

use std::f64::consts::{FRAC_PI_2, PI};

use crate::channel::SystemConfig;
use crate::closed_form::HopVariances;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SinrCoefficients {
    /// Row-major `K x K`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub k: usize,
}

impl SinrCoefficients {
    pub fn a(&self, k: usize, i: usize) -> f64 {
        self.a[k * self.k + i]
    }

    pub fn b(&self, k: usize, i: usize) -> f64 {
        self.b[k * self.k + i]
    }

    /// `xi_k(p_S, p_R)`.
    pub fn xi(&self, k: usize, p_s: &[f64], p_r: f64) -> f64 {
        let mut lin = 0.0;
        let mut relay = self.c[k];
        for (i, &p) in p_s.iter().enumerate() {
            lin += self.a(k, i) * p;
            relay += self.b(k, i) * p;
        }
        lin + relay / p_r + self.d[k]
    }

    pub fn sinr(&self, p_s: &[f64], p_r: f64) -> Vec<f64> {
        (0..self.k).map(|k| p_s[k] / self.xi(k, p_s, p_r)).collect()
    }
}

const QUARTER_PI_SQ: f64 = PI * PI / 4.0;

/// Coefficients for the configuration's `M`, betas and pilot power; the
/// configured powers are ignored.
pub fn sinr_coefficients(config: &SystemConfig) -> Result<SinrCoefficients> {
    config.validate()?;
    if config.p_p <= 0.0 {
        return Err(Error::config("p_p", "must be positive for power allocation"));
    }
    let v = HopVariances::for_case(config, true);
    let (s, r) = (&v.sr, &v.rd);
    let (k, m) = (config.k, config.m as f64);
    let big_s: f64 = s.iter().zip(r).map(|(a, b)| a * b).sum();
    let mut out = SinrCoefficients {
        a: vec![0.0; k * k],
        b: vec![0.0; k * k],
        c: vec![0.0; k],
        d: vec![0.0; k],
        k,
    };
    for j in 0..k {
        let norm = m * m * s[j] * s[j] * r[j] * r[j];
        let brd = config.beta_rd[j];
        for i in 0..k {
            let bsr = config.beta_sr[i];
            out.a[j * k + i] = FRAC_PI_2 * m * (brd * s[i] * s[i] * r[i] + bsr * s[j] * r[j] * r[j]) / norm
                + QUARTER_PI_SQ * bsr * brd * big_s / norm;
            out.b[j * k + i] = (FRAC_PI_2 * m * s[i] * s[i] * r[i] + QUARTER_PI_SQ * bsr * big_s) / norm;
        }
        out.c[j] = QUARTER_PI_SQ * big_s / norm;
        out.d[j] = PI / (2.0 * m * s[j]) + QUARTER_PI_SQ * brd * big_s / norm;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::theorem1_rate;
    use crate::numerics::SimRng;

    #[test]
    fn matches_closed_form_sinr() {
        let mut rng = SimRng::new(42, 0);
        let mut cfg = SystemConfig::symmetric(96, 4, 1.0, 1.0, 5.0);
        cfg.beta_sr = vec![0.6, 0.3, 0.1, 0.9];
        cfg.beta_rd = vec![0.2, 1.3, 0.5, 0.05];
        let coef = sinr_coefficients(&cfg).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let p: Vec<f64> = (0..4).map(|_| 10f64.powf(4.0 * rng.uniform() - 2.0)).collect();
            let pr = 10f64.powf(4.0 * rng.uniform() - 2.0);
            let mut c = cfg.clone();
            c.p_s = p.clone();
            c.p_r = pr;
            let want = theorem1_rate(&c).unwrap().sinr;
            for (g, w) in coef.sinr(&p, pr).iter().zip(&want) {
                worst = worst.max((g / w - 1.0).abs());
            }
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn single_user_diagonal() {
        let cfg = SystemConfig::symmetric(64, 1, 1.0, 1.0, 10.0);
        let coef = sinr_coefficients(&cfg).unwrap();
        let s = crate::estimation::sigma_identity(1.0, 1, 10.0);
        let m = 64.0;
        let want = PI / (2.0 * m * s * s) * (2.0 * s) + PI * PI / (4.0 * m * m * s.powi(4)) * s * s;
        assert!((coef.a(0, 0) / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_users_permutation_invariant() {
        let coef = sinr_coefficients(&SystemConfig::symmetric(64, 3, 1.0, 1.0, 10.0)).unwrap();
        for (k, i) in [(0, 1), (1, 2), (2, 0)] {
            assert!((coef.a(k, i) - coef.a(1, 0)).abs() < 1e-15 * coef.a(1, 0).max(1.0));
            assert_eq!(coef.a(k, k), coef.a(0, 0));
        }
        assert!(coef.a.iter().chain(&coef.b).chain(&coef.c).chain(&coef.d).all(|&x| x > 0.0));
    }
}
