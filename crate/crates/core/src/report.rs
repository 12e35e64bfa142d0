//! Rate reports shared by the Monte-Carlo and closed-form evaluators.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How a rate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ExactMc,
    ApproxMc,
    ClosedForm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactMc => "exact-mc",
            Method::ApproxMc => "approx-mc",
            Method::ClosedForm => "closed-form",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relay front-end resolution. Case I: perfect ADCs and DACs; Case II:
/// perfect ADCs, one-bit DACs; Case III: one-bit ADCs, perfect DACs;
/// Case IV: one-bit ADCs and DACs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HardwareCase {
    I,
    II,
    III,
    IV,
}

impl HardwareCase {
    pub const ALL: [HardwareCase; 4] = [HardwareCase::I, HardwareCase::II, HardwareCase::III, HardwareCase::IV];

    pub fn from_converters(one_bit_adc: bool, one_bit_dac: bool) -> Self {
        match (one_bit_adc, one_bit_dac) {
            (false, false) => HardwareCase::I,
            (false, true) => HardwareCase::II,
            (true, false) => HardwareCase::III,
            (true, true) => HardwareCase::IV,
        }
    }

    pub fn one_bit_adc(self) -> bool {
        matches!(self, HardwareCase::III | HardwareCase::IV)
    }

    pub fn one_bit_dac(self) -> bool {
        matches!(self, HardwareCase::II | HardwareCase::IV)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HardwareCase::I => "I",
            HardwareCase::II => "II",
            HardwareCase::III => "III",
            HardwareCase::IV => "IV",
        }
    }
}

impl fmt::Display for HardwareCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HardwareCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(HardwareCase::I),
            "II" | "2" => Ok(HardwareCase::II),
            "III" | "3" => Ok(HardwareCase::III),
            "IV" | "4" => Ok(HardwareCase::IV),
            other => Err(Error::config("hw_case", format!("unknown hardware case `{other}`"))),
        }
    }
}

/// Per-user and sum rates in bits/s/Hz. `prefactor` is the pilot-overhead
/// factor `(tau_c - 2 tau_p) / (2 tau_c)`, already applied to the rates.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub per_user_rate: Vec<f64>,
    pub sinr: Vec<f64>,
    pub sum_rate: f64,
    pub method: Method,
    pub hw_case: HardwareCase,
    pub trials: usize,
    /// Standard error of each per-user rate; zeros for closed forms, NaN
    /// with fewer than two trials.
    pub std_err: Vec<f64>,
    pub sum_std_err: f64,
    pub prefactor: f64,
}

/// `log2(1 + sinr)`.
pub fn spectral_efficiency(sinr: f64) -> f64 {
    sinr.ln_1p() / LN_2
}

impl RateReport {
    pub fn closed_form(sinr: Vec<f64>, prefactor: f64, hw_case: HardwareCase) -> Self {
        let per_user_rate: Vec<f64> = sinr.iter().map(|&s| prefactor * spectral_efficiency(s)).collect();
        let k = sinr.len();
        RateReport {
            sum_rate: per_user_rate.iter().sum(),
            per_user_rate,
            sinr,
            method: Method::ClosedForm,
            hw_case,
            trials: 0,
            std_err: vec![0.0; k],
            sum_std_err: 0.0,
            prefactor,
        }
    }

    pub fn users(&self) -> usize {
        self.per_user_rate.len()
    }

    /// The same report with the pilot-overhead factor removed.
    pub fn without_prefactor(&self) -> Self {
        let f = self.prefactor;
        let scale = |v: &[f64]| v.iter().map(|x| x / f).collect::<Vec<_>>();
        RateReport {
            per_user_rate: scale(&self.per_user_rate),
            sum_rate: self.sum_rate / f,
            std_err: scale(&self.std_err),
            sum_std_err: self.sum_std_err / f,
            prefactor: 1.0,
            ..self.clone()
        }
    }
}
