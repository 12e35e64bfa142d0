//! Scenario configuration and its flat key-value file format.
//!
//! ```text
//! # comments start with '#'
//! M = 128
//! K = 5
//! tau_c = 200
//! tau_p = 5
//! p_p = 10dB
//! p_S = 10dB            # one value is broadcast to all K users
//! p_R = 10
//! beta_SR = 1, 1, 1, 1, 1
//! beta_RD = 1
//! pilot_kind = identity
//! ```
//!
//! Powers accept a `dB` suffix and are converted to linear scale once, at
//! parse time. Omitted keys keep their defaults; `tau_p` defaults to `K`.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::db_to_linear;

/// Orthogonal pilot family used for channel training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PilotKind {
    /// Users train one at a time: `Φ = √K I_K`.
    Identity,
    /// All users train simultaneously with ±1 sequences.
    Hadamard,
}

impl PilotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PilotKind::Identity => "identity",
            PilotKind::Hadamard => "hadamard",
        }
    }
}

impl FromStr for PilotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" => Ok(PilotKind::Identity),
            "hadamard" => Ok(PilotKind::Hadamard),
            other => Err(Error::config("pilot_kind", format!("unknown pilot kind `{other}`"))),
        }
    }
}

/// All scenario parameters. Powers are linear (normalized SNR, unit noise).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Relay antennas.
    pub m: usize,
    /// User pairs.
    pub k: usize,
    /// Coherence interval in symbols.
    pub tau_c: usize,
    /// Pilot length in symbols.
    pub tau_p: usize,
    pub p_p: f64,
    pub p_s: Vec<f64>,
    pub p_r: f64,
    pub beta_sr: Vec<f64>,
    pub beta_rd: Vec<f64>,
    pub pilot_kind: PilotKind,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig::symmetric(128, 5, 10.0, 10.0, 10.0)
    }
}

pub(crate) const KEYS: [&str; 10] = [
    "M", "K", "tau_c", "tau_p", "p_p", "p_S", "p_R", "beta_SR", "beta_RD", "pilot_kind",
];

impl SystemConfig {
    /// Unit large-scale fading, equal source powers, identity pilots,
    /// `tau_c = 200`, `tau_p = K`. Powers are linear.
    pub fn symmetric(m: usize, k: usize, p_s: f64, p_r: f64, p_p: f64) -> Self {
        SystemConfig {
            m,
            k,
            tau_c: 200,
            tau_p: k,
            p_p,
            p_s: vec![p_s; k],
            p_r,
            beta_sr: vec![1.0; k],
            beta_rd: vec![1.0; k],
            pilot_kind: PilotKind::Identity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::config("M", "must be at least 1"));
        }
        if self.k == 0 {
            return Err(Error::config("K", "must be at least 1"));
        }
        for (field, v) in [("p_S", &self.p_s), ("beta_SR", &self.beta_sr), ("beta_RD", &self.beta_rd)] {
            if v.len() != self.k {
                return Err(Error::config(field, format!("has {} entries, K = {}", v.len(), self.k)));
            }
        }
        if self.tau_p < self.k {
            return Err(Error::config("tau_p", format!("{} < K = {}", self.tau_p, self.k)));
        }
        if self.tau_c <= 2 * self.tau_p {
            return Err(Error::config(
                "tau_c",
                format!("{} must exceed 2 * tau_p = {}", self.tau_c, 2 * self.tau_p),
            ));
        }
        let power_ok = |x: f64| x.is_finite() && x >= 0.0;
        if !power_ok(self.p_p) {
            return Err(Error::config("p_p", "must be finite and >= 0"));
        }
        if !power_ok(self.p_r) {
            return Err(Error::config("p_R", "must be finite and >= 0"));
        }
        if !self.p_s.iter().all(|&p| power_ok(p)) {
            return Err(Error::config("p_S", "entries must be finite and >= 0"));
        }
        for (field, v) in [("beta_SR", &self.beta_sr), ("beta_RD", &self.beta_rd)] {
            if !v.iter().all(|&b| b.is_finite() && b > 0.0) {
                return Err(Error::config(field, "entries must be finite and > 0"));
            }
        }
        if self.pilot_kind == PilotKind::Hadamard {
            let n = self.tau_p;
            if !(n == 1 || n == 2 || n.is_multiple_of(4)) {
                return Err(Error::config(
                    "pilot_kind",
                    format!("no Hadamard matrix of order tau_p = {n}"),
                ));
            }
        }
        Ok(())
    }

    /// `(tau_c - 2 tau_p) / (2 tau_c)`: half-duplex relaying and training overhead.
    pub fn prefactor(&self) -> f64 {
        (self.tau_c as f64 - 2.0 * self.tau_p as f64) / (2.0 * self.tau_c as f64)
    }

    /// Copy with `k` users; per-user vectors must be uniform so they can be
    /// resized. `tau_p` follows `K`.
    pub fn with_users(&self, k: usize) -> Result<Self> {
        fn resize(field: &str, v: &[f64], k: usize) -> Result<Vec<f64>> {
            match v.first() {
                Some(&first) if v.iter().all(|&x| x == first) => Ok(vec![first; k]),
                _ => Err(Error::config(field, "per-user values differ; cannot change K")),
            }
        }
        let mut c = self.clone();
        c.p_s = resize("p_S", &self.p_s, k)?;
        c.beta_sr = resize("beta_SR", &self.beta_sr, k)?;
        c.beta_rd = resize("beta_RD", &self.beta_rd, k)?;
        c.k = k;
        c.tau_p = k;
        Ok(c)
    }

    pub fn with_antennas(&self, m: usize) -> Self {
        SystemConfig { m, ..self.clone() }
    }

    pub fn with_source_powers(&self, p: f64) -> Self {
        SystemConfig {
            p_s: vec![p; self.k],
            ..self.clone()
        }
    }

    pub fn with_relay_power(&self, p: f64) -> Self {
        SystemConfig { p_r: p, ..self.clone() }
    }

    /// Parses a config file body on top of the defaults, then validates.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        Self::from_kv_str_over(SystemConfig::default(), text)
    }

    pub fn from_kv_str_over(base: SystemConfig, text: &str) -> Result<Self> {
        let mut cfg = base;
        let mut saw_k = false;
        let mut saw_tau_p = false;
        let mut vectors: Vec<(&'static str, Vec<f64>)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config("<file>", format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            match key {
                "K" => saw_k = true,
                "tau_p" => saw_tau_p = true,
                _ => {}
            }
            if let Some(v) = cfg.set_field(key, value.trim())? {
                vectors.push(v);
            }
        }
        if saw_k && !saw_tau_p {
            cfg.tau_p = cfg.k;
        }
        for (field, v) in vectors {
            let v = if v.len() == 1 { vec![v[0]; cfg.k] } else { v };
            match field {
                "p_S" => cfg.p_s = v,
                "beta_SR" => cfg.beta_sr = v,
                _ => cfg.beta_rd = v,
            }
        }
        if saw_k {
            // Scalar fields left at their defaults follow the new K.
            for v in [&mut cfg.p_s, &mut cfg.beta_sr, &mut cfg.beta_rd] {
                if v.len() != cfg.k && !v.is_empty() && v.iter().all(|&x| x == v[0]) {
                    *v = vec![v[0]; cfg.k];
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_kv_str(&std::fs::read_to_string(path)?)
    }

    /// Applies `key=value` overrides (command-line style).
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let text: String = overrides
            .iter()
            .map(|s| {
                let s = s.as_ref();
                if s.contains('=') {
                    Ok(format!("{s}\n"))
                } else {
                    Err(Error::config(s, "override must look like key=value"))
                }
            })
            .collect::<Result<_>>()?;
        Self::from_kv_str_over(self.clone(), &text)
    }

    /// Sets one field. Vector fields are returned for deferred broadcasting.
    fn set_field(&mut self, key: &str, value: &str) -> Result<Option<(&'static str, Vec<f64>)>> {
        match key {
            "M" => self.m = parse_count(key, value)?,
            "K" => self.k = parse_count(key, value)?,
            "tau_c" => self.tau_c = parse_count(key, value)?,
            "tau_p" => self.tau_p = parse_count(key, value)?,
            "p_p" => self.p_p = parse_power(key, value)?,
            "p_R" => self.p_r = parse_power(key, value)?,
            "p_S" => return Ok(Some(("p_S", parse_list(key, value, parse_power)?))),
            "beta_SR" => return Ok(Some(("beta_SR", parse_list(key, value, parse_real)?))),
            "beta_RD" => return Ok(Some(("beta_RD", parse_list(key, value, parse_real)?))),
            "pilot_kind" => self.pilot_kind = value.parse()?,
            other => {
                return Err(Error::config(
                    other,
                    format!("unknown key (expected one of {})", KEYS.join(", ")),
                ))
            }
        }
        Ok(None)
    }

    /// Serializes to the key-value format; floats round-trip exactly.
    pub fn to_kv_string(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let _ = writeln!(s, "M = {}", self.m);
        let _ = writeln!(s, "K = {}", self.k);
        let _ = writeln!(s, "tau_c = {}", self.tau_c);
        let _ = writeln!(s, "tau_p = {}", self.tau_p);
        let _ = writeln!(s, "p_p = {:?}", self.p_p);
        let _ = writeln!(s, "p_S = {}", list(&self.p_s));
        let _ = writeln!(s, "p_R = {:?}", self.p_r);
        let _ = writeln!(s, "beta_SR = {}", list(&self.beta_sr));
        let _ = writeln!(s, "beta_RD = {}", list(&self.beta_rd));
        let _ = writeln!(s, "pilot_kind = {}", self.pilot_kind.as_str());
        s
    }
}

fn parse_count(field: &str, value: &str) -> Result<usize> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(field, format!("`{value}` is not a non-negative integer")))
}

fn parse_real(field: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(field, format!("`{value}` is not a number")))
}

/// Parses a power, accepting a trailing `dB` (case-insensitive).
pub fn parse_power(field: &str, value: &str) -> Result<f64> {
    let v = value.trim();
    let lower = v.to_ascii_lowercase();
    match lower.strip_suffix("db") {
        Some(num) => Ok(db_to_linear(parse_real(field, num)?)),
        None => parse_real(field, v),
    }
}

fn parse_list(field: &str, value: &str, f: fn(&str, &str) -> Result<f64>) -> Result<Vec<f64>> {
    value.split(',').map(|x| f(field, x)).collect()
}
