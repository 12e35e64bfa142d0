//! Experiment driver: parameter sweeps written as long-format CSV plus a
//! key-value manifest.

mod record;
pub mod validate;

pub use record::{write_records, Record, CSV_COLUMNS};

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::channel::{PilotKind, SystemConfig};
use crate::closed_form::{rate_ratios, required_power, theorem1_rate, PowerTarget, Scaling};
use crate::error::{Error, Result};
use crate::estimation::{build_pilot, estimation_stats, simulate_pilot_mse};
use crate::numerics::{db_to_linear, SimRng};
use crate::power_alloc::{successive_approx, uniform_allocation, DEFAULT_EPSILON, DEFAULT_THETA};
use crate::relay_mc::{approx_rate_mc, exact_rate_mc};
use crate::report::{HardwareCase, Method, RateReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    MseVsPp,
    RateVsK,
    RateVsM,
    RequiredPower,
    RateRatio,
    PowerAlloc,
    Validate,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::MseVsPp,
        Experiment::RateVsK,
        Experiment::RateVsM,
        Experiment::RequiredPower,
        Experiment::RateRatio,
        Experiment::PowerAlloc,
        Experiment::Validate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::MseVsPp => "mse-vs-pp",
            Experiment::RateVsK => "rate-vs-k",
            Experiment::RateVsM => "rate-vs-m",
            Experiment::RequiredPower => "required-power",
            Experiment::RateRatio => "rate-ratio",
            Experiment::PowerAlloc => "power-alloc",
            Experiment::Validate => "validate",
        }
    }

    /// What the sweep value `x` means.
    pub fn sweep_variable(self) -> &'static str {
        match self {
            Experiment::MseVsPp => "p_p_dB",
            Experiment::RateVsK => "K",
            Experiment::Validate => "check",
            _ => "M",
        }
    }

    /// Base scenario of the corresponding figure.
    pub fn preset(self) -> SystemConfig {
        let ten = db_to_linear(10.0);
        match self {
            Experiment::MseVsPp => {
                let mut c = SystemConfig::symmetric(128, 4, ten, ten, ten);
                c.beta_sr = vec![0.6, 0.3, 0.1, 0.9];
                c.beta_rd = c.beta_sr.clone();
                c
            }
            Experiment::RateVsK => SystemConfig::symmetric(128, 5, ten, ten, ten),
            Experiment::RateVsM => SystemConfig::symmetric(100, 10, ten, ten, ten),
            Experiment::RequiredPower | Experiment::RateRatio => SystemConfig::symmetric(128, 5, ten, ten, ten),
            Experiment::PowerAlloc => validate::five_user_reference(100),
            Experiment::Validate => SystemConfig::symmetric(128, 5, ten, ten, ten),
        }
    }

    pub fn default_grid(self) -> Vec<f64> {
        let range = |a: i32, b: i32, s: i32| (a..=b).step_by(s as usize).map(f64::from).collect::<Vec<_>>();
        match self {
            Experiment::MseVsPp => range(-20, 20, 5),
            Experiment::RateVsK => range(2, 20, 2),
            Experiment::RateVsM => range(50, 300, 25),
            Experiment::RequiredPower => range(100, 1000, 100),
            Experiment::RateRatio => vec![100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0, 10000.0],
            Experiment::PowerAlloc => range(100, 500, 50),
            Experiment::Validate => Vec::new(),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::config("experiment", format!("unknown experiment `{s}`")))
    }
}

/// Experiment-specific knobs; ignored where they do not apply.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentParams {
    /// Target sum rate of `required-power` (bits/s/Hz, prefactor included).
    pub target_rate: f64,
    /// Fixed source power of the `rate-ratio` source series.
    pub ratio_source_power: f64,
    /// Fixed relay power of the `rate-ratio` relay series.
    pub ratio_relay_power: f64,
    /// Budget of `power-alloc`.
    pub total_power: f64,
    /// `rate-vs-m`: use `K = round(M / ratio)` instead of the base `K`.
    pub antennas_per_user: Option<f64>,
    /// Also run the exact (arcsine-law) Monte-Carlo model.
    pub exact_mc: bool,
    pub epsilon: f64,
    pub theta: f64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            target_rate: 5.0,
            ratio_source_power: db_to_linear(-50.0),
            ratio_relay_power: db_to_linear(-40.0),
            total_power: db_to_linear(10.0),
            antennas_per_user: None,
            exact_mc: true,
            epsilon: DEFAULT_EPSILON,
            theta: DEFAULT_THETA,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub base: SystemConfig,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Keep the pilot-overhead factor on rates.
    pub prefactor: bool,
    pub params: ExperimentParams,
}

pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_SEED: u64 = 1;

impl ExperimentSpec {
    /// Preset base, default grid, 1000 trials, seed 1.
    pub fn new(experiment: Experiment) -> Self {
        ExperimentSpec {
            experiment,
            base: experiment.preset(),
            grid: experiment.default_grid(),
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            prefactor: true,
            params: ExperimentParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.experiment != Experiment::Validate && self.grid.is_empty() {
            return Err(Error::config("grid", "needs at least one value"));
        }
        if self.grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("grid", "values must be finite"));
        }
        let integral = matches!(
            self.experiment,
            Experiment::RateVsK | Experiment::RateVsM | Experiment::RequiredPower | Experiment::RateRatio | Experiment::PowerAlloc
        );
        if integral && self.grid.iter().any(|&x| x < 1.0 || x.fract() != 0.0) {
            return Err(Error::config("grid", format!("{} values must be positive integers", self.experiment.sweep_variable())));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        Ok(())
    }

    /// SHA-256 over the experiment name, base config, grid, trials, seed and
    /// parameters.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{}\n{}{:?}\n{}\n{}\n{}\n{:?}", self.experiment, self.base.to_kv_string(), self.grid, self.trials, self.seed, self.prefactor, self.params));
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses `a,b,c` or the inclusive range `start:stop:step`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| Error::config("grid", format!("`{v}` is not a number")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, s) = (num(start)?, num(stop)?, num(step)?);
            if !(s > 0.0) || b < a {
                return Err(Error::config("grid", "range needs step > 0 and stop >= start"));
            }
            let n = ((b - a) / s + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + i as f64 * s).collect())
        }
        [_] => text.split(',').filter(|v| !v.trim().is_empty()).map(num).collect(),
        _ => Err(Error::config("grid", "use `a,b,c` or `start:stop:step`")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub x: f64,
    pub records: Vec<Record>,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub points: Vec<PointResult>,
    /// Filled by `validate` only.
    pub checks: Vec<validate::Check>,
}

impl ExperimentOutput {
    pub fn records(&self) -> impl Iterator<Item = &Record> {
        self.points.iter().flat_map(|p| p.records.iter())
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs every grid point (in parallel) and returns results in grid order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    if spec.experiment == Experiment::Validate {
        return Ok(run_validate(spec));
    }
    let points = spec
        .grid
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let start = Instant::now();
            let mut rng = SimRng::new(spec.seed, i as u64);
            let records = run_point(spec, x, &mut rng)?;
            Ok(PointResult {
                x,
                records,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutput {
        points,
        checks: Vec::new(),
    })
}

fn run_validate(spec: &ExperimentSpec) -> ExperimentOutput {
    let checks = validate::run_checks(spec.seed, spec.trials);
    let name = spec.experiment.as_str();
    let points = checks
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let r = Record::new(name, &spec.base, i as f64, "pass", if c.passed { 1.0 } else { 0.0 }).series(c.name);
            let v = Record::new(name, &spec.base, i as f64, "statistic", c.value).series(c.name);
            PointResult {
                x: i as f64,
                records: vec![r, v],
                seconds: c.seconds,
            }
        })
        .collect();
    ExperimentOutput { points, checks }
}

fn run_point(spec: &ExperimentSpec, x: f64, rng: &mut SimRng) -> Result<Vec<Record>> {
    match spec.experiment {
        Experiment::MseVsPp => mse_point(spec, x, rng),
        Experiment::RateVsK => {
            let cfg = spec.base.with_users(x as usize)?;
            rate_point(spec, &cfg, x, rng)
        }
        Experiment::RateVsM => {
            let m = x as usize;
            let mut cfg = spec.base.with_antennas(m);
            if let Some(ratio) = spec.params.antennas_per_user {
                cfg = cfg.with_users(((m as f64 / ratio).round() as usize).max(1))?;
            }
            rate_point(spec, &cfg, x, rng)
        }
        Experiment::RequiredPower => required_power_point(spec, x),
        Experiment::RateRatio => rate_ratio_point(spec, x),
        Experiment::PowerAlloc => power_alloc_point(spec, x),
        Experiment::Validate => unreachable!("handled by run_validate"),
    }
}

fn mse_point(spec: &ExperimentSpec, x: f64, rng: &mut SimRng) -> Result<Vec<Record>> {
    let name = spec.experiment.as_str();
    let cfg = SystemConfig {
        p_p: db_to_linear(x),
        ..spec.base.clone()
    };
    let betas = &cfg.beta_sr;
    let mut out = Vec::new();
    for kind in [PilotKind::Identity, PilotKind::Hadamard] {
        let pilot = match build_pilot(kind, cfg.k) {
            Ok(p) => p,
            Err(Error::UnsupportedOrder(_)) => continue,
            Err(e) => return Err(e),
        };
        let theory = estimation_stats(kind, betas, cfg.p_p).mse;
        let sim = simulate_pilot_mse(&pilot, betas, cfg.p_p, cfg.m, spec.trials, rng)?;
        for j in 0..cfg.k {
            let rec = |metric_val: f64| Record::new(name, &cfg, x, "mse", metric_val).pilot(kind.as_str()).user(j);
            out.push(rec(theory[j]).series("theory").method(Method::ClosedForm));
            out.push(rec(sim[j]).series("simulation").method(Method::ExactMc));
        }
    }
    Ok(out)
}

fn push_report(out: &mut Vec<Record>, name: &str, cfg: &SystemConfig, x: f64, report: &RateReport, series: &str) {
    let mc = report.method != Method::ClosedForm;
    for j in 0..report.users() {
        let mut r = Record::new(name, cfg, x, "rate", report.per_user_rate[j])
            .series(series)
            .method(report.method)
            .hw_case(report.hw_case)
            .user(j);
        if mc {
            r = r.std_err(report.std_err[j]);
        }
        out.push(r);
    }
    let mut r = Record::new(name, cfg, x, "sum_rate", report.sum_rate)
        .series(series)
        .method(report.method)
        .hw_case(report.hw_case);
    if mc {
        r = r.std_err(report.sum_std_err);
    }
    out.push(r);
}

fn maybe_strip(spec: &ExperimentSpec, r: RateReport) -> RateReport {
    if spec.prefactor {
        r
    } else {
        r.without_prefactor()
    }
}

fn rate_point(spec: &ExperimentSpec, cfg: &SystemConfig, x: f64, rng: &mut SimRng) -> Result<Vec<Record>> {
    let name = spec.experiment.as_str();
    let mut out = Vec::new();
    let cf = maybe_strip(spec, theorem1_rate(cfg)?);
    push_report(&mut out, name, cfg, x, &cf, "theory");
    let shared = rng.clone();
    let approx = maybe_strip(spec, approx_rate_mc(cfg, spec.trials, &mut shared.clone())?);
    push_report(&mut out, name, cfg, x, &approx, "approximate");
    if spec.params.exact_mc {
        let exact = maybe_strip(spec, exact_rate_mc(cfg, spec.trials, &mut shared.clone())?);
        push_report(&mut out, name, cfg, x, &exact, "exact");
    }
    Ok(out)
}

fn required_power_point(spec: &ExperimentSpec, x: f64) -> Result<Vec<Record>> {
    let name = spec.experiment.as_str();
    let m = x as usize;
    let cfg = spec.base.with_antennas(m);
    let target = if spec.prefactor {
        spec.params.target_rate
    } else {
        spec.params.target_rate * cfg.prefactor()
    };
    let mut out = Vec::new();
    for (which, series) in [(PowerTarget::Source, "source"), (PowerTarget::Relay, "relay")] {
        for case in HardwareCase::ALL {
            let p = required_power(&cfg, case, target, which, m)?;
            let rec = Record::new(name, &cfg, x, "required_power", p)
                .series(series)
                .method(Method::ClosedForm)
                .hw_case(case);
            out.push(match which {
                PowerTarget::Source => rec.powers(Some(p), Some(cfg.p_r)),
                PowerTarget::Relay => {
                    let p_s = rec.p_s;
                    rec.powers(p_s, Some(p))
                }
            });
        }
    }
    Ok(out)
}

fn rate_ratio_point(spec: &ExperimentSpec, x: f64) -> Result<Vec<Record>> {
    let name = spec.experiment.as_str();
    let m = x as usize;
    let mut out = Vec::new();
    for (scaling, power) in [
        (Scaling::SourcePower, spec.params.ratio_source_power),
        (Scaling::RelayPower, spec.params.ratio_relay_power),
    ] {
        let cfg = scaling.apply(&spec.base, power * m as f64, m);
        let (d1, d2, d3) = rate_ratios(&spec.base, scaling, power * m as f64, m)?;
        for (metric, v) in [("delta1", d1), ("delta2", d2), ("delta3", d3)] {
            out.push(
                Record::new(name, &cfg, x, metric, v)
                    .series(scaling.as_str())
                    .method(Method::ClosedForm),
            );
        }
    }
    Ok(out)
}

fn power_alloc_point(spec: &ExperimentSpec, x: f64) -> Result<Vec<Record>> {
    let name = spec.experiment.as_str();
    let cfg = spec.base.with_antennas(x as usize);
    let total = spec.params.total_power;
    let scale = if spec.prefactor { 1.0 } else { 1.0 / cfg.prefactor() };
    let mut out = Vec::new();
    let a = successive_approx(&cfg, total, spec.params.epsilon, spec.params.theta)?;
    let opt = |metric: &str, v: f64| {
        Record::new(name, &cfg, x, metric, v)
            .series("optimized")
            .method(Method::ClosedForm)
            .hw_case(HardwareCase::IV)
            .total_power(total)
            .powers(None, Some(a.p_r))
    };
    out.push(opt("sum_rate", a.sum_rate * scale));
    for j in 0..cfg.k {
        let mut r = opt("p_S", a.p_s[j]).user(j);
        r.p_s = Some(a.p_s[j]);
        out.push(r);
    }
    out.push(opt("p_R", a.p_r));
    out.push(opt("iterations", a.iterations as f64));
    out.push(opt("converged", if a.converged { 1.0 } else { 0.0 }));
    for case in HardwareCase::ALL {
        let u = uniform_allocation(&cfg, total, case)?;
        out.push(
            Record::new(name, &cfg, x, "sum_rate", u.sum_rate * scale)
                .series("uniform")
                .method(Method::ClosedForm)
                .hw_case(case)
                .total_power(total)
                .powers(Some(u.p_s[0]), Some(u.p_r)),
        );
    }
    Ok(out)
}

/// Writes `<experiment>.csv` and `manifest.txt` into `dir` (created if
/// missing) and returns the paths written.
pub fn write_outputs(spec: &ExperimentSpec, output: &ExperimentOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{}.csv", spec.experiment));
    let records: Vec<Record> = output.records().cloned().collect();
    write_records(fs::File::create(&csv_path)?, &records)?;
    let manifest = emit_manifest(spec, output, std::slice::from_ref(&csv_path), dir)?;
    Ok(vec![csv_path, manifest])
}

/// Flat `key = value` manifest: config hash, seed, code version, wall time
/// per point and every CSV written.
pub fn emit_manifest(spec: &ExperimentSpec, output: &ExperimentOutput, csvs: &[PathBuf], dir: &Path) -> Result<PathBuf> {
    let mut s = String::new();
    let _ = writeln!(s, "experiment = {}", spec.experiment);
    let _ = writeln!(s, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "config_hash = {}", spec.config_hash());
    let _ = writeln!(s, "seed = {}", spec.seed);
    let _ = writeln!(s, "trials = {}", spec.trials);
    let _ = writeln!(s, "prefactor = {}", spec.prefactor);
    let _ = writeln!(s, "sweep = {}", spec.experiment.sweep_variable());
    for line in spec.base.to_kv_string().lines() {
        let _ = writeln!(s, "base.{line}");
    }
    for c in csvs {
        let file = c.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        let _ = writeln!(s, "csv = {file}");
    }
    for (i, p) in output.points.iter().enumerate() {
        let _ = writeln!(s, "point.{i}.x = {:?}", p.x);
        let _ = writeln!(s, "point.{i}.wall_seconds = {:.6}", p.seconds);
    }
    for c in &output.checks {
        let _ = writeln!(s, "check.{} = {}", c.name, if c.passed { "pass" } else { "fail" });
    }
    let path = dir.join("manifest.txt");
    fs::write(&path, s)?;
    Ok(path)
}
