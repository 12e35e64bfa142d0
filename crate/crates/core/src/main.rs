use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use onebit_relay::channel::{parse_power, SystemConfig};
use onebit_relay::experiments::{parse_grid, run_experiment, write_outputs, Experiment, ExperimentSpec};
use onebit_relay::{Error, Result};

/// Simulation and closed-form analysis of multipair AF relaying with
/// one-bit ADCs and DACs.
///
/// Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure
/// (including a failed validate check), 3 infeasible target.
#[derive(Parser)]
#[command(name = "onebit-relay", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-user estimation MSE versus pilot power (dB grid), identity and Hadamard pilots.
    MseVsPp(Common),
    /// Sum rate versus the number of user pairs: closed form, approximate and exact Monte-Carlo.
    RateVsK(Common),
    /// Sum rate versus the number of relay antennas.
    RateVsM(Common),
    /// Source and relay power needed for a target sum rate, Cases I-IV.
    RequiredPower(Common),
    /// Rate ratios of Cases II-IV to Case I at fixed low source or relay power.
    RateRatio(Common),
    /// Optimized versus uniform power allocation under a total budget.
    PowerAlloc(Common),
    /// Runs the invariant suite; exits 0 only if every check passes.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file in `key = value` form.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Monte-Carlo trials per point.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sweep values, `a,b,c` or `start:stop:step`.
    #[arg(long)]
    grid: Option<String>,
    /// Report rates without the pilot-overhead factor.
    #[arg(long)]
    no_prefactor: bool,
    /// Skip the exact Monte-Carlo model (rate-vs-k, rate-vs-m).
    #[arg(long)]
    no_exact: bool,
    /// rate-vs-m: set K = round(M / ratio) at each point.
    #[arg(long, value_name = "RATIO")]
    antennas_per_user: Option<f64>,
    /// required-power: target sum rate in bits/s/Hz.
    #[arg(long)]
    target: Option<f64>,
    /// rate-ratio: source power of the source series (dB suffix allowed).
    #[arg(long)]
    ratio_source_power: Option<String>,
    /// rate-ratio: relay power of the relay series (dB suffix allowed).
    #[arg(long)]
    ratio_relay_power: Option<String>,
    /// power-alloc: total power budget P_T (dB suffix allowed).
    #[arg(long)]
    total_power: Option<String>,
    /// power-alloc: stopping tolerance on the SINR change.
    #[arg(long)]
    epsilon: Option<f64>,
    /// power-alloc: trust-region factor (> 1).
    #[arg(long)]
    theta: Option<f64>,
    /// Scenario overrides such as `M=256` or `p_S=5dB`.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn build_spec(experiment: Experiment, c: &Common) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::new(experiment);
    if let Some(path) = &c.config {
        spec.base = SystemConfig::from_kv_str_over(spec.base, &std::fs::read_to_string(path)?)?;
    }
    spec.base = spec.base.with_overrides(&c.overrides)?;
    if let Some(g) = &c.grid {
        spec.grid = parse_grid(g)?;
    }
    if let Some(t) = c.trials {
        spec.trials = t;
    }
    if let Some(s) = c.seed {
        spec.seed = s;
    }
    spec.prefactor = !c.no_prefactor;
    let p = &mut spec.params;
    p.exact_mc = !c.no_exact;
    p.antennas_per_user = c.antennas_per_user;
    if let Some(t) = c.target {
        p.target_rate = t;
    }
    if let Some(v) = &c.ratio_source_power {
        p.ratio_source_power = parse_power("ratio_source_power", v)?;
    }
    if let Some(v) = &c.ratio_relay_power {
        p.ratio_relay_power = parse_power("ratio_relay_power", v)?;
    }
    if let Some(v) = &c.total_power {
        p.total_power = parse_power("total_power", v)?;
    }
    if let Some(e) = c.epsilon {
        p.epsilon = e;
    }
    if let Some(t) = c.theta {
        p.theta = t;
    }
    Ok(spec)
}

fn run(experiment: Experiment, c: &Common) -> Result<bool> {
    let spec = build_spec(experiment, c)?;
    let output = run_experiment(&spec)?;
    for check in &output.checks {
        println!(
            "{} {:<24} {:>8.2}s  {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.seconds,
            check.detail
        );
    }
    for path in write_outputs(&spec, &output, &c.out)? {
        println!("wrote {}", path.display());
    }
    Ok(output.all_checks_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match &cli.command {
        Command::MseVsPp(c) => (Experiment::MseVsPp, c),
        Command::RateVsK(c) => (Experiment::RateVsK, c),
        Command::RateVsM(c) => (Experiment::RateVsM, c),
        Command::RequiredPower(c) => (Experiment::RequiredPower, c),
        Command::RateRatio(c) => (Experiment::RateRatio, c),
        Command::PowerAlloc(c) => (Experiment::PowerAlloc, c),
        Command::Validate(c) => (Experiment::Validate, c),
    };
    match run(experiment, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
