use std::path::Path;
use std::process::{Command, Output};

use onebit_relay::experiments::CSV_COLUMNS;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onebit-relay")).args(args).output().unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn help_lists_every_experiment() {
    let out = cli(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["mse-vs-pp", "rate-vs-k", "rate-vs-m", "required-power", "rate-ratio", "power-alloc", "validate"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn rate_vs_m_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = cli(&[
        "rate-vs-m",
        "--grid",
        "40,80",
        "--trials",
        "20",
        "--seed",
        "9",
        "--out",
        out_dir.to_str().unwrap(),
        "K=4",
        "p_R=5dB",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&out_dir.join("rate-vs-m.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == CSV_COLUMNS.len() && r[0] == "rate-vs-m"));
    for method in ["closed-form", "approx-mc", "exact-mc"] {
        assert!(rows.iter().any(|r| r[2] == method), "no {method} rows");
    }
    let p_r: f64 = rows[0][11].parse().unwrap();
    assert!((p_r - 10f64.powf(0.5)).abs() < 1e-12);
    assert!(rows.iter().all(|r| r[7] == "4"));

    let manifest = read(&out_dir.join("manifest.txt"));
    assert!(manifest.contains("seed = 9"));
    assert!(manifest.contains("trials = 20"));
    assert!(manifest.contains("config_hash = "));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = cli(&["rate-vs-k", "--grid", "2,4", "--trials", "30", "--out", p.to_str().unwrap(), "M=32"]);
        assert!(out.status.success());
        read(&p.join("rate-vs-k.csv"))
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn config_file_then_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.cfg");
    std::fs::write(&cfg, "M = 48\nK = 3\np_S = 0dB\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = cli(&[
        "required-power",
        "--config",
        cfg.to_str().unwrap(),
        "--grid",
        "100",
        "--target",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
        "K=2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = read(&out_dir.join("manifest.txt"));
    assert!(manifest.contains("base.M = 48"));
    assert!(manifest.contains("base.K = 2"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    assert_eq!(cli(&["rate-vs-m", "--out", o, "M=abc"]).status.code(), Some(1));
    assert_eq!(cli(&["rate-vs-m", "--out", o, "--grid", "5:1:1"]).status.code(), Some(1));
    assert_eq!(cli(&["power-alloc", "--out", o, "--theta", "0.5"]).status.code(), Some(1));
    let infeasible = cli(&["required-power", "--out", o, "--grid", "64", "--target", "1000"]);
    assert_eq!(infeasible.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&infeasible.stderr).contains("infeasible"));
    assert_eq!(cli(&["no-such-experiment"]).status.code(), Some(2));
}

#[test]
fn power_alloc_reports_optimized_and_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["power-alloc", "--grid", "100", "--total-power", "10dB", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("power-alloc.csv"));
    let sum_rate = |series: &str, case: &str| -> f64 {
        csv.lines()
            .map(|l| l.split(',').collect::<Vec<_>>())
            .find(|r| r[1] == series && r[3] == case && r[15] == "sum_rate")
            .unwrap_or_else(|| panic!("no {series} {case} row"))[16]
            .parse()
            .unwrap()
    };
    let opt = sum_rate("optimized", "IV");
    for case in ["II", "III", "IV"] {
        assert!(opt > sum_rate("uniform", case));
    }
}
