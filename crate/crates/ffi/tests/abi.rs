use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use onebit_relay::channel::SystemConfig;
use onebit_relay::closed_form::corollary_rate;
use onebit_relay::report::HardwareCase;
use onebit_relay_ffi::*;

fn last_error() -> String {
    let p = onebit_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn closed_form_matches_core() {
    let cfg = onebit_config_new(128, 5, 10.0, 10.0, 10.0);
    assert!(!cfg.is_null());
    let expected = corollary_rate(&SystemConfig::symmetric(128, 5, 10.0, 10.0, 10.0), HardwareCase::III).unwrap();
    let mut rates = [0.0; 5];
    let mut sum = 0.0;
    let st = unsafe { onebit_closed_form_rate(cfg, 3, true, rates.as_mut_ptr(), 5, &mut sum) };
    assert_eq!(st, OnebitStatus::Ok);
    assert!(onebit_last_error_message().is_null());
    assert_eq!(rates.to_vec(), expected.per_user_rate);
    assert_eq!(sum, expected.sum_rate);

    let mut raw = [0.0; 5];
    unsafe { onebit_closed_form_rate(cfg, 3, false, raw.as_mut_ptr(), 5, ptr::null_mut()) };
    let ratio = rates[0] / raw[0];
    assert!((ratio - 0.475).abs() < 1e-12, "prefactor {ratio}");
    unsafe { onebit_config_free(cfg) };
}

#[test]
fn setters_and_parse() {
    let text = CString::new("M = 64\nK = 2\np_S = 5dB\n").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { onebit_config_parse(text.as_ptr(), &mut cfg) }, OnebitStatus::Ok);
    assert_eq!(unsafe { onebit_config_users(cfg) }, 2);

    let bad = CString::new("M=abc").unwrap();
    assert_eq!(unsafe { onebit_config_set(cfg, bad.as_ptr()) }, OnebitStatus::InvalidArgument);
    assert!(last_error().contains("M"));

    let good = CString::new("pilot_kind=hadamard").unwrap();
    assert_eq!(unsafe { onebit_config_set(cfg, good.as_ptr()) }, OnebitStatus::Ok);

    let p = [1.0, 2.0];
    assert_eq!(unsafe { onebit_config_set_source_powers(cfg, p.as_ptr(), 2) }, OnebitStatus::Ok);
    let neg = [1.0, -2.0];
    assert_eq!(
        unsafe { onebit_config_set_source_powers(cfg, neg.as_ptr(), 2) },
        OnebitStatus::InvalidArgument
    );
    let three = [1.0; 3];
    assert_eq!(
        unsafe { onebit_config_set_large_scale(cfg, three.as_ptr(), three.as_ptr(), 3) },
        OnebitStatus::InvalidArgument
    );
    unsafe { onebit_config_free(cfg) };
}

#[test]
fn argument_errors() {
    let mut r = [0.0; 2];
    assert_eq!(
        unsafe { onebit_closed_form_rate(ptr::null(), 4, true, r.as_mut_ptr(), 2, ptr::null_mut()) },
        OnebitStatus::NullPointer
    );
    let cfg = onebit_config_new(32, 2, 1.0, 1.0, 1.0);
    assert_eq!(
        unsafe { onebit_closed_form_rate(cfg, 5, true, r.as_mut_ptr(), 2, ptr::null_mut()) },
        OnebitStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { onebit_closed_form_rate(cfg, 4, true, r.as_mut_ptr(), 3, ptr::null_mut()) },
        OnebitStatus::BufferSize
    );
    assert!(last_error().contains("expected K = 2"));
    assert!(onebit_config_new(0, 2, 1.0, 1.0, 1.0).is_null());
    unsafe { onebit_config_free(cfg) };
    unsafe { onebit_config_free(ptr::null_mut()) };
}

#[test]
fn monte_carlo_is_seeded() {
    let cfg = onebit_config_new(32, 2, 10.0, 10.0, 10.0);
    let run = |seed| {
        let (mut r, mut se, mut s) = ([0.0; 2], [0.0; 2], 0.0);
        let st = unsafe { onebit_mc_rate(cfg, 50, seed, true, true, r.as_mut_ptr(), se.as_mut_ptr(), 2, &mut s) };
        assert_eq!(st, OnebitStatus::Ok);
        assert!(se.iter().all(|&x| x > 0.0));
        (r, s)
    };
    assert_eq!(run(7), run(7));
    assert_ne!(run(7).1, run(8).1);
    let mut r = [0.0; 2];
    assert_eq!(
        unsafe { onebit_mc_rate(cfg, 0, 1, false, true, r.as_mut_ptr(), ptr::null_mut(), 2, ptr::null_mut()) },
        OnebitStatus::InvalidArgument
    );
    unsafe { onebit_config_free(cfg) };
}

#[test]
fn power_allocation_respects_budget() {
    let cfg = onebit_config_new(128, 2, 1.0, 1.0, 10.0);
    let (mut p, mut pr, mut rate) = ([0.0; 2], 0.0, 0.0);
    let st = unsafe { onebit_power_alloc(cfg, 10.0, 1e-3, 1.1, p.as_mut_ptr(), 2, &mut pr, &mut rate) };
    assert_eq!(st, OnebitStatus::Ok, "{}", last_error());
    assert!(p.iter().sum::<f64>() + pr <= 10.0 * (1.0 + 1e-9));
    assert!(rate > 0.0);
    assert_eq!(
        unsafe { onebit_power_alloc(cfg, 10.0, 1e-3, 0.9, p.as_mut_ptr(), 2, &mut pr, &mut rate) },
        OnebitStatus::InvalidArgument
    );
    unsafe { onebit_config_free(cfg) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(onebit_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/onebit_relay.h")
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(header_path()).unwrap();
    let src = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert_eq!(exports.len(), 12);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct OnebitConfig OnebitConfig;"));
    assert!(header.contains("ONEBIT_STATUS_OK = 0"));
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "onebit_relay.h"

int main(void) {
    OnebitConfig *cfg = onebit_config_new(128, 5, 10.0, 10.0, 10.0);
    if (!cfg) return 10;
    double r[5], sum = 0.0;
    if (onebit_closed_form_rate(cfg, 4, true, r, 5, &sum) != ONEBIT_STATUS_OK) return 11;
    if (onebit_closed_form_rate(cfg, 9, true, r, 5, NULL) != ONEBIT_STATUS_INVALID_ARGUMENT) return 12;
    if (!onebit_last_error_message()) return 13;
    onebit_config_free(cfg);
    printf("%.12f\n", sum);
    return 0;
}
"#;

#[test]
fn c_program_links_against_static_library() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("cc not found; skipping");
        return;
    }
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libonebit_relay_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let out = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header_path().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let sum: f64 = String::from_utf8_lossy(&run.stdout).trim().parse().unwrap();
    let expected = corollary_rate(&SystemConfig::symmetric(128, 5, 10.0, 10.0, 10.0), HardwareCase::IV)
        .unwrap()
        .sum_rate;
    assert!((sum - expected).abs() < 1e-9);
}
