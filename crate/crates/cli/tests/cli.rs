use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rosenblatt")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn selftest_quick_passes() {
    let o = run(&["selftest", "--quick"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.starts_with("check,value,tolerance,pass\n"));
    assert!(!out.contains(",false"));
}

#[test]
fn simulate_csv_is_byte_identical_across_runs_and_threads() {
    let args = ["simulate", "--paths", "300", "--times", "0.3,0.7,1", "--seed", "42", "--cells", "256"];
    let a = run(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_rosenblatt")).args(args).env("RAYON_NUM_THREADS", "1").output().unwrap();
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["simulate", "--paths", "300", "--times", "0.3,0.7,1", "--seed", "43", "--cells", "256"]);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 1 + 300 * 3);
}

#[test]
fn out_dir_gets_results_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = run(&["--out-dir", d, "cumulants", "--H", "0.7", "--max-order", "3"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("cumulants.csv")).unwrap();
    assert!(csv.starts_with("H,r,kappa,route,error\n"));
    let m = read_json(&dir.path().join("cumulants.manifest.json"));
    assert_eq!(m["command"], "cumulants");
    assert_eq!(m["checks_passed"], true);
    assert_eq!(m["config"]["max_order"], 3);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(m["versions"]["rosenblatt"].is_string());
}

#[test]
fn json_output_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"H": 0.8, "cells": 120, "power_sums": [2, 3]}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "--out", "json", "spectrum"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["rows"].as_array().unwrap().len() > 10);
    assert_eq!(v["checks"][0]["pass"], true);
    // flags on the command line win over the file
    let o = run(&["--config", cfg.to_str().unwrap(), "--out", "json", "spectrum", "--H", "0.9"]);
    assert_eq!(code(&o), 0);
    let m: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).lines().last().unwrap()).unwrap();
    assert_eq!(m["config"]["h"], 0.9);
}

#[test]
fn variance_reads_an_integrand_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"order": 1, "a": 0.3, "b": 0.9, "time": {"coeffs": [1.0]}, "space": {"terms": [{"coef": 1.0, "center": 0.5, "width": 0.2, "degree": 0}]}}"#,
    )
    .unwrap();
    let o = run(&["--out", "json", "verify-variance", "--spec", spec.to_str().unwrap(), "--nodes", "60", "--cells", "60"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn tolerance_failures_exit_with_one() {
    let o = run(&["cumulants", "--H", "0.7", "--max-order", "2", "--tol", "0"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        vec!["cumulants", "--H", "1.2"],
        vec!["spectrum", "--power-sums", "1"],
        vec!["verify-ito", "--degree", "5"],
        vec!["verify-ito", "--a", "2"],
        vec!["charfn", "--routes", "guess"],
        vec!["simulate", "--method", "other"],
        vec!["nonsense"],
        vec!["--config", "/no/such/file.json", "selftest"],
        vec!["verify-variance", "--spec", "/no/such/spec.json"],
    ] {
        let o = run(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["simulate", "--help"])), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hurst_outside_the_range_is_a_config_error(h in prop_oneof![-2.0..=0.5f64, 1.0..5.0f64]) {
        let o = run(&["cumulants", "--H", &h.to_string()]);
        prop_assert_eq!(code(&o), 2);
    }

    #[test]
    fn seeded_simulations_repeat(seed in any::<u64>(), paths in 1usize..40) {
        let args = ["simulate", "--paths", &paths.to_string(), "--seed", &seed.to_string(), "--cells", "64", "--times", "0.5,1"];
        prop_assert_eq!(run(&args).stdout, run(&args).stdout);
    }

    #[test]
    fn malformed_xi_is_a_config_error(junk in "[a-z]{1,6}") {
        let o = run(&["verify-skorohod", "--xi", &junk]);
        prop_assert_eq!(code(&o), 2);
    }
}
