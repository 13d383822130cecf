use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn unitroot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitroot")).args(args).output().expect("binary runs")
}

fn unitroot_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitroot")).args(args).env("RAYON_NUM_THREADS", threads).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("unitroot-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn trace_formula_passes() {
    let out = unitroot(&["trace-formula", "--builtin", "rank2-gm", "--p", "2", "--N", "8", "--DT", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["inputs"]["DT"], 6);
    assert_eq!(r["result"]["euler"], r["result"]["quotient"]);
}

#[test]
fn malformed_tower_is_a_usage_error() {
    let path = scratch("bad.sigma", "tower p=4 e=1 eisenstein=-4 f=1\nscheme gm 1\nprecision 5\nrank 1\nentry 0 0 1\n");
    let out = unitroot(&["euler-l", "--matrix", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p = 4"));
    std::fs::remove_file(path).ok();
}

#[test]
fn enumeration_guard_exits_three() {
    let out = unitroot(&["kloosterman", "--p", "2", "--n", "2", "--degree", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["status"], "error");
}

#[test]
fn truncated_limiting_module_is_a_mismatch() {
    let out = unitroot(&["rk1res", "--builtin", "rank2-gm", "--p", "2", "--N", "5", "--s", "1", "--y", "2", "--Q", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn kloosterman_report() {
    let out = unitroot(&["kloosterman", "--p", "2", "--degree", "2", "--weight", "1", "--DT", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let pts = r["result"]["points"].as_array().unwrap();
    assert_eq!(pts[0]["sums"]["integers"][0], 1);
    assert_eq!(pts[0]["sums"]["integers"][1], 3);
    assert_eq!(pts[0]["polynomial"], serde_json::json!(["1", "1", "2"]));
    assert_eq!(r["result"]["unit_root_l"], serde_json::json!(["1", "165", "198", "108"]));
}

#[test]
fn reports_are_byte_identical() {
    let args = ["kloosterman", "--p", "2", "--degree", "2", "--DT", "3"];
    let a = unitroot_threads(&args, "1");
    let b = unitroot_threads(&args, "4");
    let c = unitroot_threads(&args, "4");
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(b.stdout, c.stdout);
    let args = ["rk1res", "--builtin", "rank2-gm", "--p", "3", "--N", "5", "--y", "3"];
    assert_eq!(unitroot_threads(&args, "1").stdout, unitroot_threads(&args, "3").stdout);
}

#[test]
fn config_matches_flags() {
    let path = scratch("cfg.json", r#"{"command": "euler-l", "builtin": "rank1-gm", "p": 3, "N": 6, "DT": 4}"#);
    let via_config = unitroot(&["run", "--config", path.to_str().unwrap()]);
    let via_flags = unitroot(&["euler-l", "--builtin", "rank1-gm", "--p", "3", "--N", "6", "--DT", "4"]);
    assert_eq!(via_config.status.code(), Some(0));
    assert_eq!(via_config.stdout, via_flags.stdout);
    assert_eq!(json(&via_flags)["result"]["coefficients"], serde_json::json!(["1", "2", "6", "18", "54"]));
    std::fs::remove_file(path).ok();
}

#[test]
fn unknown_config_field_is_rejected() {
    let path = scratch("typo.json", r#"{"command": "euler-l", "builtin": "rank1-gm", "DTT": 4}"#);
    let out = unitroot(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("DTT"));
    std::fs::remove_file(path).ok();
}

#[test]
fn report_written_to_file() {
    let path = std::env::temp_dir().join(format!("unitroot-cli-{}-out.json", std::process::id()));
    let out = unitroot(&["--out", path.to_str().unwrap(), "weight-eval", "--p", "3", "--weight", "2", "--at", "2", "--N", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["result"]["value"], "4");
    std::fs::remove_file(path).ok();
}

#[test]
fn every_subcommand_runs() {
    let cases: [&[&str]; 6] = [
        &["fibre-commute", "--builtin", "rank2-gm", "--p", "2", "--N", "5", "--r", "-1", "--sign", "minus"],
        &["two-variable-l", "--builtin", "rank2-gm", "--p", "2", "--N", "5", "--s", "1"],
        &["convext-check", "--builtin", "rank2-gm", "--p", "2", "--N", "16", "--m-max", "8"],
        &["norm-check", "--builtin", "rank2-a1", "--p", "3", "--N", "6"],
        &["weight-eval", "--p", "2", "--s", "1", "--z", "4", "--at", "3"],
        &["euler-l", "--builtin", "block3-gm", "--p", "2", "--N", "6", "--DT", "3"],
    ];
    for args in cases {
        let out = unitroot(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["status"], "pass");
    }
}
