use std::path::Path;
use std::process::Command;

const PARAMS: &str = r#""params": {"n": 3, "chi": 0.4, "m": 1, "gamma": 1, "alpha": 2, "beta": 4, "sigma": 1, "lambda": 1}"#;

fn chemo(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_chemo")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn simulate_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{"scenario": "simulate", "grid": {{"dim": 1, "extents": [1.0], "cells": [32]}}, {PARAMS},
                "numerics": {{"t_final": 0.5}}, "initial": {{"kind": "cosine_perturbation", "amplitude": 0.2}}}}"#
        ),
    );
    let out = dir.path().join("out");
    let res = chemo(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,"));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(doc["config"]["scenario"], "simulate");
}

#[test]
fn ode_runs_without_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!(r#"{{"scenario": "ode", {PARAMS}}}"#));
    let out = dir.path().join("out");
    let res = chemo(&["ode", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,ubar,ulow,gap"));
}

#[test]
fn scenario_mismatch_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!(r#"{{"scenario": "ode", {PARAMS}}}"#));
    let res = chemo(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(!res.stderr.is_empty());
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"scenario": "ode", "params": {"n": 3}}"#);
    let res = chemo(&["ode", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
}
