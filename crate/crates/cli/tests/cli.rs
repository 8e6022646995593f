use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn oscillax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oscillax"))
        .args(args)
        .env_remove("OSCILLAX_WORKERS")
        .output()
        .expect("binary runs")
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect()).collect()
}

fn summary(dir: &Path, cmd: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{cmd}.json"))).unwrap()).unwrap()
}

#[test]
fn eval_matches_the_gaussian_closed_form() {
    let out = oscillax(&["eval", "--a", "2", "--r", "0", "--t", "-0.45"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "r,t,re,im,abs");
    let row = &rows(&csv)[0];
    let d = 2.0 * std::f64::consts::PI * (1.0 + 4.0 * 0.45 * 0.45);
    assert!((row[2] - 1.0 / d).abs() < 1e-12);
    assert!((row[3] + 0.9 / d).abs() < 1e-12);
}

#[test]
fn invalid_parameters_exit_with_usage_status() {
    assert_eq!(oscillax(&["eval", "--a", "-1", "--r", "0", "--t", "0"]).status.code(), Some(2));
    assert_eq!(oscillax(&["eval", "--a", "2", "--r", "0", "--t", "1.5"]).status.code(), Some(2));
    assert_eq!(oscillax(&["eval", "--bogus"]).status.code(), Some(2));
    assert_eq!(oscillax(&["kernel", "--m", "2", "--mu", "2", "--a", "2", "--s", "0", "--workers", "0"]).status.code(), Some(2));
}

#[test]
fn strict_reports_unconverged_kernels() {
    let args = ["kernel", "--m", "2", "--mu", "2", "--a", "2", "--s", "0", "--max-time-points", "4"];
    let lax = oscillax(&args);
    assert!(lax.status.success());
    let json: Value = serde_json::from_slice(&lax.stderr).unwrap();
    assert_eq!(json["converged"], Value::Bool(false));
    let strict = oscillax(&[&args[..], &["--strict"]].concat());
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let dir1 = first.path().to_str().unwrap();
    let out = oscillax(&["kernel", "--m", "2", "--mu", "2", "--a", "0.5", "--s", "0.2", "--out-dir", dir1]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json = summary(first.path(), "kernel");
    assert_eq!(json["command"], "kernel");
    assert!(json["version"].is_string());

    let cfg = first.path().join("kernel.cfg");
    std::fs::write(&cfg, oscillax_cli::config::config_lines(json["config"].as_object().unwrap())).unwrap();
    let dir2 = second.path().to_str().unwrap();
    let out = oscillax(&["kernel", "--config", cfg.to_str().unwrap(), "--out-dir", dir2]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = std::fs::read(first.path().join("kernel.csv")).unwrap();
    let b = std::fs::read(second.path().join("kernel.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn explicit_flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("eval.cfg");
    std::fs::write(&cfg, "a=2\nr=0\nt=0.5\n").unwrap();
    let out = oscillax(&["eval", "--config", cfg.to_str().unwrap(), "--t", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let row = &rows(&String::from_utf8(out.stdout).unwrap())[0];
    assert_eq!(row[1], 0.0);
    assert!((row[2] - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-12);
}

#[test]
fn half_integer_order_has_no_remainder() {
    let out = oscillax(&["bessel-check", "--lambda", "0.5", "--rho-max", "512"]);
    assert!(out.status.success());
    let table = rows(&String::from_utf8(out.stdout).unwrap());
    assert!(!table.is_empty());
    assert!(table.iter().all(|r| r[3] <= 1e-10));
}

#[test]
fn transform_agrees_with_the_cartesian_oracle() {
    let out = oscillax(&["transform", "--n", "3", "--rho-list", "0.5,1.5", "--oracle"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for r in rows(&String::from_utf8(out.stdout).unwrap()) {
        assert!(r[3] < 1e-6, "{r:?}");
    }
}
