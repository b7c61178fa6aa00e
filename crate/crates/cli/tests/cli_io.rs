//! CLI contract tests: exit codes, artifact layout, config grammar, shipped
//! config sync, and rerun reproducibility.

use geojump_cli::config::{ExperimentConfig, RawConfig};
use geojump_cli::defaults::default_config;
use geojump_cli::runner::{cli_run, RunArgs};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_geojump")
}

#[test]
fn constants_prints_the_dirichlet_constant() {
    let out = Command::new(bin()).args(["constants", "--m", "1", "--alpha", "1"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.starts_with("0.1591549"),
        "c(1,1) = 1/(2π) should print as 0.1591549…, got {text}"
    );
}

#[test]
fn malformed_config_exits_one_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("never");
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "this line has no equals sign\n").unwrap();
    let out = Command::new(bin())
        .args([
            "verify-corollary",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            target.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!target.exists(), "no artifacts on configuration errors");
}

#[test]
fn unknown_subcommand_exits_one() {
    let out = Command::new(bin()).arg("verify-everything").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_config_keys_are_tolerated_but_bad_values_are_not() {
    // Unknown keys are ignored (forward compatibility); malformed values
    // in known keys are configuration errors.
    let ok = RawConfig::parse("[martingale]\nlambda = 2.0\nfuture_knob = 7\n").unwrap();
    assert!(ExperimentConfig::from_raw(&ok).is_ok());
    let bad = RawConfig::parse("[martingale]\nlambda = fast\n").unwrap();
    assert!(ExperimentConfig::from_raw(&bad).is_err());
    assert!(RawConfig::parse("[unclosed\n").is_err());
    assert!(RawConfig::parse("[a]\nk = 1\nk = 2\n").is_err(), "duplicate keys rejected");
}

#[test]
fn shipped_config_files_match_builtin_defaults() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for sub in [
        "verify-lemma31",
        "verify-lemma32",
        "verify-theorem1",
        "verify-corollary",
        "localize",
        "simulate",
        "integrate",
        "metrics",
    ] {
        let path = root.join(format!("{sub}.cfg"));
        let shipped = std::fs::read_to_string(&path)
            .unwrap_or_else(|_| panic!("missing shipped config {}", path.display()));
        assert_eq!(shipped, default_config(sub), "configs/{sub}.cfg drifted from the built-in");
    }
}

#[test]
fn simulate_writes_path_csv_and_event_log() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = RunArgs::new("simulate", dir.path().to_path_buf());
    args.config_text = Some(
        "[martingale]\nlambda = 2.0\ntheta = 0.5\ndelta = 0.2\nhorizon = 1.0\ngrid_steps = 50\n[run]\npaths = 4\n[driver]\ndump_paths = 2\n"
            .to_string(),
    );
    let code = cli_run(&args);
    assert_eq!(code, 0);
    let head = std::fs::read_to_string(dir.path().join("path_0000.csv")).unwrap();
    assert!(head.starts_with("time,x1,x2,x3,jump_flag,killed\n"));
    let events = std::fs::read_to_string(dir.path().join("events_0000.csv")).unwrap();
    assert!(events.starts_with("index,kind\n"));
    assert!(dir.path().join("ensemble_manifest.json").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn rerun_with_same_config_is_byte_identical() {
    let text = "\
[martingale]
lambda = 1.5
theta = 0.2
delta = 0.1
horizon = 4.0
jump_cap = 0.5
grid_steps = 400

[run]
paths = 100
base_seed = 777
";
    let mut payloads = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let mut args = RunArgs::new("verify-corollary", dir.path().to_path_buf());
        args.config_text = Some(text.to_string());
        args.threads = 4;
        let code = cli_run(&args);
        assert!(code == 0 || code == 2);
        payloads.push(std::fs::read(dir.path().join("corollary_metrics.csv")).unwrap());
    }
    assert_eq!(payloads[0], payloads[1], "rerun must reproduce CSV bytes");
}

#[test]
fn grid_and_horizon_flag_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = RunArgs::new("simulate", dir.path().to_path_buf());
    args.config_text = Some(
        "[martingale]\nlambda = 1.0\ntheta = 0.3\nhorizon = 4.0\ngrid_steps = 100\n[run]\npaths = 2\n[driver]\nkind = brownian\ndim = 1\ndump_paths = 1\n"
            .to_string(),
    );
    args.grid_steps = Some(10);
    args.horizon = Some(2.0);
    assert_eq!(cli_run(&args), 0);
    let csv = std::fs::read_to_string(dir.path().join("path_0000.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 12, "header + 11 grid points for 10 steps");
    assert!(lines.last().unwrap().starts_with("2,"), "horizon override must reach the grid");
}

#[test]
fn alpha_flag_override_reaches_the_stable_driver() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = RunArgs::new("simulate", dir.path().to_path_buf());
    args.config_text = Some(
        "[martingale]\nhorizon = 1.0\ngrid_steps = 10\n[run]\npaths = 2\n[driver]\nkind = alpha_stable\ndim = 1\nalpha = 0.8\ndump_paths = 1\n"
            .to_string(),
    );
    args.alpha = Some(1.5);
    assert_eq!(cli_run(&args), 0);
    let manifest =
        std::fs::read_to_string(dir.path().join("ensemble_manifest.json")).unwrap();
    assert!(manifest.contains("\"alpha\": 1.5"));

    args.alpha = Some(2.5);
    let dir2 = tempfile::tempdir().unwrap();
    args.out_dir = dir2.path().to_path_buf();
    assert_eq!(cli_run(&args), 1, "out-of-range alpha is a configuration error");
}

#[test]
fn check_failures_exit_two() {
    // A corollary run whose tolerance is impossible: checks fail, exit 2,
    // artifacts still written (a failed check is a result, not an error).
    let dir = tempfile::tempdir().unwrap();
    let mut args = RunArgs::new("verify-corollary", dir.path().to_path_buf());
    args.config_text = Some(
        "[martingale]\nlambda = 1.5\ntheta = 0.2\ndelta = 0.1\nhorizon = 4.0\njump_cap = 0.5\ngrid_steps = 400\n[metrics]\ntolerance = 0.0000000001\n[run]\npaths = 100\n"
            .to_string(),
    );
    assert_eq!(cli_run(&args), 2);
    assert!(dir.path().join("manifest.json").exists());
}
