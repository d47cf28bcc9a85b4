//! End-to-end checks of the binary: record content, exit codes, config
//! handling, and output determinism.

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

use approx::assert_abs_diff_eq;

const PI: f64 = std::f64::consts::PI;

fn jcberry(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jcberry"))
        .args(args)
        .env_remove("JCBERRY_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

/// Parses CSV text into one map per data row.
fn parse_csv(text: &str) -> Vec<HashMap<String, String>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().expect("header row").split(',').collect();
    lines
        .map(|line| {
            header
                .iter()
                .zip(line.split(','))
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn data_section(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

#[test]
fn single_mode_run_matches_the_closed_form() {
    let out = jcberry(&["single-mode", "--lambda", "1", "--delta", "0", "--n", "0", "--sign", "+"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_csv(&stdout_of(&out));
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row["kind"], "single-mode");
    assert_eq!(row["method"], "connection");
    assert_eq!(row["sign"], "+");
    let unwrapped: f64 = row["unwrapped"].parse().unwrap();
    assert_abs_diff_eq!(unwrapped, PI, epsilon = 1e-6);
    assert!(row["abs_error"].parse::<f64>().unwrap() < 1e-6);
    // timing defaults off: the wall column stays empty
    assert_eq!(row["wall_ms"], "");
}

#[test]
fn two_mode_vacuum_run_gives_the_quarter_solid_angle() {
    let out = jcberry(&[
        "two-mode",
        "--lambda",
        "1",
        "--theta",
        "1.5707963267948966",
        "--nodes",
        "4096",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_csv(&stdout_of(&out));
    let unwrapped: f64 = rows[0]["unwrapped"].parse().unwrap();
    assert_abs_diff_eq!(unwrapped, PI / 2.0, epsilon = 1e-5);
    assert_eq!(rows[0]["cutoff_a"], "8");
}

#[test]
fn malformed_config_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    let target = dir.path().join("out.csv");
    std::fs::write(&config, "lambda = \"not a number\"\n").unwrap();
    let out = jcberry(&[
        "single-mode",
        "--config",
        config.to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!target.exists(), "no output file on config errors");

    // unknown keys are config errors too
    std::fs::write(&config, "lambda = 1.0\nbogus = 3\n").unwrap();
    let out = jcberry(&["single-mode", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // and so is a missing file
    let out = jcberry(&["single-mode", "--config", "/nonexistent/conf.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_axis_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.toml");
    std::fs::write(&config, "experiment = \"single-mode\"\nlambda = 1.0\nn = []\n").unwrap();
    let out = jcberry(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(
        &config,
        "experiment = \"single-mode\"\nlambda = 1.0\ndelta = { start = 0.0, stop = 1.0, count = 0 }\n",
    )
    .unwrap();
    let out = jcberry(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn axes_outside_sweep_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "lambda = [1.0, 2.0]\n").unwrap();
    let out = jcberry(&["single-mode", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn one_point_sweep_matches_the_plain_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("one.toml");
    std::fs::write(
        &config,
        "experiment = \"single-mode\"\nlambda = 1.0\ndelta = 1.0\nn = 2\nsign = \"-\"\n",
    )
    .unwrap();
    let sweep = jcberry(&["sweep", "--config", config.to_str().unwrap()]);
    let run = jcberry(&[
        "single-mode",
        "--lambda",
        "1",
        "--delta",
        "1",
        "--n",
        "2",
        "--sign",
        "-",
    ]);
    assert!(sweep.status.success() && run.status.success());
    assert_eq!(data_section(&stdout_of(&sweep)), data_section(&stdout_of(&run)));
}

#[test]
fn sweep_output_is_deterministic_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.toml");
    std::fs::write(
        &config,
        concat!(
            "experiment = \"single-mode\"\n",
            "lambda = 1.0\n",
            "delta = [0.0, 3.0]\n",
            "n = [0, 1]\n",
            "sign = [\"+\", \"-\"]\n",
        ),
    )
    .unwrap();
    let mut sections = Vec::new();
    for workers in ["1", "4", "1", "4"] {
        let out = jcberry(&["sweep", "--config", config.to_str().unwrap(), "--workers", workers]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        sections.push(data_section(&stdout_of(&out)));
    }
    assert!(sections.windows(2).all(|w| w[0] == w[1]), "byte-identical data sections");
    // row-major order: sign varies fastest, then n, then delta
    let rows = parse_csv(&sections[0]);
    assert_eq!(rows.len(), 8);
    let key: Vec<(String, String, String)> = rows
        .iter()
        .map(|r| (r["delta"].clone(), r["n"].clone(), r["sign"].clone()))
        .collect();
    assert_eq!(key[0].2, "+");
    assert_eq!(key[1].2, "-");
    assert_eq!(key[0].1, key[1].1);
    assert_eq!(key[2].1, "1");
    assert_ne!(key[0].0, key[4].0);
}

#[test]
fn jsonl_twin_carries_the_same_fields() {
    let out = jcberry(&[
        "single-mode",
        "--lambda",
        "1",
        "--delta",
        "0",
        "--format",
        "jsonl",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1);
    let value: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(value["kind"], "single-mode");
    assert_abs_diff_eq!(value["unwrapped"].as_f64().unwrap(), PI, epsilon = 1e-6);
    assert!(value["alpha"].is_null());
    assert!(value["wall_ms"].is_null());
}

#[test]
fn physics_failures_exit_3_with_an_error_record() {
    let out = jcberry(&["semiclassical", "--lambda", "1", "--alpha", "0", "--delta", "0"]);
    assert_eq!(out.status.code(), Some(3));
    let rows = parse_csv(&stdout_of(&out));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["method"], "error");
    assert_eq!(rows[0]["wrapped"], "");
}

#[test]
fn sweep_error_records_continue_unless_fail_fast() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("grid.toml");
    std::fs::write(
        &config,
        "experiment = \"semiclassical\"\nlambda = 1.0\ndelta = 0.0\nalpha = [0.0, 1.0]\n",
    )
    .unwrap();
    let out = jcberry(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let rows = parse_csv(&stdout_of(&out));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["method"], "error");
    assert_eq!(rows[1]["method"], "connection");

    let out = jcberry(&["sweep", "--config", config.to_str().unwrap(), "--fail-fast"]);
    assert_eq!(out.status.code(), Some(3));
    let rows = parse_csv(&stdout_of(&out));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["method"], "error");
}

#[test]
fn seeded_gauge_self_check_runs() {
    let out = jcberry(&["mixed", "--theta", "1.0", "--seed", "42"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("gauge self-check passed"));
}

#[test]
fn worker_env_is_validated_and_flags_win() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_jcberry"));
        cmd.args(["mixed", "--theta", "1.0"]).args(extra);
        match env {
            Some(v) => cmd.env("JCBERRY_WORKERS", v),
            None => cmd.env_remove("JCBERRY_WORKERS"),
        };
        cmd.output().unwrap()
    };
    assert_eq!(run(Some("0"), &[]).status.code(), Some(2));
    assert_eq!(run(Some("nope"), &[]).status.code(), Some(2));
    // the flag takes precedence, so the bad env value never gets read
    assert!(run(Some("nope"), &["--workers", "2"]).status.success());
    assert!(run(Some("3"), &[]).status.success());
}

#[test]
fn output_file_lands_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("rec.csv");
    let out = jcberry(&[
        "mixed",
        "--theta",
        "1.0",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert_eq!(parse_csv(&text).len(), 1);

    // unwritable directories are i/o errors
    let out = jcberry(&["mixed", "--theta", "1.0", "--out", "/nonexistent/dir/rec.csv"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(Path::new("/nonexistent").exists() == false);
}

#[test]
fn timing_flag_fills_the_wall_column() {
    let out = jcberry(&["mixed", "--theta", "1.0", "--timing"]);
    assert!(out.status.success());
    let rows = parse_csv(&stdout_of(&out));
    assert!(rows[0]["wall_ms"].parse::<f64>().unwrap() >= 0.0);
}
