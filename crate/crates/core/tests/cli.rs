//! End-to-end tests of the `phasebound` binary.

use std::f64::consts::PI;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasebound"))
        .args(args)
        .env_remove("PHASEBOUND_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Rows of the named CSV table as maps from column to field.
fn csv_table(text: &str, name: &str) -> Vec<Vec<(String, String)>> {
    let marker = format!("# table: {name}");
    let mut lines = text.lines().skip_while(|l| *l != marker).skip(1);
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .take_while(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn field(row: &[(String, String)], key: &str) -> f64 {
    row.iter().find(|(k, _)| k == key).unwrap().1.parse().unwrap()
}

#[test]
fn kernel_rows_and_provenance() {
    let out = run(&["kernel", "--max-lag", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# phasebound "));
    assert!(text.contains("# seed: 0"));
    let rows = csv_table(&text, "kernel");
    assert_eq!(rows.len(), 4);
    assert_eq!(field(&rows[0], "theta"), PI * PI / 3.0);
    assert_eq!(field(&rows[1], "theta"), -2.0);
    assert_eq!(field(&rows[2], "theta"), 0.5);
}

#[test]
fn noon_mse_with_optimized_phase() {
    let out = run(&["noon", "--n", "4,8"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_table(&stdout(&out), "noon");
    for row in rows {
        let n = field(&row, "n");
        assert!((field(&row, "mse") - (PI * PI / 3.0 - 1.0 / (2.0 * n * n))).abs() < 1e-9);
    }
}

#[test]
fn optimize_max_near_asymptote() {
    let out = run(&["optimize", "--constraint", "max", "--E", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_table(&stdout(&out), "optimize");
    let scaled = field(&rows[0], "scaled");
    assert!((scaled - PI * PI / 4.0).abs() / (PI * PI / 4.0) < 0.10);
}

#[test]
fn sweep_gap_strictly_decreasing() {
    let out = run(&["sweep", "--bound", "max", "--E", "8,16,32,64"]);
    assert_eq!(out.status.code(), Some(0));
    let gaps: Vec<f64> = csv_table(&stdout(&out), "sweep")
        .iter()
        .map(|r| field(r, "gap").abs())
        .collect();
    assert_eq!(gaps.len(), 4);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn state_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("opt.json");
    let p = path.to_str().unwrap();
    let out = run(&["optimize", "--constraint", "max", "--E", "16", "--emit-state", p]);
    assert_eq!(out.status.code(), Some(0));
    let value = field(&csv_table(&stdout(&out), "optimize")[0], "value");
    let out = run(&["mse", "--state-file", p]);
    assert_eq!(out.status.code(), Some(0));
    let reloaded = field(&csv_table(&stdout(&out), "mse")[0], "mse");
    assert!((value - reloaded).abs() < 1e-12);
}

#[test]
fn non_normalized_state_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"lo": -1, "hi": 1, "amplitudes": [[1, 0], [1, 0], [0, 0]]}"#).unwrap();
    let out = run(&["mse", "--state-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("normalized"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["mse", "--state", "noon:0"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--bound", "max", "--E", "16,8"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let inactive = run(&["optimize", "--constraint", "avg", "--E", "8", "--trunc-factor", "0.5"]);
    assert_eq!(inactive.status.code(), Some(1));
}

#[test]
fn json_report() {
    let out = run(&["--format", "json", "fisher", "--state", "noon:3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["tool"], "phasebound");
    assert_eq!(v["command"], "fisher");
    let j = v["tables"]["fisher"][0]["j"].as_f64().unwrap();
    assert!((j - 36.0).abs() < 1e-12);
}

#[test]
fn output_file_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let out = run(&[
            "--seed", "9", "--threads", threads, "--output", path.to_str().unwrap(),
            "simulate", "--state", "sine:12", "--theta", "0.3", "--count", "20000",
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let strip = |p: &std::path::Path| {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# config"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
}
