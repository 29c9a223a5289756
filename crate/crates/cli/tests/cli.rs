// Frozen oracle constants keep every digit of their derivation.
#![allow(clippy::excessive_precision)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tumor-flat"))
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const CANONICAL: &str = r#"{
  "params": {
    "mu": 1.0,
    "sigma_tilde": 0.5,
    "gamma": 0.0,
    "nutrient": {"period": 1.0, "mean": 1.0, "harmonics": [[1, 0.25, 0.0]]}
  }
}"#;

const CONSTANT: &str = r#"{
  "params": {
    "mu": 1.0,
    "sigma_tilde": 0.7615941559557649,
    "nutrient": {"period": 1.0, "mean": 1.0, "harmonics": []}
  }
}"#;

const EXTINCTION: &str = r#"{
  "params": {
    "mu": 1.0,
    "sigma_tilde": 1.4,
    "nutrient": {"period": 1.0, "mean": 1.0, "harmonics": [[1, 0.25, 0.0]]}
  }
}"#;

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn parse_csv(text: &str, header: &str) -> Vec<Vec<f64>> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(header));
    lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

#[test]
fn classify_reports_both_regimes() {
    let dir = TempDir::new().unwrap();

    let persistent = write_config(&dir, "p.json", CANONICAL);
    let out = run(&["classify", "--config", persistent.to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["regime"], "PersistentPeriodic");
    assert_eq!(v["boundary_flag"], false);
    assert_eq!(v["phi_bar"], 1.0);

    let extinct = write_config(&dir, "e.json", EXTINCTION);
    let out = run(&["classify", "--config", extinct.to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["regime"], "Extinction");
    assert_eq!(v["boundary_flag"], false);
}

#[test]
fn classify_flags_the_threshold_boundary() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "b.json",
        r#"{
          "params": {
            "mu": 1.0,
            "sigma_tilde": 1.0,
            "nutrient": {"period": 1.0, "mean": 1.0, "harmonics": [[1, 0.25, 0.0]]}
          }
        }"#,
    );
    let out = run(&["classify", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["regime"], "Extinction");
    assert_eq!(v["boundary_flag"], true);
}

#[test]
fn invalid_sigma_exits_with_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "bad.json",
        r#"{"params": {"mu": 1.0, "sigma_tilde": -0.5,
            "nutrient": {"period": 1.0, "mean": 1.0, "harmonics": []}}}"#,
    );
    let out = run(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sigma_tilde"), "stderr: {err}");
}

#[test]
fn unknown_config_key_exits_with_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "extra.json",
        r#"{"params": {"mu": 1.0, "sigma_tilde": 0.5,
            "nutrient": {"period": 1.0, "mean": 1.0, "harmonics": []}},
            "surprise": 7}"#,
    );
    let out = run(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nonpositive_nutrient_exits_with_positivity_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "neg.json",
        r#"{"params": {"mu": 1.0, "sigma_tilde": 0.5,
            "nutrient": {"period": 1.0, "mean": 1.0, "harmonics": [[1, 1.5, 0.0]]}}}"#,
    );
    let out = run(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("positivity violation"), "stderr: {err}");
}

#[test]
fn periodic_writes_csv_with_sidecar_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", CANONICAL);
    let csv_path = dir.path().join("orbit.csv");

    let out = run(&[
        "periodic",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let rows = parse_csv(&csv, "t,rho_star");
    assert_eq!(rows.len(), 512);
    assert_eq!(rows[0][0], 0.0);
    assert!(rows.iter().all(|r| r.len() == 2 && r[1] > 0.0));

    let sidecar: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("orbit.csv.json")).unwrap())
            .unwrap();
    assert!(sidecar["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(sidecar["period"], 1.0);
    assert_eq!(sidecar["cells"], 512);
    assert!(sidecar["orbit_ref"].as_str().unwrap().starts_with("orbit-"));

    let second = dir.path().join("again.csv");
    let out = run(&[
        "periodic",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(csv, std::fs::read_to_string(&second).unwrap());
}

#[test]
fn periodic_without_out_splits_csv_and_json_streams() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", CANONICAL);
    let out = run(&["periodic", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(csv.starts_with("t,rho_star\n"));
    assert_eq!(csv.lines().count(), 513);
    let summary: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(summary["residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn periodic_on_constant_nutrient_returns_the_known_equilibrium() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", CONSTANT);
    let out = run(&["periodic", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows = parse_csv(&csv, "t,rho_star");
    assert_eq!(rows.len(), 512);
    for row in rows {
        assert!(
            (row[1] - 1.0).abs() <= 1e-9,
            "row at t = {} drifted to {}",
            row[0],
            row[1]
        );
    }
}

#[test]
fn periodic_refuses_an_extinction_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "e.json", EXTINCTION);
    let out = run(&["periodic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn gamma_table_matches_the_frozen_constant_case() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", CONSTANT);
    let csv_path = dir.path().join("gamma.csv");
    let out = run(&[
        "gamma-table",
        "--config",
        cfg.to_str().unwrap(),
        "--j-max",
        "4",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let rows = parse_csv(&csv, "j,k1,k2,gamma");
    assert_eq!(rows.len(), 4);

    // Threshold sits near 2.789 here, so the first two integers are on the
    // negative side and the last two on the positive side.
    let threshold = 2.789138866996106302066;
    for row in &rows {
        assert!(row[2] > 0.0);
        assert_eq!(row[3] > 0.0, row[0] > threshold, "j = {}", row[0]);
    }
    let gamma4 = 0.01096740145906234345706;
    assert!(
        (rows[3][3] - gamma4).abs() <= 1e-10 * gamma4,
        "gamma at j = 4 came out {}",
        rows[3][3]
    );

    let sidecar: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("gamma.csv.json")).unwrap())
            .unwrap();
    assert!((sidecar["j0"].as_f64().unwrap() - threshold).abs() < 1e-6);
    assert!(sidecar["sign_changes"].as_u64().unwrap() <= 1);

    let second = dir.path().join("again.csv");
    let out = run(&[
        "gamma-table",
        "--config",
        cfg.to_str().unwrap(),
        "--j-max",
        "4",
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(csv, std::fs::read_to_string(&second).unwrap());
}

#[test]
fn gamma_table_accepts_an_explicit_fractional_index_list() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{
          "params": {
            "mu": 1.0,
            "sigma_tilde": 0.7615941559557649,
            "nutrient": {"period": 1.0, "mean": 1.0, "harmonics": []}
          },
          "j_list": [0.5, 2.5, 7.25]
        }"#,
    );
    let out = run(&["gamma-table", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let rows = parse_csv(&String::from_utf8(out.stdout).unwrap(), "j,k1,k2,gamma");
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][0], 0.5);
    assert_eq!(rows[2][0], 7.25);
    assert!(rows[0][3] < 0.0 && rows[2][3] > 0.0);
}

#[test]
fn branches_lists_products_and_the_plus_form() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", CANONICAL);

    let out = run(&["branches", "--config", cfg.to_str().unwrap(), "--j", "5"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["j"], 5);
    assert_eq!(v["count_beta"], 1);
    let branches = v["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 1);
    assert_eq!(branches[0]["kind"], "product");
    assert_eq!(branches[0]["n"], 2);
    assert_eq!(branches[0]["m"], 1);

    let out = run(&["branches", "--config", cfg.to_str().unwrap(), "--j", "4"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let kinds: Vec<&str> = v["branches"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["product", "plus_form"]);
}

#[test]
fn branches_rejects_a_non_representable_index() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", CANONICAL);
    let out = run(&["branches", "--config", cfg.to_str().unwrap(), "--j", "3"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn branches_requires_a_mode_index() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", CANONICAL);
    let out = run(&["branches", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn surface_at_zero_amplitude_reduces_to_the_flat_orbit() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{
          "params": {
            "mu": 1.0,
            "sigma_tilde": 0.5,
            "nutrient": {"period": 1.0, "mean": 1.0, "harmonics": [[1, 0.25, 0.0]]}
          },
          "nx": 8,
          "nt": 8
        }"#,
    );
    let out = run(&[
        "surface",
        "--config",
        cfg.to_str().unwrap(),
        "--j",
        "5",
        "--epsilon",
        "0",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = parse_csv(&String::from_utf8(out.stdout).unwrap(), "t,x1,x2,y");
    assert_eq!(rows.len(), 9 * 8 * 8);

    // Zero amplitude: the height at a fixed time is independent of x, and
    // the first and last time slices agree because the orbit is periodic.
    let mut by_time: Vec<(f64, Vec<f64>)> = Vec::new();
    for row in &rows {
        match by_time.last_mut() {
            Some((t, hs)) if *t == row[0] => hs.push(row[3]),
            _ => by_time.push((row[0], vec![row[3]])),
        }
    }
    assert_eq!(by_time.len(), 9);
    for (t, heights) in &by_time {
        let first = heights[0];
        assert!(
            heights.iter().all(|&h| h == first),
            "heights vary across x at t = {t}"
        );
    }
    let first_slice = &by_time[0].1;
    let last_slice = &by_time[8].1;
    assert!((first_slice[0] - last_slice[0]).abs() < 1e-9);
}

#[test]
fn surface_rejects_an_oversized_amplitude() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", CANONICAL);
    let out = run(&[
        "surface",
        "--config",
        cfg.to_str().unwrap(),
        "--j",
        "5",
        "--epsilon",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("amplitude"), "stderr: {err}");
}

#[test]
fn surface_rejects_an_out_of_range_branch_index() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", CANONICAL);
    let out = run(&[
        "surface",
        "--config",
        cfg.to_str().unwrap(),
        "--j",
        "5",
        "--branch-index",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_passes_on_a_persistent_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", CANONICAL);
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let entries = stdout_json(&out);
    let entries = entries.as_array().unwrap();
    assert_eq!(entries.len(), 7);
    for e in entries {
        assert_eq!(e["passed"], true, "failed check: {e}");
    }
}

#[test]
fn validate_skips_orbit_checks_under_extinction() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "e.json", EXTINCTION);
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let entries = stdout_json(&out);
    let entries = entries.as_array().unwrap();
    assert_eq!(entries.len(), 7);
    let skipped = entries.iter().filter(|e| e["status"] == "skipped").count();
    assert_eq!(skipped, 5);
    for e in entries.iter().filter(|e| e.get("passed").is_some()) {
        assert_eq!(e["passed"], true);
    }
}

#[test]
fn out_path_is_used_directly_for_json_only_commands() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", CANONICAL);
    let path = dir.path().join("regime.json");
    let out = run(&[
        "classify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["regime"], "PersistentPeriodic");
    assert!(!Path::new(&format!("{}.json", path.display())).exists());
}
