//! End-to-end checks of the command line surface: exit codes, JSON
//! summaries and CSV artifacts.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn warpcurv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warpcurv"))
        .args(args)
        .output()
        .expect("spawn warpcurv")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn check_model_passes_and_reports_the_constants() {
    let out = warpcurv(&["check-model"]);
    assert!(out.status.success());
    let json = stdout_json(&out);
    assert_eq!(json["pass"], Value::Bool(true));
    assert_eq!(json["constants"]["r1212"].as_f64(), Some(-1.0));
    assert_eq!(json["constants"]["r1234"].as_f64(), Some(0.5));
    assert!(json["max_deviation"].as_f64().unwrap() < 1e-10);
}

#[test]
fn solve_alpha_reports_the_half_half_minus_half_solution() {
    let out = warpcurv(&["solve-alpha"]);
    assert!(out.status.success());
    let json = stdout_json(&out);
    assert_eq!(json["pass"], Value::Bool(true));
    let solutions = json["solutions"].as_array().unwrap();
    assert_eq!(solutions.len(), 3);
    for sol in solutions {
        assert!((sol["alpha1"].as_f64().unwrap() - 0.5).abs() < 1e-10);
        assert!((sol["alpha3"].as_f64().unwrap() + 0.5).abs() < 1e-10);
        assert!(sol["condition_number"].as_f64().unwrap() < 1e6);
    }
}

#[test]
fn audit_emits_summary_and_csv_and_reports_negative_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let out = warpcurv(&[
        "audit",
        "--grid-points",
        "120",
        "--plane-samples",
        "1000",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json = stdout_json(&out);
    assert!(json["sup_k_max"].as_f64().unwrap() < 0.0);
    assert_eq!(json["negative_everywhere"], Value::Bool(true));
    assert_eq!(json["regions"].as_array().unwrap().len(), 7);

    let csv_path = dir.path().join("audit-points.csv");
    let header = first_line(&csv_path);
    assert!(header.starts_with("r,region_id,r1212,"));
    assert!(header.contains("m_1a"));
    assert!(header.ends_with("status,route,failing,deficit"));
}

#[test]
fn audit_summaries_are_reproducible() {
    let args = ["audit", "--grid-points", "110", "--plane-samples", "1000"];
    let first = warpcurv(&args);
    let second = warpcurv(&args);
    assert!(first.status.success() && second.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn export_csv_writes_both_tables_with_monotone_regions() {
    let dir = tempfile::tempdir().unwrap();
    let out = warpcurv(&[
        "export-csv",
        "--grid-points",
        "150",
        "--plane-samples",
        "1000",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let warp = std::fs::read_to_string(dir.path().join("warp-functions.csv")).unwrap();
    assert!(warp.starts_with("r,region_id,v,h_theta,h_r,ln_v,ln_h_theta,ln_h_r"));

    let curvature = std::fs::read_to_string(dir.path().join("curvature.csv")).unwrap();
    let mut regions = Vec::new();
    for line in curvature.lines().skip(1) {
        let region: u8 = line.split(',').nth(1).unwrap().parse().unwrap();
        regions.push(region);
    }
    assert!(regions.windows(2).all(|w| w[0] <= w[1]), "region ids step monotonically");
    assert_eq!(regions.first(), Some(&1));
    assert_eq!(regions.last(), Some(&7));
}

#[test]
fn region6_check_accepts_the_closed_forms() {
    let out = warpcurv(&["region6-check"]);
    assert!(out.status.success());
    let json = stdout_json(&out);
    assert!(json["max_deviation"].as_f64().unwrap() < 1e-9);
    assert!(json["model_deviation"].as_f64().unwrap() < 1e-10);
}

#[test]
fn config_file_fills_defaults_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{"epsilon": 0.02, "grid_points": 130}"#).unwrap();
    let out = warpcurv(&[
        "build-profile",
        "--config",
        config.to_str().unwrap(),
        "--k",
        "25",
    ]);
    assert!(out.status.success());
    let json = stdout_json(&out);
    assert_eq!(json["config"]["epsilon"].as_f64(), Some(0.02));
    assert_eq!(json["config"]["k"].as_f64(), Some(25.0));
    assert_eq!(json["config"]["grid_points"].as_u64(), Some(130));
}

#[test]
fn usage_and_config_errors_exit_with_code_two() {
    let unknown = warpcurv(&["definitely-not-a-subcommand"]);
    assert_eq!(unknown.status.code(), Some(2));

    let bad_epsilon = warpcurv(&["audit", "--epsilon", "0.3"]);
    assert_eq!(bad_epsilon.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_epsilon.stderr).contains("epsilon"));

    let small_grid = warpcurv(&["audit", "--grid-points", "12"]);
    assert_eq!(small_grid.status.code(), Some(2));
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}
