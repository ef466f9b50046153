use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use clap::Parser;
use minimax_cli::{Cli, RunConfig};
use serde_json::Value;
use tempfile::TempDir;

fn solve(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solve"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Rows of a CSV file as `header -> value` lookups.
fn csv_rows(path: &Path) -> Vec<Vec<(String, String)>> {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn field<'a>(row: &'a [(String, String)], name: &str) -> &'a str {
    &row.iter()
        .find(|(h, _)| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
        .1
}

#[test]
fn ex53_from_ones_converges() {
    let dir = TempDir::new().unwrap();
    let out = solve(&["minimax", "--problem", "ex53", "--theta0", "1,1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&dir.path().join("summary.json"));
    assert_eq!(s["termination"], "pTol");
    assert!(s["stationarityResidual"].as_f64().unwrap() <= 1e-4);
    assert!(dir.path().join("trace.csv").exists());
    assert!(dir.path().join("trace.json").exists());
}

#[test]
fn exhausted_budget_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = solve(
        &["minimax", "--problem", "ex51", "--theta0", "3,-2", "--max-iter", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&dir.path().join("summary.json"))["termination"], "maxIter");
}

#[test]
fn divergence_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"solver": {"divergenceRadius": 2.0}}"#).unwrap();
    let out = solve(
        &["minimax", "--problem", "ex53", "--config", cfg.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&dir.path().join("summary.json"))["termination"], "divergence");
}

#[test]
fn bad_sigma_in_config_names_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"problem": "ex51", "solver": {"sigma": 1.5}}"#).unwrap();
    let out = solve(&["minimax", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));
}

#[test]
fn flags_override_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"problem": "ex51", "solver": {"sigma": 1.5}}"#).unwrap();
    let out = solve(
        &["minimax", "--config", cfg.to_str().unwrap(), "--sigma", "0.5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("summary.json"))["config"]["solver"]["sigma"], 0.5);
}

#[test]
fn config_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    for (args, needle) in [
        (vec!["minimax"], "problem"),
        (vec!["minimax", "--problem", "ex51", "--epsilon", "0.7"], "epsilon"),
        (vec!["minimax", "--problem", "ex51", "--theta0", "1,2,3"], "theta0"),
        (vec!["minimax", "--problem", "nope"], "problem"),
        (vec!["mop", "--problem", "ex51", "--H", "0"], "H"),
        (vec!["minimax", "--problem", "ex51", "--ptol", "abc"], "ptol"),
    ] {
        let out = solve(&args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(needle), "{args:?}");
    }
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"problem": "ex51", "solver": {"sigmaa": 0.5}}"#).unwrap();
    let out = solve(&["minimax", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigmaa"));
}

#[test]
fn ex51_front_from_ones() {
    let dir = TempDir::new().unwrap();
    let out = solve(&["mop", "--problem", "ex51", "--H", "9", "--theta0", "1,1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("front_raw.csv"));
    assert_eq!(rows.len(), 10);
    for r in &rows {
        assert!(field(r, "stationarityResidual").parse::<f64>().unwrap() <= 1e-3);
        assert_eq!(field(r, "terminationReason"), "pTol");
    }
    for name in ["front_filtered.csv", "refs.csv", "plotdata.json", "summary.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let plot = json(&dir.path().join("plotdata.json"));
    assert_eq!(plot["points"].as_array().unwrap().len(), 10);
    assert_eq!(plot["points"][0]["objectives"].as_array().unwrap().len(), 2);
}

#[test]
fn ex52_front_lies_on_segment() {
    let dir = TempDir::new().unwrap();
    let out = solve(
        &["mop", "--problem", "ex52", "--n", "20", "--H", "8", "--seed", "3"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("front_raw.csv"));
    assert_eq!(rows.len(), 9);
    for r in &rows {
        let theta: Vec<f64> = (1..=20)
            .map(|j| field(r, &format!("theta_{j}")).parse().unwrap())
            .collect();
        let s = (theta.iter().sum::<f64>() / 20.0 * 20.0).clamp(-1.0, 1.0);
        let dist = theta.iter().map(|t| (t - s / 20.0).abs()).fold(0.0, f64::max);
        assert!(dist <= 1e-3, "{dist}");
    }
}

#[test]
fn single_partition_gives_endpoints() {
    let dir = TempDir::new().unwrap();
    let out = solve(&["mop", "--problem", "ex53", "--H", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv_rows(&dir.path().join("refs.csv")).len(), 2);
    assert_eq!(csv_rows(&dir.path().join("front_raw.csv")).len(), 2);
}

#[test]
fn filtered_rows_appear_in_raw() {
    let dir = TempDir::new().unwrap();
    let out = solve(&["mop", "--problem", "ex53", "--H", "8", "--seed", "11"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let raw = fs::read_to_string(dir.path().join("front_raw.csv")).unwrap();
    let filtered = fs::read_to_string(dir.path().join("front_filtered.csv")).unwrap();
    let raw_lines: Vec<&str> = raw.lines().collect();
    for line in filtered.lines() {
        assert!(raw_lines.contains(&line), "{line}");
    }
}

#[test]
fn seeded_runs_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for mode in ["minimax", "mop"] {
        let args = [mode, "--problem", "ex53", "--seed", "42", "--jobs", "3"];
        assert_eq!(solve(&args, a.path()).status.code(), Some(0));
        assert_eq!(solve(&args, b.path()).status.code(), Some(0));
        let file = if mode == "mop" { "front_raw.csv" } else { "trace.csv" };
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap()
        );
    }
    let s = json(&a.path().join("summary.json"));
    assert_eq!(s["seed"], 42);
}

#[test]
fn summary_config_reparses() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "solve",
        "mop",
        "--problem",
        "ex52",
        "--n",
        "4",
        "--H",
        "3",
        "--seed",
        "9",
        "--delta",
        "0.1",
        "--out",
        out,
    ];
    let code = minimax_cli::main_with_args(args);
    assert_eq!(code, 0);
    let echoed: RunConfig = serde_json::from_value(json(&dir.path().join("summary.json"))["config"].clone()).unwrap();
    let direct = Cli::try_parse_from(args).unwrap().into_config().unwrap();
    assert_eq!(echoed, direct);
}

#[test]
fn json_only_output() {
    let dir = TempDir::new().unwrap();
    let out = solve(&["minimax", "--problem", "ex51", "--formats", "json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(!dir.path().join("trace.csv").exists());
    let trace = json(&dir.path().join("trace.json"));
    assert!(trace["records"][0]["theta"].is_array());
}

#[test]
fn large_dimension_elides_coordinates() {
    let dir = TempDir::new().unwrap();
    let out = solve(
        &["minimax", "--problem", "ex52", "--n", "60", "--seed", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("trace.json"))["records"][0]["theta"], "elided");
}

#[test]
fn gen_refs_lists_lattice() {
    let dir = TempDir::new().unwrap();
    let out = solve(&["gen-refs", "--m", "2", "--H", "4"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("refs.csv"));
    let u1: Vec<f64> = rows.iter().map(|r| field(r, "u_1").parse().unwrap()).collect();
    assert_eq!(u1, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}

#[test]
fn validate_outcomes() {
    let dir = TempDir::new().unwrap();
    let out = solve(&["validate"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = json(&dir.path().join("validate.json"));
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 5);

    let out = solve(&["validate", "--problem", "ex51-corrupt"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    let report = json(&dir.path().join("validate.json"));
    let grad = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "gradients/ex51-corrupt")
        .unwrap();
    assert_eq!(grad["passed"], false);

    let out = solve(&["validate", "--problem", "ex52", "--n", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}
