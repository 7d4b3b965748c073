//! End-to-end checks of the `rlp` binary: CSV contract, manifest output,
//! determinism, and error reporting.

use std::path::Path;
use std::process::{Command, Output};

fn rlp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rlp"))
}

/// Small deterministic regression CSV: y depends on the first two columns.
fn write_toy_csv(path: &Path, n: usize) -> usize {
    let mut rows = String::from("y,alpha,beta,gamma,delta\n");
    for i in 0..n {
        let t = i as f64;
        let a = (0.7 * t).sin();
        let b = (1.3 * t + 0.5).cos();
        let c = ((i * 37 + 11) % 101) as f64 / 101.0 - 0.5;
        let d = ((i * 53 + 29) % 97) as f64 / 97.0 - 0.5;
        let noise = (7.1 * t).sin() * 0.05;
        let y = 1.5 * a - 2.0 * b + 0.3 * c + noise;
        rows.push_str(&format!("{y},{a},{b},{c},{d}\n"));
    }
    std::fs::write(path, rows).unwrap();
    4
}

fn run(args: &[&str]) -> Output {
    rlp().args(args).output().expect("binary should launch")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn fit_writes_one_row_per_variable_plus_intercept() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    let p = write_toy_csv(&csv, 60);

    let out = run(&[
        "--output-dir",
        dir.path().to_str().unwrap(),
        "fit",
        "--input",
        csv.to_str().unwrap(),
        "--response",
        "y",
        "--seed",
        "3",
    ]);
    assert_success(&out);

    let rows = read_csv(&dir.path().join("fit.csv"));
    assert_eq!(rows[0], ["variable", "coefficient", "selected", "lambda"]);
    assert_eq!(rows.len(), 2 + p, "header + intercept + one row per column");
    assert_eq!(rows[1][0], "(intercept)");
    let names: Vec<&str> = rows[2..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["alpha", "beta", "gamma", "delta"]);

    let manifest = std::fs::read_to_string(dir.path().join("run_manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(v["subcommand"], "fit");
    assert_eq!(v["master_seed"], 3);
    assert!(v["outputs"].as_array().is_some_and(|o| !o.is_empty()));
}

#[test]
fn ci_intervals_are_ordered_and_cover_every_variable() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    let p = write_toy_csv(&csv, 80);

    let out = run(&[
        "--output-dir",
        dir.path().to_str().unwrap(),
        "ci",
        "--input",
        csv.to_str().unwrap(),
        "--response",
        "y",
        "--level",
        "0.9",
        "--seed",
        "11",
    ]);
    assert_success(&out);

    let rows = read_csv(&dir.path().join("intervals.csv"));
    assert_eq!(rows.len(), 1 + p, "header + one row per predictor");
    let header = &rows[0];
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (lo, hi, est) = (col("lower"), col("upper"), col("lasso_estimate"));
    for row in &rows[1..] {
        let l: f64 = row[lo].parse().unwrap();
        let u: f64 = row[hi].parse().unwrap();
        let e: f64 = row[est].parse().unwrap();
        assert!(l <= u, "interval out of order: {row:?}");
        assert!(l.is_finite() && u.is_finite() && e.is_finite());
    }
}

#[test]
fn explicit_lambda_and_sigma2_skip_cross_validation() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    write_toy_csv(&csv, 50);

    let out = run(&[
        "--output-dir",
        dir.path().to_str().unwrap(),
        "ci",
        "--input",
        csv.to_str().unwrap(),
        "--response",
        "y",
        "--lambda",
        "0.05",
        "--sigma2",
        "1.0",
    ]);
    assert_success(&out);
    assert!(dir.path().join("intervals.csv").exists());
}

#[test]
fn same_seed_same_output_different_seed_differs() {
    let base = tempfile::tempdir().unwrap();
    let csv = base.path().join("toy.csv");
    write_toy_csv(&csv, 70);

    let run_ci = |sub: &str, seed: &str| {
        let dir = base.path().join(format!("{sub}_{seed}"));
        std::fs::create_dir(&dir).unwrap();
        let out = run(&[
            "--output-dir",
            dir.to_str().unwrap(),
            "ci",
            "--input",
            csv.to_str().unwrap(),
            "--response",
            "y",
            "--seed",
            seed,
        ]);
        assert_success(&out);
        std::fs::read(dir.join("intervals.csv")).unwrap()
    };

    let a = run_ci("a", "5");
    let b = run_ci("b", "5");
    let c = run_ci("c", "6");
    assert_eq!(a, b, "same seed must reproduce byte-identical intervals");
    assert_ne!(a, c, "different fold seeds should move the tuned penalty");
}

#[test]
fn missing_response_column_is_a_clean_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    write_toy_csv(&csv, 40);

    let out = run(&[
        "--output-dir",
        dir.path().to_str().unwrap(),
        "fit",
        "--input",
        csv.to_str().unwrap(),
        "--response",
        "no_such_column",
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("no_such_column"),
        "stderr should name the missing column, got: {err}"
    );
}

#[test]
fn nonexistent_input_file_is_a_clean_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--output-dir",
        dir.path().to_str().unwrap(),
        "fit",
        "--input",
        "/definitely/not/here.csv",
        "--response",
        "y",
    ]);
    assert!(!out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn bad_lambda_flag_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    write_toy_csv(&csv, 40);

    let out = run(&[
        "--output-dir",
        dir.path().to_str().unwrap(),
        "fit",
        "--input",
        csv.to_str().unwrap(),
        "--response",
        "y",
        "--lambda",
        "banana",
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("banana"), "stderr should echo the bad value: {err}");
}

#[test]
fn sim_bias_writes_expected_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--output-dir",
        dir.path().to_str().unwrap(),
        "--threads",
        "1",
        "sim",
        "bootstrap-bias",
        "--reps",
        "4",
        "--boot-b",
        "8",
        "--seed",
        "2",
    ]);
    assert_success(&out);
    assert!(dir.path().join("run_manifest.json").exists());
    let entries: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert!(
        entries.iter().any(|e| e.ends_with(".csv")),
        "bias run should emit at least one CSV, found {entries:?}"
    );
}
