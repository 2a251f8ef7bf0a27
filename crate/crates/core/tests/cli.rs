use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rg-spectra")).args(args).env_remove("RG_SPECTRA_THREADS").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn verify_kernels_passes() {
    let out = run(&["verify", "kernels"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["suite"], "kernels");
    assert_eq!(report["pass"], true);
    assert!(report["checks"].as_array().unwrap().len() > 10);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["chi", "--b", "4"]).status.code(), Some(2));
    assert_eq!(run(&["witness", "--transform", "majority", "--lambda", "0.9"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn chi_table_rows() {
    let out = run(&["chi", "--b", "3", "--d", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    // three singletons and the full block; even patterns vanish
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[1].parse::<usize>().unwrap() % 2 == 1));

    let out = run(&["chi", "--b", "5", "--pattern", "[[0]]"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().nth(1).unwrap().contains(",3/8,0.375"), "{text}");
}

#[test]
fn rgmap_of_zero_is_zero_and_escapes_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.json");
    std::fs::write(&zero, r#"{"dimension":1,"lattice":"original","terms":[]}"#).unwrap();
    let out = run(&["rgmap", "--input", zero.to_str().unwrap(), "--transform", "majority", "--window", "[[0],[1]]"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(&out)["terms"].as_array().unwrap().is_empty());

    let far = dir.path().join("far.json");
    std::fs::write(&far, r#"{"dimension":1,"lattice":"original","terms":[{"sites":[[0],[40]],"value":0.3}]}"#).unwrap();
    let out = run(&["rgmap", "--input", far.to_str().unwrap(), "--window", "[[0]]"]);
    assert_eq!(out.status.code(), Some(3));

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["rgmap", "--input", missing.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn eigvec_and_witness_certificates_pass() {
    let out = run(&["eigvec", "--transform", "majority", "--lambda", "3/8", "--depth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let cert = json(&out);
    assert_eq!(cert["verdict"], "pass");
    assert_eq!(cert["measured"], 0.0);

    let out = run(&["witness", "--transform", "majority", "--lambda", "0.2", "--samples", "100", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let cert = json(&out);
    assert_eq!(cert["kind"], "residual-witness");
    assert_eq!(cert["seed"], 7);
    assert!(cert["measured"].as_f64().unwrap() >= 0.25);
}

#[test]
fn stirling_table_decreases() {
    let out = run(&["stirling", "--s", "3,5,7,9,25"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let ratios: Vec<f64> = reader.records().map(|r| r.unwrap()[4].parse().unwrap()).collect();
    assert_eq!(ratios.len(), 5);
    assert!(ratios.windows(2).all(|w| w[1] < w[0]));
    assert!((ratios[0] - 1.08540).abs() < 5e-5);
}

#[test]
fn reports_are_byte_identical_across_runs_and_threads() {
    let args = ["verify", "spectral", "--samples", "40", "--seed", "3"];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0));
    let second = run(&[&args[..], &["--threads", "1"]].concat());
    let third = run(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.stdout, third.stdout);
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&["--out", path.to_str().unwrap(), "verify", "witness", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["suite"], "witness");
    assert_eq!(written["pass"], true);
}

#[test]
fn norms_report_and_majority_adjoint_findings() {
    let out = run(&["norms", "--transform", "majority", "--direction", "adjoint", "--samples", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["status"] == "finding"));
}
