use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mfbose(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfbose"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn number(v: &Value) -> f64 {
    v.as_f64().expect("numeric field")
}

#[test]
fn selftest_passes_on_bundled_torus() {
    let out = mfbose(&["selftest", "--model", "torus", "--deterministic"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["pass"], Value::Bool(true));
    assert!(report["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn free_gas_has_no_corrections() {
    let out = mfbose(&["expand", "--model", "free", "--order", "3", "--nmax", "11", "--deterministic"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let energies = report["E"].as_array().unwrap();
    assert_eq!(energies.len(), 4);
    for e in energies {
        assert_eq!(number(e), 0.0);
    }
}

#[test]
fn energy_study_on_torus_fixture() {
    let out = mfbose(&["verify", "energy", "--order", "1", "--deterministic"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert_eq!(summary["pass"], Value::Bool(true));
    let slope = number(&summary["slope"]);
    assert!((1.8..=2.3).contains(&slope), "slope {slope}");
}

fn run_into(dir: &Path) {
    let out = mfbose(&[
        "verify",
        "wavefunction",
        "--order",
        "1",
        "--Nlist",
        "10,14,20,28",
        "--deterministic",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_into(a.path());
    run_into(b.path());
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 3);
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
    }
}

#[test]
fn csv_has_title_and_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    run_into(dir.path());
    let csv = fs::read_to_string(dir.path().join("verify_wavefunction.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# "));
    assert!(lines.next().unwrap().starts_with("N,lambda,error"));
    let lambda = lines.next().unwrap().split(',').nth(1).unwrap();
    let mantissa = lambda.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn sector_reach_violation_is_a_config_error() {
    let out = mfbose(&["expand", "--order", "2", "--nmax", "6"]);
    assert_eq!(out.status.code(), Some(4));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config_error");
    assert!(err["message"].as_str().unwrap().contains("2 + 3a"));
}

#[test]
fn small_particle_numbers_are_rejected() {
    let out = mfbose(&["verify", "energy", "--Nlist", "5,10,14,20"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn excessive_order_hits_resource_guard() {
    let out = mfbose(&["expand", "--order", "7", "--nmax", "23"]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "resource_limit");
}

#[test]
fn torus_rdm_matches_closed_form() {
    let out = mfbose(&["rdm", "--nmax", "12", "--deterministic"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert!(number(&report["closed_form_deviation"]) <= 1e-6);
}

#[test]
fn config_file_drives_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "model = \"free\"\norder = 1\ndeterministic = true\n").unwrap();
    let out = mfbose(&["expand", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["model"], "free");
    assert!(report.get("elapsed_seconds").is_none());
}
