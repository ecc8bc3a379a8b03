// Copyright (c) The transvec authors.
// Licensed under the MIT License.

use std::process::{Command, Output};

use serde_json::Value;

fn transvec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transvec"))
        .args(args)
        .env_remove("TRANSVEC_CAP")
        .env_remove("TRANSVEC_FORMAT")
        .env_remove("TRANSVEC_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn spectrum_two_copy_matches_closed_form() {
    let out = transvec(&["spectrum", "--t", "2", "--m", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["dim"], 16);
    assert_eq!(v["report_only"], false);
    assert!((v["second_eigenvalue"].as_f64().unwrap() - 0.625).abs() < 1e-12);
    let total: u64 = v["entries"].as_array().unwrap().iter().map(|e| e["multiplicity"].as_u64().unwrap()).sum();
    assert_eq!(total, 16);
}

#[test]
fn spectrum_three_copy_single_qubit_is_report_only() {
    let out = transvec(&["spectrum", "--t", "3", "--m", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report_only"], true);
    assert!(v["note"].is_string());
    let bound = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "second_eigenvalue_bound").unwrap();
    assert_eq!(bound["asserted"], false);
}

#[test]
fn spectrum_csv_has_one_row_per_entry() {
    let out = transvec(&["spectrum", "--t", "2", "--m", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,m,sector,eigenvalue,multiplicity"));
    let mult: u64 = lines.map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(mult, 16);
}

#[test]
fn missing_qubit_count_is_usage_error() {
    assert_eq!(transvec(&["spectrum", "--t", "3"]).status.code(), Some(2));
    assert_eq!(transvec(&["verify"]).status.code(), Some(2));
    assert_eq!(transvec(&["spectrum", "--t", "4", "--m", "2"]).status.code(), Some(2));
}

#[test]
fn cap_exceeded_exits_three() {
    let out = transvec(&["spectrum", "--t", "3", "--m", "3", "--cap", "100"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
    let env = Command::new(env!("CARGO_BIN_EXE_transvec"))
        .args(["verify", "--m", "3"])
        .env("TRANSVEC_CAP", "64")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(3));
}

#[test]
fn certify_two_copy_at_unit_epsilon() {
    let out = transvec(&["certify", "--t", "2", "--epsilon", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["k"], 6);
    assert_eq!(v["method"], "closed_form");
    assert_eq!(v["closed_form_holds"], true);
}

#[test]
fn certify_three_copy_requires_three_qubits() {
    assert_eq!(transvec(&["certify", "--t", "3", "--m", "2", "--epsilon", "0.1"]).status.code(), Some(2));
    let out = transvec(&["certify", "--t", "3", "--m", "3", "--epsilon", "0.0009765625"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["k"], 47);
}

#[test]
fn certify_rejects_bad_epsilon() {
    assert_eq!(transvec(&["certify", "--t", "2", "--epsilon", "0"]).status.code(), Some(2));
    assert_eq!(transvec(&["certify", "--t", "2", "--epsilon", "1.5"]).status.code(), Some(2));
}

#[test]
fn certify_empirical_two_qubits() {
    let out = transvec(&["certify", "--t", "2", "--m", "2", "--epsilon", "0.25", "--empirical"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["method"], "spectral");
    assert!((v["lambda"].as_f64().unwrap() - 0.625).abs() < 1e-9);
    assert!(v["empirical_op_norm"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_two_qubits_passes() {
    let out = transvec(&["verify", "--m", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["sectors"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_negative_control_fails() {
    let out = transvec(&["verify", "--m", "2", "--negative-control", "--no-sectors"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn verify_list_prints_names() {
    let out = transvec(&["verify", "--list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "invariance:vnc_d"));
    assert!(text.lines().any(|l| l == "sector:c"));
}

#[test]
fn sample_is_deterministic_and_valid() {
    let args = ["sample", "--m", "3", "--k", "4", "--n", "20", "--seed", "9"];
    let a = transvec(&args);
    let b = transvec(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 20);
    for (i, line) in text.lines().enumerate() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["index"], i);
        let tv = v["transvections"].as_array().unwrap();
        assert_eq!(tv.len(), 4);
        for pair in tv {
            let h = pair[0].as_str().unwrap();
            assert_eq!(h.len(), 7);
            assert_eq!(&h[3..4], "|");
        }
    }
}

#[test]
fn sample_zero_is_empty() {
    let out = transvec(&["sample", "--m", "2", "--k", "3", "--n", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    let p = path.to_str().unwrap();
    let to_file = transvec(&["spectrum", "--t", "2", "--m", "2", "--out", p]);
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty());
    let stdout = transvec(&["spectrum", "--t", "2", "--m", "2"]);
    assert_eq!(std::fs::read(&path).unwrap(), stdout.stdout);
}

#[test]
fn csv_rejected_outside_spectrum() {
    assert_eq!(transvec(&["sample", "--m", "2", "--k", "1", "--format", "csv"]).status.code(), Some(2));
}
