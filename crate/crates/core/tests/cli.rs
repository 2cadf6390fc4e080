//! Drives the built binary end to end.

use std::path::Path;
use std::process::{Command, Output};

fn gtssm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gtssm")).args(args).env_remove("GTSSM_PRECISION_DIGITS").output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synthesize_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("s3.json");
    let out = gtssm(&["synthesize", "symmetric:3", "--out", path(&model)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out = gtssm(&["verify", "--model", path(&model), "--exhaustive", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["sequences_checked"], (1..=6).map(|l| 6u64.pow(l)).sum::<u64>());

    let out = gtssm(&["verify", "--model", path(&model), "--random", "50", "--len", "200", "--seed", "7", "--format", "table"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict             pass"));
}

#[test]
fn tampered_model_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("c6.json");
    assert_eq!(gtssm(&["synthesize", "cyclic:6", "--out", path(&model)]).status.code(), Some(0));
    let mut m = gtssm::ssm::DcdSsm::from_json(&std::fs::read_to_string(&model).unwrap()).unwrap();
    m.negate_lambda(0, 0, 1, 0).unwrap();
    std::fs::write(&model, m.to_json()).unwrap();

    let out = gtssm(&["verify", "--model", path(&model), "--exhaustive", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "fail");
    assert!(report["first_counterexample"].is_object());
}

#[test]
fn usage_errors() {
    assert_eq!(gtssm(&["synthesize", "cyclic:0", "--out", "/dev/null"]).status.code(), Some(2));
    assert_eq!(gtssm(&["verify", "--model", "/nonexistent/model.json"]).status.code(), Some(2));
    assert_eq!(gtssm(&["gen-data", "--group", "cyclic:3", "--count", "0", "--len", "4", "--out", "/dev/null"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_gtssm"))
        .args(["synthesize", "cyclic:4", "--out", "/dev/null"])
        .env("GTSSM_PRECISION_DIGITS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_data_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for p in [&a, &b] {
        let out = gtssm(&["gen-data", "--group", "alternating:4", "--count", "20", "--len", "30", "--seed", "11", "--out", path(p)]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let (header, records) = gtssm::tasks::read_dataset(&a).unwrap();
    assert_eq!((header.count, header.len, records.len()), (20, 30, 20));
}

#[test]
fn classify_and_divergence_json() {
    let out = gtssm(&["classify", "--lambda", "1", "--b", "0.5,0", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["kind"], "Translation");

    let out = gtssm(&[
        "divergence-demo", "--lambda1", "-0.5,0.8660254037844386", "--c1", "0", "--lambda2", "-0.5,0.8660254037844386",
        "--c2", "1", "--repeats", "10", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["monotone"], true);
}
