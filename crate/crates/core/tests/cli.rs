use std::fs;
use std::process::{Command, Output};

fn shadowing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shadowing")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn shadow_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = shadowing(&["shadow", "--trials", "30", "--seed", "4", "--out", out, "--emit-error-table"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("30/30 certificates verified"));
    let csv = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(csv.lines().count(), 31);
    let header_cols = csv.lines().next().unwrap().split(',').count();
    assert!(csv.lines().all(|l| l.split(',').count() == header_cols));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("result: PASS"));
    let certs = fs::read_to_string(dir.path().join("certificates.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(certs.lines().next().unwrap()).unwrap();
    assert!(first["error_table"].is_array());
    assert!(dir.path().join("timings.csv").exists());
}

#[test]
fn oversized_jump_scale_is_rejected_with_rho() {
    let dir = tempfile::tempdir().unwrap();
    let o = shadowing(&["shadow", "--jump-scale", "2^-4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("rho 1/524288"), "{err}");
}

#[test]
fn falsify_exit_status_contract() {
    let dir = tempfile::tempdir().unwrap();
    let certified = shadowing(&["falsify", "--trials", "200", "--out", dir.path().to_str().unwrap()]);
    assert!(certified.status.success());
    assert!(!dir.path().join("witness.txt").exists());

    let inflated_dir = tempfile::tempdir().unwrap();
    let inflated = shadowing(&[
        "falsify",
        "--delta",
        "1/2",
        "--trials",
        "200",
        "--out",
        inflated_dir.path().to_str().unwrap(),
    ]);
    assert!(inflated.status.success());
    assert!(stdout(&inflated).contains("witness found"));
    let witness = fs::read_to_string(inflated_dir.path().join("witness.txt")).unwrap();
    assert!(witness.contains("[xi]") && witness.contains("[eta]"));

    let vacuous_dir = tempfile::tempdir().unwrap();
    let vacuous = shadowing(&["falsify", "--trials", "0", "--out", vacuous_dir.path().to_str().unwrap()]);
    assert!(vacuous.status.success());
    let report = fs::read_to_string(vacuous_dir.path().join("report.txt")).unwrap();
    assert!(report.contains("vacuous"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    let out = dir.path().join("out");
    fs::write(&config, format!("system = toral\ntrials = 50\njumps = 2\nout = {}\n", out.display())).unwrap();
    let o = shadowing(&["shadow", "--config", config.to_str().unwrap(), "--trials", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("6/6 certificates verified on toral"));
    let csv = fs::read_to_string(out.join("trials.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn gen_and_constants() {
    let a = shadowing(&["gen", "--jumps", "3", "--seed", "8"]);
    let b = shadowing(&["gen", "--jumps", "3", "--seed", "8"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 5);

    let c = shadowing(&["constants", "--system", "shift", "--epsilon", "2^-5"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&c)).unwrap();
    assert_eq!(doc["delta"]["exact"], "1/32");
    assert_eq!(doc["n"], 5);
    assert_eq!(doc["provenance"]["delta"]["method"], "minimum");

    let bad = shadowing(&["constants", "--epsilon", "0"]);
    assert_eq!(bad.status.code(), Some(2));
}
