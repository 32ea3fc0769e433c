use std::process::Command;

use irs_mas::cli::resolve_args;
use irs_mas::report::from_json;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_irs-mas"))
}

#[test]
fn noiseless_default_config_is_error_free() {
    let out = bin().args(["--trials", "300"]).output().unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("L=8 bits"), "{stderr}");
    assert!(stderr.contains("ber=0.0000e0"), "{stderr}");
}

#[test]
fn oversized_ml_search_fails() {
    let out = bin()
        .args(["--detector", "ml", "--ml-limit", "100", "--trials", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_flag_is_usage_error() {
    let out = bin().args(["--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ssk_capacity() {
    let run = resolve_args("--scheme sas-ssk --nr 16").unwrap();
    let cfg = run.config.validate().unwrap();
    assert_eq!(cfg.bits_per_transmission(), 4);
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = bin()
        .args(["--trials", "200", "--snr", "-20:5:-10", "--format", "json", "--seed", "7", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 3);
    let doc = from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc.seed, 7);
    assert_eq!(doc.rows.len(), 3);
    assert_eq!(doc.rows[0].snr_db, -20.0);
    assert_eq!(doc.rows[0].trials, 200);
}
