//! Black-box tests of the `manhattan` binary: exit codes, artifacts, config
//! hashing and flag overrides.

use std::fs;
use std::path::PathBuf;

use assert_cmd::Command;
use predicates::prelude::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn manhattan() -> Command {
    Command::cargo_bin("manhattan").unwrap()
}

#[test]
fn validate_passes_on_conjugate_pair() {
    manhattan()
        .args(["validate", "--config"])
        .arg(fixture("conjugate_pair.json"))
        .assert()
        .success()
        .stdout(predicate::str::contains("overall: pass"))
        .stdout(predicate::str::contains("FAIL").not());
}

#[test]
fn validate_flags_overlapping_arcs_with_exit_1() {
    manhattan()
        .args(["validate", "--config"])
        .arg(fixture("overlapping_arcs.json"))
        .assert()
        .code(1)
        .stdout(predicate::str::contains("[FAIL] C3"));
}

#[test]
fn malformed_config_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"pair": {"rho1": {"generators": []}}, "bogus": 1}"#).unwrap();
    manhattan()
        .args(["validate", "--config"])
        .arg(&path)
        .assert()
        .code(2)
        .stderr(predicate::str::contains("config error"));
}

#[test]
fn missing_config_is_exit_2() {
    manhattan()
        .args(["validate", "--config", "/nonexistent/nope.json"])
        .assert()
        .code(2);
}

#[test]
fn bad_thread_count_is_exit_2() {
    manhattan()
        .env("MANHATTAN_THREADS", "zero")
        .args(["validate", "--config"])
        .arg(fixture("conjugate_pair.json"))
        .assert()
        .code(2)
        .stderr(predicate::str::contains("MANHATTAN_THREADS"));
}

#[test]
fn entropy_of_conjugate_pair_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    manhattan()
        .args(["entropy", "--config"])
        .arg(fixture("conjugate_pair.json"))
        .args(["--out"])
        .arg(dir.path())
        .assert()
        .success();
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("entropy.json")).unwrap())
            .unwrap();
    let h1 = doc["h1"].as_f64().unwrap();
    let h2 = doc["h2"].as_f64().unwrap();
    assert!(h1 > 0.5 && h1 < 1.0, "h1 = {h1}");
    assert!((h1 - h2).abs() < 1e-6, "h1 = {h1}, h2 = {h2}");
}

#[test]
fn pressure_below_phase_boundary_reports_infinite() {
    manhattan()
        .args(["pressure", "--config"])
        .arg(fixture("conjugate_pair.json"))
        .args(["--a", "1", "--b", "1", "--t", "0.2"])
        .assert()
        .success()
        .stdout(predicate::str::contains("\"pressure\": \"infinite\""));
}

#[test]
fn config_hash_ignores_formatting_but_tracks_overrides() {
    let original = fs::read_to_string(fixture("conjugate_pair.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&original).unwrap();
    let minified = serde_json::to_string(&value).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let alt = dir.path().join("minified.json");
    fs::write(&alt, minified).unwrap();

    let hash_of = |config: &std::path::Path, extra: &[&str]| -> String {
        let out = dir.path().join("out");
        manhattan()
            .args(["validate", "--config"])
            .arg(config)
            .arg("--out")
            .arg(&out)
            .args(extra)
            .assert()
            .success();
        let doc: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("validate.json")).unwrap()).unwrap();
        doc["config_hash"].as_str().unwrap().to_string()
    };

    let h_orig = hash_of(&fixture("conjugate_pair.json"), &[]);
    let h_mini = hash_of(&alt, &[]);
    assert_eq!(h_orig, h_mini, "hash must not depend on JSON formatting");
    let h_override = hash_of(&fixture("conjugate_pair.json"), &["--n-max", "16"]);
    assert_ne!(h_orig, h_override, "hash must cover effective overrides");
}

#[test]
fn curve_csv_has_header_and_sorted_rays() {
    let dir = tempfile::tempdir().unwrap();
    manhattan()
        .args(["curve", "--config"])
        .arg(fixture("conjugate_pair.json"))
        .args(["--rays", "3", "--out"])
        .arg(dir.path())
        .assert()
        .success();
    let csv = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# tool_version="));
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert_eq!(lines.next().unwrap(), "theta,a,b,t_root,residual,error_bar");
    let thetas: Vec<f64> = lines
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(thetas.len(), 5);
    assert!(thetas.windows(2).all(|w| w[0] < w[1]), "{thetas:?}");
}
