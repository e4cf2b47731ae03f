use std::path::{Path, PathBuf};

use assert_cmd::Command;
use predicates::prelude::*;
use tempfile::TempDir;

fn bin() -> Command {
    Command::cargo_bin("ic3region").unwrap()
}

fn write(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.join(name);
    std::fs::write(&path, out.stdout).unwrap();
    path
}

fn fixtures(flip: &str) -> (TempDir, PathBuf, PathBuf) {
    let dir = TempDir::new().unwrap();
    let channel = write(dir.path(), "channel.json", &["generate", "modulo", "--q", "2", "--flip", flip]);
    let pmf = write(dir.path(), "pmf.json", &["generate", "pmf", channel.to_str().unwrap(), "--seed", "5"]);
    (dir, channel, pmf)
}

#[test]
fn validate_accepts_generated_channels() {
    let (_dir, channel, _) = fixtures("1/10");
    bin().arg("validate").arg(&channel).assert().success();
}

#[test]
fn corrupt_inputs_exit_with_code_two() {
    let (dir, channel, _) = fixtures("0");
    let text = std::fs::read_to_string(&channel).unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, text.replacen("\"1\"", "\"one\"", 1)).unwrap();
    bin()
        .arg("validate")
        .arg(&broken)
        .assert()
        .code(2)
        .stderr(predicate::str::contains("line").and(predicate::str::contains("noise")));
    bin().arg("validate").arg(dir.path().join("missing.json")).assert().code(2);
    std::fs::write(&broken, "{").unwrap();
    bin().arg("validate").arg(&broken).assert().code(2);
}

#[test]
fn invalid_channel_lists_the_violation() {
    let (dir, channel, _) = fixtures("0");
    let mut spec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&channel).unwrap()).unwrap();
    spec["noise"][0][0][0] = serde_json::json!("1/2");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, spec.to_string()).unwrap();
    bin().arg("validate").arg(&bad).assert().code(2).stderr(predicate::str::contains("invalid channel"));
}

#[test]
fn membership_of_the_origin() {
    let (_dir, channel, pmf) = fixtures("0");
    let zeros = vec!["0"; 18].join(" ");
    bin().arg("member").arg(&channel).arg(&pmf).args(["--rates", &zeros]).assert().success();
    let huge = vec!["5"; 18].join(" ");
    bin().arg("member").arg(&channel).arg(&pmf).args(["--rates", &huge]).assert().code(1);
    bin().arg("member").arg(&channel).arg(&pmf).args(["--rates", "0 0"]).assert().code(2);
    bin()
        .arg("member")
        .arg(&channel)
        .arg(&pmf)
        .arg("--list-coords")
        .assert()
        .success()
        .stdout(predicate::str::contains("Rt12"));
}

#[test]
fn measures_print_json_and_constraints_print_rows() {
    let (_dir, channel, pmf) = fixtures("1/10");
    let out = bin().arg("measures").arg(&channel).arg(&pmf).output().unwrap();
    assert!(out.status.success());
    serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap();
    bin()
        .arg("constraints")
        .arg(&channel)
        .arg(&pmf)
        .args(["--receiver", "1"])
        .assert()
        .success()
        .stdout(predicate::str::contains("rx1(3,3,3)").and(predicate::str::contains("rx2").not()));
    bin().arg("constraints").arg(&channel).arg(&pmf).args(["--receiver", "7"]).assert().code(2);
}

#[test]
fn verify_checks_pass() {
    let (_dir, channel, pmf) = fixtures("0");
    bin().args(["verify", "identities"]).arg(&channel).arg(&pmf).assert().success();
    bin().args(["verify", "noiseless"]).arg(&channel).arg(&pmf).assert().success();
    bin().args(["verify", "tin"]).arg(&channel).arg(&pmf).args(["--directions", "8"]).assert().success();
}

#[test]
fn noiseless_check_fails_on_a_noisy_channel() {
    let (_dir, channel, pmf) = fixtures("1/10");
    bin().args(["verify", "noiseless"]).arg(&channel).arg(&pmf).assert().code(predicate::ne(0));
}

#[test]
fn project_writes_region_files_and_compares_with_itself() {
    let (dir, channel, pmf) = fixtures("0");
    let out = dir.path().join("out");
    bin()
        .arg("project")
        .arg(&channel)
        .arg(&pmf)
        .args(["--rays", "8", "--seed", "1", "--name", "r"])
        .arg("--out")
        .arg(&out)
        .assert()
        .success();
    let csv = std::fs::read_to_string(out.join("r.csv")).unwrap();
    assert!(csv.starts_with("R1,R2,R3,selection_id,pmf_id"), "{csv}");
    assert!(csv.lines().count() > 1);
    assert!(std::fs::read_to_string(out.join("r.off")).unwrap().starts_with("OFF"));
    let json = out.join("r.json");
    bin().arg("compare").arg(&json).arg(&json).args(["--directions", "16"]).assert().success();
}

#[test]
fn suite_with_a_small_config_writes_a_manifest() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("suite.json");
    let cfg = serde_json::json!({
        "modulo": [{"q": 2, "flip": "0"}],
        "pmf_samples": 2,
        "random_identity_channels": 2,
        "noiseless_channels": 2,
        "hk_samples": 1,
        "region_samples": 1,
        "directions": 8,
        "budget": {"rays": 8}
    });
    std::fs::write(&config, cfg.to_string()).unwrap();
    let out = dir.path().join("suite-out");
    bin().arg("suite").arg("--config").arg(&config).arg("--out").arg(&out).assert().success();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], serde_json::json!(true));
    for artifact in manifest["artifacts"].as_array().unwrap() {
        assert!(out.join(artifact["path"].as_str().unwrap()).exists());
    }
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("suite.json");
    std::fs::write(&config, r#"{"pmf_sample": 3}"#).unwrap();
    bin().arg("suite").arg("--config").arg(&config).assert().code(2).stderr(predicate::str::contains("pmf_sample"));
}
