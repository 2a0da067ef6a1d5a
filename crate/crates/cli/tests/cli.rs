use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn overshoot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_overshoot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_bundle(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timing.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

const SKIP_FREE: &str = r#""triplet": {"jumps": {"atoms": [{"size": 1, "rate": "3/10"}, {"size": -1, "rate": "7/10"}]}}"#;

#[test]
fn classify_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!(r#"{{"experiment": "classify", "levels": [2.5], {SKIP_FREE}}}"#));
    let out_dir = dir.path().join("out");
    let out = overshoot(&["classify", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(out_dir.join("classification.csv")).unwrap();
    assert!(table.contains("UpwardsSkipFree"));
    assert!(out_dir.join("manifest.json").exists());
    assert!(out_dir.join("timing.json").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("status: ok"));
}

#[test]
fn invalid_identity_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!(r#"{{"experiment": "identity", "b": 1, "c": 2, {SKIP_FREE}}}"#));
    let out = overshoot(&["identity", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("require 0<c<b"));
}

#[test]
fn missing_config_and_wrong_subcommand_exit_one() {
    assert_eq!(overshoot(&["qx"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!(r#"{{"experiment": "classify", {SKIP_FREE}}}"#));
    let out = overshoot(&["qx", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("subcommand"));
}

#[test]
fn qx_json_with_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!(r#"{{"experiment": "qx", "levels": [1.5], "n": 1000, {SKIP_FREE}}}"#));
    let out_dir = dir.path().join("out");
    let out = overshoot(&["qx", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--format", "json", "--seed", "77"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let law: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("law_0.json")).unwrap()).unwrap();
    assert_eq!(law["seed"], 77);
    assert_eq!(law["rows"][0]["position"], 2.0);
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 77);
    assert!(manifest["version"].is_string());
}

#[test]
fn mixed_verdicts_exit_two() {
    // delta = 1 merges {2, 3, 4} at level 1.5 but not {1, 3} at level 0.5
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "consistency", "levels": [0.5, 1.5], "n": 2000, "delta": 1.0,
            "triplet": {"jumps": {"atoms": [{"size": 1, "rate": "1/2"}, {"size": 3, "rate": "1/2"}]}}}"#,
    );
    let out = overshoot(&["consistency", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("violation"));
}

#[test]
fn zoo_bundle_is_reproducible_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out_dir = dir.path().join(name);
        let out = overshoot(&["zoo", "--n", "1000", "--seed", "5", "--workers", workers, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        read_bundle(&out_dir)
    };
    let a = run("a", "1");
    let b = run("b", "4");
    assert!(a.contains_key("zoo.csv"));
    assert_eq!(a, b);
}
