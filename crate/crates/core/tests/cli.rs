use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use redeploy::cli::{RunManifest, MANIFEST, SUMMARY, WEEKLY_METRICS};

const TINY: &str = r#"
method = "saa"
network = "hub_and_spoke"
[counts]
testing_paths = 1
training_paths = 2
training_sets = 1
weeks = 1
"#;

fn redeploy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_redeploy")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn tiny_run_finishes_quickly_and_reruns_from_its_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "tiny.toml", TINY);
    let first = dir.path().join("first");
    let start = Instant::now();
    let out = redeploy(&["run", "--config", &cfg, "--seed", "5", "--out", first.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(start.elapsed() < Duration::from_secs(10), "took {:?}", start.elapsed());
    for f in [WEEKLY_METRICS, SUMMARY, MANIFEST] {
        assert!(first.join(f).exists(), "{f} missing");
    }
    let manifest = RunManifest::read(&first.join(MANIFEST)).unwrap();
    assert!(manifest.complete);
    assert_eq!(manifest.config.seed, 5);

    let second = dir.path().join("second");
    let out = redeploy(&["run", "--config", first.join(MANIFEST).to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(manifest.changed_files(&second).unwrap(), Vec::<std::path::PathBuf>::new());

    // The report subcommand rebuilds the same summary from the weekly metrics.
    let before = fs::read(first.join(SUMMARY)).unwrap();
    fs::remove_file(first.join(SUMMARY)).unwrap();
    let out = redeploy(&["report", "--out", first.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read(first.join(SUMMARY)).unwrap(), before);
}

#[test]
fn simulate_writes_testing_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "tiny.toml", TINY);
    let out = redeploy(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    for f in ["trace.csv", "demand.csv", "capacity.csv"] {
        assert!(dir.path().join("testing").join(f).exists(), "{f} missing");
    }
}

#[test]
fn validation_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[costs]\ncancellation_fee = 1.5\n[counts]\nweeks = 0\n");
    let out = redeploy(&["run", "--config", &bad]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cancellation_fee") && err.contains("weeks"), "{err}");

    let unknown = write(dir.path(), "unknown.toml", "colour = 1\n");
    assert_eq!(redeploy(&["run", "--config", &unknown]).status.code(), Some(1));
    assert_eq!(redeploy(&["run", "--config", "/no/such/file.toml"]).status.code(), Some(1));
    assert_eq!(redeploy(&["run", "--method", "greedy"]).status.code(), Some(1));
}

#[test]
fn runtime_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = redeploy(&["report", "--out", dir.path().join("absent").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
