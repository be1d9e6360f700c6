use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const MINIMAL: &str = r#"
dim = 1
modes = 32
dt = 1e-4
t_end = 0.005
snapshot_stride = 10

[sigma]
form = "smooth_sublinear"
alpha = 0.1
c = 1.0

[initial]
kind = "random_smooth"
amplitude = 0.5
decay = 2.0
"#;

fn schac(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schac"))
        .args(args)
        .current_dir(dir)
        .env_remove("SCHAC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_owned()
}

fn digests(manifest: &Path) -> Vec<(String, String)> {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(manifest).unwrap()).unwrap();
    v["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| (f["path"].as_str().unwrap().to_owned(), f["sha256"].as_str().unwrap().to_owned()))
        .collect()
}

#[test]
fn simulate_writes_outputs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", MINIMAL);
    let a = schac(&["simulate", "--config", &cfg, "--out-dir", "a", "--paths", "3"], dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    for f in ["manifest.json", "config.json", "path_0000.bin", "path_0000.json", "energy_0002.csv"] {
        assert!(dir.path().join("a").join(f).exists(), "{f} missing");
    }
    let b = schac(
        &["simulate", "--config", &cfg, "--out-dir", "b", "--paths", "3", "--workers", "1"],
        dir.path(),
    );
    assert!(b.status.success());
    let (da, db) = (digests(&dir.path().join("a/manifest.json")), digests(&dir.path().join("b/manifest.json")));
    assert_eq!(da.len(), 10);
    assert_eq!(da, db);

    let csv = std::fs::read_to_string(dir.path().join("a/energy_0000.csv")).unwrap();
    assert!(csv.starts_with("t,mass,L2,H1,H2,free_energy\n"));
}

#[test]
fn seed_flag_changes_the_noise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", MINIMAL);
    assert!(schac(&["simulate", "--config", &cfg, "--out-dir", "a"], dir.path()).status.success());
    assert!(schac(&["simulate", "--config", &cfg, "--out-dir", "b", "--seed", "9"], dir.path()).status.success());
    let bin = |d: &str| std::fs::read(dir.path().join(d).join("path_0000.bin")).unwrap();
    assert_ne!(bin("a"), bin("b"));
}

#[test]
fn out_dir_defaults_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", MINIMAL);
    let out = Command::new(env!("CARGO_BIN_EXE_schac"))
        .args(["simulate", "--config", &cfg])
        .current_dir(dir.path())
        .env("SCHAC_OUT_DIR", "from-env")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("from-env/manifest.json").exists());
}

#[test]
fn alpha_outside_window_needs_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &MINIMAL.replace("alpha = 0.1", "alpha = 0.2"));
    let out = schac(&["simulate", "--config", &cfg, "--out-dir", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha outside (0,1/9)"));
    let out = schac(&["simulate", "--config", &cfg, "--out-dir", "o", "--override-alpha"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "typo.toml", "modse = 32\n");
    let out = schac(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("modse"));

    let cfg = write(dir.path(), "dt.toml", "dt = -1.0\n");
    let out = schac(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));

    let out = schac(&["simulate", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn green_suite_passes_and_detects_forced_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = schac(&["green-verify", "--out-dir", "g"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = std::fs::read_to_string(dir.path().join("g/green_report.jsonl")).unwrap();
    assert_eq!(report.lines().count(), 10);

    let cfg = write(dir.path(), "c2.toml", "forced_c2 = 5.0\nreduced = true\n");
    let out = schac(&["green-verify", "--config", &cfg, "--out-dir", "g2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] pointwise_bound/d1/value"));
}

#[test]
fn green_suite_reduced_three_dimensional() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d3.toml", "dim = 3\nreduced = true\n");
    let out = schac(&["green-verify", "--config", &cfg, "--out-dir", "g"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn holder_with_two_paths_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "h.toml",
        "modes = 64\ndt = 1e-3\nt_end = 0.1\npaths = 2\n[sigma]\nform = \"constant\"\nalpha = 0.0\nc = 1.0\n",
    );
    let out = schac(&["holder", "--config", &cfg, "--out-dir", "h"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("low confidence"));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("h/holder_report.json")).unwrap()).unwrap();
    assert_eq!(report["flagged"], Value::Bool(true));
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn holder_deterministic_rough_datum_meets_lower_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "h.toml",
        "modes = 128\ndt = 1e-3\nt_end = 0.05\npaths = 1\n[sigma]\nform = \"zero\"\nalpha = 0.0\nc = 0.0\n\
         [initial]\nkind = \"holder\"\ndelta = 0.5\n",
    );
    let out = schac(&["holder", "--config", &cfg, "--out-dir", "h"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn holder_rejects_bad_lags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "h.toml", "modes = 16\n[holder]\nspace_lags = [1, 8]\n");
    let out = schac(&["holder", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
}
