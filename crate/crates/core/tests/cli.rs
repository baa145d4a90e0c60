use std::path::Path;
use std::process::{Command, Output};

fn freespec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freespec")).args(args).env_remove("FREESPEC_THREADS").output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const SEMICIRCLE: &str = r#"{"d": 1, "coeffs": [[[1, 0]]]}"#;

#[test]
fn params_and_edges() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", SEMICIRCLE);
    let out = freespec(&["params", &m]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["sigma"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let out = freespec(&["free-edge", &m]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["lambda_max"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    // floats at 17 significant digits
    assert!(String::from_utf8_lossy(&out.stdout).contains("e0,"));
}

#[test]
fn density_csv() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", SEMICIRCLE);
    let out = freespec(&["free-density", &m, "--xlo", "-1", "--xhi", "1", "--steps", "2", "--eta", "1e-6"]);
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    let mid: Vec<&str> = s.lines().nth(2).unwrap().split(',').collect();
    let rho: f64 = mid[1].parse().unwrap();
    assert!((rho - 1.0 / std::f64::consts::PI).abs() < 1e-4);
}

#[test]
fn phase_report() {
    let dir = tempfile::tempdir().unwrap();
    let b = write(dir.path(), "b.json", r#"{"block_sizes": [30], "B": [[2.0]]}"#);
    let out = freespec(&["phase", &b]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["phase"], "c");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(freespec(&["nonsense"]).status.code(), Some(2));
    assert_eq!(freespec(&["params", "/nonexistent/m.json"]).status.code(), Some(1));
    let bad = write(dir.path(), "bad.json", r#"{"kind": "scov", "n": 10, "p": 5, "grid": [], "trials": 1, "master_seed": 0}"#);
    assert_eq!(freespec(&["simulate", &bad]).status.code(), Some(2));
    let neg = write(dir.path(), "neg.json", r#"{"d": 1, "coeffs": [[[1, 0]]], "a0": [[1, 1]]}"#);
    assert_eq!(freespec(&["params", &neg]).status.code(), Some(2));
    assert_eq!(freespec(&["figure", "nope"]).status.code(), Some(2));
    assert_eq!(freespec(&["--help"]).status.code(), Some(0));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"kind": "bbp-sweep", "d": 60, "grid": [0.5, 2.0], "trials": 4, "master_seed": 3}"#);
    let csv = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = freespec(&["simulate", &cfg, "--threads", threads, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    let a = csv("a.csv", "1");
    assert_eq!(a, csv("b.csv", "1"));
    assert_eq!(a, csv("c.csv", "4"));
    assert!(dir.path().join("a.summary.json").exists() && dir.path().join("a.vl.json").exists());
}
