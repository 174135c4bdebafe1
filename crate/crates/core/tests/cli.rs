//! End-to-end runs of the `egedyn` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn egedyn(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_egedyn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("EGEDYN_THREADS")
        .output()
        .expect("binary runs")
}

fn read_json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn out_of_range_tau_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = egedyn(tmp.path(), &["simulate", "--set", "sim.tau=2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tau"));
}

#[test]
fn unknown_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = egedyn(tmp.path(), &["simulate", "--set", "sim.colour=3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hermitian_verify_includes_normal_overlaps() {
    let tmp = tempfile::tempdir().unwrap();
    let o = egedyn(tmp.path(), &["verify", "--set", "sim.tau=1", "--set", "sim.n=3", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(tmp.path().join("report_verify.json"));
    let reports = report.as_array().unwrap();
    let normal: Vec<&Value> = reports
        .iter()
        .filter(|r| r["name"].as_str().unwrap().starts_with("normal_overlaps_identity"))
        .collect();
    assert!(!normal.is_empty());
    assert!(normal.iter().all(|r| r["pass"] == Value::Bool(true)));
}

#[test]
fn identities_output_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["identities", "--seed", "3", "--set", "subcommand-defaults.identities.matrices=5"];
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(egedyn(&a, &args).status.code(), Some(0));
    assert_eq!(egedyn(&b, &args).status.code(), Some(0));
    let ra = std::fs::read(a.join("report_identities.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("report_identities.json")).unwrap());
    let ma = read_json(a.join("manifest.json"));
    let mb = read_json(b.join("manifest.json"));
    assert_eq!(ma["config_hash"], mb["config_hash"]);
    let other = tmp.path().join("c");
    egedyn(&other, &["identities", "--seed", "4", "--set", "subcommand-defaults.identities.matrices=5"]);
    assert_ne!(read_json(other.join("manifest.json"))["config_hash"], ma["config_hash"]);
}

#[test]
fn zero_start_is_degenerate() {
    let tmp = tempfile::tempdir().unwrap();
    let o = egedyn(tmp.path(), &["simulate", "--set", r#"sim.initial={"kind":"zero"}"#]);
    assert_eq!(o.status.code(), Some(3));
    let dump = read_json(tmp.path().join("degeneracy.json"));
    assert!(dump.is_object());
    assert!(tmp.path().join("manifest.json").exists());
}

#[test]
fn config_file_is_merged_with_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(&cfg, r#"{"sim": {"n": 2, "steps": 20, "replicas": 2, "tau": 0.25}}"#).unwrap();
    let out = tmp.path().join("out");
    let o = egedyn(&out, &["simulate", "--config", cfg.to_str().unwrap(), "--set", "sim.steps=30", "--seed", "12"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(out.join("manifest.json"));
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["seed"], 12);
    assert_eq!(m["config"]["sim"]["n"], 2);
    assert_eq!(m["config"]["sim"]["steps"], 30);
    assert_eq!(m["config"]["sim"]["tau"], 0.25);
    assert_eq!(m["config"]["stats"]["seed"], 12);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    for key in ["version", "started", "finished"] {
        assert!(m[key].is_string(), "{key}");
    }
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(outputs.contains(&"trajectory_0000.csv") && outputs.contains(&"trajectory_0001.csv"));
    let csv = std::fs::read_to_string(out.join("trajectory_0001.csv")).unwrap();
    assert_eq!(csv.lines().count(), 32);

    std::fs::write(&cfg, "[1, 2]").unwrap();
    let o = egedyn(&out, &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_count_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["two-by-two", "--seed", "5", "--set", "sim.n=2", "--set", "subcommand-defaults.two-by-two.draws=4000"];
    let run = |dir: &Path, threads: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_egedyn"));
        c.args(args).arg("--out").arg(dir).env_remove("EGEDYN_THREADS");
        if let Some(t) = threads {
            c.env("EGEDYN_THREADS", t);
        }
        c.output().unwrap()
    };
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(run(&a, None).status.code(), Some(0));
    assert_eq!(run(&b, Some("2")).status.code(), Some(0));
    assert_eq!(
        std::fs::read(a.join("report_two_by_two.json")).unwrap(),
        std::fs::read(b.join("report_two_by_two.json")).unwrap()
    );
    let bad = run(&tmp.path().join("c"), Some("many"));
    assert_eq!(bad.status.code(), Some(2));
}
