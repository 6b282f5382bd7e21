use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use anomalylab_cli::output::sha256_hex;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anomalylab"))
        .args(args)
        .current_dir(dir)
        .env_remove("ANOMALYLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn manifest_checksums_match_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["phase-diagram", "--grid", "7", "--out", "pd.csv", "--manifest", "run.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read(dir.path().join("pd.csv")).unwrap();
    let text = String::from_utf8(csv.clone()).unwrap();
    assert!(text.starts_with("# anomalylab phase-diagram schema 1\n"));
    assert_eq!(text.lines().count(), 2 + 49);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "phase-diagram");
    assert_eq!(m["config"]["resolution"], 7);
    assert_eq!(m["outputs"][0]["sha256"], sha256_hex(&csv));
    assert_eq!(m["outputs"][0]["bytes"], csv.len());
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", r#"{"tau_max": 40.0, "n_samples": 201, "drift_steps": 200}"#);
    let a = run(dir.path(), &["drift", "--config", &cfg, "--threads", "1"]);
    let b = run(dir.path(), &["drift", "--config", &cfg, "--threads", "4"]);
    assert!(a.status.success() && b.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn calibrate_writes_one_file_per_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["calibrate", "--grid", "5", "--species", "na23", "--out", "cal"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<String> = fs::read_dir(dir.path().join("cal"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert!(names.contains(&"feasibility-na23.csv".to_string()), "{names:?}");
    assert!(names.contains(&"equal-hopping.csv".to_string()), "{names:?}");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("unknown.json", r#"{"no_such_field": 1}"#),
        ("broken.json", "{"),
        ("range.json", r#"{"delta_t": 1.5}"#),
        ("path.json", r#"{"k_path": "G;Q"}"#),
    ] {
        let cfg = write(dir.path(), name, text);
        let out = run(dir.path(), &["bands", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = run(dir.path(), &["current", "--oracle", "sideways"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_errors_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["phase-diagram", "--config", "missing.json"]);
    assert_eq!(out.status.code(), Some(4));
    write(dir.path(), "blocker", "");
    let out = run(dir.path(), &["phase-diagram", "--grid", "3", "--out", "blocker/pd.csv"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn oracle_disagreement_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"tau_max": 2.0, "n_samples": 3, "oracle": "pump", "oracle_grid": 8, "pump_rtol": 1e-15}"#,
    );
    let out = run(dir.path(), &["current", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    // The table is still written before the failure is reported.
    assert!(String::from_utf8_lossy(&out.stdout).contains("J_oracle"));
}
