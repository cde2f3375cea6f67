//! End-to-end binary tests: exit codes, output formats, and the
//! determinism acceptance criterion (two identical runs produce
//! byte-identical outputs).

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_anisotm"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        out.insert(
            entry.file_name().to_string_lossy().into_owned(),
            std::fs::read(entry.path()).unwrap(),
        );
    }
    out
}

fn suite_configs() -> Vec<(&'static str, String)> {
    vec![
        (
            "verify.json",
            r#"{
                "command": "verify",
                "gauge": {"form": "pnorm", "p": 2.0, "n": 2},
                "params": {"dim": 2, "q": 2.0},
                "grid_side": 48,
                "seed": 7
            }"#
            .to_string(),
        ),
        (
            "sweep.json",
            r#"{
                "command": "sweep",
                "gauge": {"form": "pnorm", "p": 2.0, "n": 2},
                "params": {"dim": 2, "q": 2.0, "lambda_fraction": 0.9},
                "inequality": "subcritical",
                "n_list": [8.0, 16.0, 32.0, 48.0],
                "seed": 7
            }"#
            .to_string(),
        ),
        (
            "mu.json",
            r#"{
                "command": "mu",
                "gauge": {"form": "pnorm", "p": 2.0, "n": 2},
                "params": {"dim": 2, "q": 2.0},
                "h_grid": [2.0, 3.0],
                "seed": 7
            }"#
            .to_string(),
        ),
        (
            "sup.json",
            r#"{
                "command": "sup",
                "gauge": {"form": "pnorm", "p": 2.0, "n": 2},
                "params": {"dim": 2, "q": 2.0, "a": 2.0, "b": 2.0},
                "lambda_fractions": [0.5, 0.8],
                "budget": 200,
                "seed": 7
            }"#
            .to_string(),
        ),
        (
            "symcheck.json",
            r#"{
                "command": "symcheck",
                "gauge": {"form": "pnorm", "p": 4.0, "n": 2},
                "params": {"dim": 2, "q": 2.0, "k": 2.0, "a": 2.0, "b": 2.0},
                "seed": 7
            }"#
            .to_string(),
        ),
    ]
}

fn run_suite(cfg_dir: &Path, out_dir: &Path) {
    for (name, body) in suite_configs() {
        let cfg = write_config(cfg_dir, name, &body);
        let status = bin()
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(out_dir)
            .arg("--seed")
            .arg("7")
            .status()
            .unwrap();
        assert!(status.success(), "{name} exited with {status}");
    }
}

#[test]
fn acceptance_12_byte_identical_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_dir = tmp.path().join("cfg");
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    std::fs::create_dir_all(&cfg_dir).unwrap();
    run_suite(&cfg_dir, &out_a);
    run_suite(&cfg_dir, &out_b);
    let tree_a = read_tree(&out_a);
    let tree_b = read_tree(&out_b);
    let mut failures = Vec::new();
    if tree_a.is_empty() {
        failures.push("no output files produced".to_string());
    }
    let names_a: Vec<&String> = tree_a.keys().collect();
    let names_b: Vec<&String> = tree_b.keys().collect();
    if names_a != names_b {
        failures.push(format!("file sets differ: {names_a:?} vs {names_b:?}"));
    }
    for (name, bytes) in &tree_a {
        if tree_b.get(name) != Some(bytes) {
            failures.push(format!("{name} differs between runs"));
        }
    }
    if failures.is_empty() {
        println!("ACCEPTANCE 12: PASS");
    } else {
        println!("ACCEPTANCE 12: FAIL");
        for f in &failures {
            println!("  - {f}");
        }
        panic!("criterion 12 failed: {failures:?}");
    }
}

#[test]
fn config_error_reports_exit_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.json",
        r#"{
            "command": "verify",
            "gauge": {"form": "pnorm", "p": 2.0, "n": 2},
            "params": {"dim": 2, "q": 2.0, "beta": 2.0},
            "seed": 1
        }"#,
    );
    let out = bin().arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("must be < N"), "stderr: {err}");
}

#[test]
fn unknown_config_field_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "unknown.json",
        r#"{
            "command": "verify",
            "gauge": {"form": "pnorm", "p": 2.0, "n": 2},
            "params": {"dim": 2, "q": 2.0},
            "seed": 1,
            "typo_field": true
        }"#,
    );
    let out = bin().arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_emits_summary_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "verify.json",
        r#"{
            "command": "verify",
            "gauge": {"form": "ellipsoid", "a": [[1.0, 0.0], [0.0, 2.0]]},
            "params": {"dim": 2, "q": 2.0},
            "module": "gauge",
            "seed": 3
        }"#,
    );
    let out_dir = tmp.path().join("out");
    let status = bin()
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let summary = std::fs::read_to_string(out_dir.join("verify_summary.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(v["summary"]["violations"], 0);
}

#[test]
fn sweep_supports_json_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sweep.json",
        r#"{
            "command": "sweep",
            "gauge": {"form": "pnorm", "p": 2.0, "n": 2},
            "params": {"dim": 2, "q": 2.0, "lambda_fraction": 0.5},
            "n_list": [8.0, 16.0, 32.0],
            "seed": 2
        }"#,
    );
    let out_dir = tmp.path().join("out");
    let status = bin()
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .arg("--format")
        .arg("json")
        .status()
        .unwrap();
    assert!(status.success());
    let rows = std::fs::read_to_string(out_dir.join("sweep_rows.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&rows).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    // CSV format on the same config produces the tabular file instead.
    let out_dir2 = tmp.path().join("out2");
    let status = bin()
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir2)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out_dir2.join("sweep_rows.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("n,q,p,beta,lambda,value"));
    assert_eq!(lines.count(), 3);
}
