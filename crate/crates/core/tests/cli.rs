//! End-to-end checks of the command-line driver: outputs, determinism and
//! exit codes (0 success, 1 failed criterion, 2 usage/config error).

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cantor-tubes"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited with a code")
}

const BASE: &str = r#"{
    "params": {"dim": 2, "levels": [
        {"branching": 2, "keep": 2}, {"branching": 2, "keep": 2},
        {"branching": 2, "keep": 2}, {"branching": 2, "keep": 2}
    ]},
    "rule": "uniform",
    "seed": 9
}"#;

#[test]
fn generate_writes_the_expected_cube_count_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", BASE);
    for _ in 0..2 {
        let out = bin()
            .args(["generate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let saved = dir.path().join("realization_uniform_9.json");
    let first = std::fs::read(&saved).unwrap();
    let parsed: serde_json::Value = serde_json::from_slice(&first).unwrap();
    let deepest = parsed["levels"].as_array().unwrap().last().unwrap();
    assert_eq!(deepest.as_array().unwrap().len(), 16); // P_4 = 2^4

    // Re-generate into a second directory: byte-identical output.
    let dir2 = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["generate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir2.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let second = std::fs::read(dir2.path().join("realization_uniform_9.json")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn seed_override_changes_the_output_name_and_content() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", BASE);
    let out = bin()
        .args(["generate", "--config"])
        .arg(&cfg)
        .args(["--seed", "10", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let a = std::fs::read(dir.path().join("realization_uniform_10.json")).unwrap();
    let out = bin()
        .args(["generate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let b = std::fs::read(dir.path().join("realization_uniform_9.json")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn inspect_prints_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", BASE);
    let out = bin()
        .args(["generate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let out = bin()
        .arg("inspect")
        .arg(dir.path().join("realization_uniform_9.json"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(text.contains("rule: uniform"), "{text}");
    assert!(text.contains("deepest cubes: 16"), "{text}");
    assert!(text.contains("limit dimension: 1.000000"), "{text}");
}

#[test]
fn overfull_keep_count_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{
            "params": {"dim": 2, "levels": [{"branching": 2, "keep": 5}]},
            "rule": "uniform",
            "seed": 0
        }"#,
    );
    let out = bin()
        .args(["generate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("error"), "{err}");
}

#[test]
fn unknown_experiment_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", BASE);
    let out = bin()
        .args(["experiment", "--name", "nonsense", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn too_few_box_dim_scales_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{
            "params": {"dim": 2, "levels": [
                {"branching": 2, "keep": 2}, {"branching": 2, "keep": 2},
                {"branching": 2, "keep": 2}, {"branching": 2, "keep": 2}
            ]},
            "rule": "uniform",
            "seed": 9,
            "box_dim": {"directions": 2, "depth_min": 3, "depth_max": 4}
        }"#,
    );
    let out = bin()
        .args(["experiment", "--name", "box-dim", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn inadmissible_mgf_override_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{
            "params": {"dim": 2, "levels": [
                {"branching": 2, "keep": 2}, {"branching": 2, "keep": 2},
                {"branching": 2, "keep": 2}, {"branching": 2, "keep": 2},
                {"branching": 2, "keep": 2}, {"branching": 2, "keep": 2}
            ]},
            "rule": "uniform",
            "seed": 9,
            "level": 6,
            "trials": 10,
            "flat": {"base": [0.51, 0.32], "spanning": [[1.0, 0.5]]},
            "concentration": {"t": 0.8, "k": 1, "eps": 0.04, "lambda": 1e9}
        }"#,
    );
    let out = bin()
        .args(["experiment", "--name", "mgf", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn passing_experiment_writes_a_versioned_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{
            "params": {"dim": 2, "levels": [
                {"branching": 2, "keep": 2}, {"branching": 2, "keep": 2},
                {"branching": 2, "keep": 2}, {"branching": 2, "keep": 2}
            ]},
            "rule": "uniform",
            "seed": 9,
            "level": 4,
            "trials": 400,
            "flat": {"base": [0.51, 0.32], "spanning": [[1.0, 0.5]]}
        }"#,
    );
    let out = bin()
        .args([
            "experiment",
            "--name",
            "martingale",
            "--format",
            "csv",
            "--config",
        ])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("martingale: PASS"));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("martingale_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["format_version"], 1);
    assert_eq!(report["config"]["seed"], 9);
    assert_eq!(report["passed"], true);
    assert!(dir.path().join("martingale_mean.csv").exists());
}
