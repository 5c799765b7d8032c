//! End-to-end tests of the binary: pipeline runs, exit-code contract,
//! determinism, and refusal of corrupted artifacts.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_delay-orbits");

const LINEAR_CONFIG: &str = r#"
[problem]
family = "linear_affine"
dim = 1
matrix = [1.0]

[[problem.forcing]]
component = 0
k = 0
re = 0.4
im = 0.0

[[problem.forcing]]
component = 0
k = 1
re = 0.3
im = -0.2

[[problem.forcing]]
component = 0
k = 2
re = -0.1
im = 0.05

[discretization]
k_max = 16

[verify]
steps_per_unit = 512
"#;

const LIMIT_CYCLE_CONFIG: &str = r#"
[problem]
family = "limit_cycle"

[seed]
guess = [1.0, 0.0]
"#;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(dir).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn seed_continue_verify_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), LINEAR_CONFIG);
    let config = config.to_str().unwrap();

    let out = run(&["seed", "--config", config, "--json"], dir.path());
    assert!(out.status.success(), "seed failed: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "NonDegenerate");
    // Scalar a = 1: the single multiplier is e.
    let mu = report["multipliers"][0][0].as_f64().unwrap();
    assert!((mu - std::f64::consts::E).abs() < 1e-9, "multiplier {mu}");

    let out = run(
        &["continue", "--config", config, "--seed-file", "seed.json", "--json"],
        dir.path(),
    );
    assert!(out.status.success(), "continue failed: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["points"].as_u64().unwrap() >= 13);
    assert!((report["tau_range"][0].as_f64().unwrap() + 0.3).abs() < 1e-12);
    assert!((report["tau_range"][1].as_f64().unwrap() - 0.3).abs() < 1e-12);
    assert!(dir.path().join("branch.csv").exists());
    let csv = std::fs::read_to_string(dir.path().join("branch.csv")).unwrap();
    assert!(csv.starts_with("tau,norm0,norm1,min_multiplier_dist,newton_iters,periodicity_residual"));

    let out = run(&["verify", "--config", config, "--branch", "branch.json"], dir.path());
    assert!(out.status.success(), "verify failed: {}", String::from_utf8_lossy(&out.stderr));

    let out = run(&["certify", "--seed-file", "seed.json"], dir.path());
    assert!(out.status.success(), "certify failed: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn degenerate_problem_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), LIMIT_CYCLE_CONFIG);
    let out = run(&["seed", "--config", config.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_config_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[problem]\nfamily = \"sombrero\"\n");
    let out = run(&["seed", "--config", config.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    // Machine-readable error report on standard error.
    let err: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    assert!(err["error"].as_str().unwrap().contains("sombrero"));
}

#[test]
fn corrupted_branch_is_refused_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), LINEAR_CONFIG);
    let config = config.to_str().unwrap();
    assert!(run(&["seed", "--config", config], dir.path()).status.success());
    assert!(run(
        &["continue", "--config", config, "--seed-file", "seed.json"],
        dir.path()
    )
    .status
    .success());

    let branch_path = dir.path().join("branch.json");
    let mut text = std::fs::read_to_string(&branch_path).unwrap();
    let at = text.find("coefficients").unwrap();
    let digit = text[at..].find(|c: char| ('1'..='8').contains(&c)).unwrap() + at;
    let bumped = (text.as_bytes()[digit] + 1) as char;
    text.replace_range(digit..digit + 1, &bumped.to_string());
    std::fs::write(&branch_path, text).unwrap();

    let out = run(&["verify", "--config", config, "--branch", "branch.json"], dir.path());
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn continuation_is_deterministic_up_to_timestamps() {
    let strip_timestamp = |path: &Path| -> serde_json::Value {
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timestamp");
        v
    };

    let mut branches = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path(), LINEAR_CONFIG);
        let config = config.to_str().unwrap();
        assert!(run(&["seed", "--config", config], dir.path()).status.success());
        assert!(run(
            &["continue", "--config", config, "--seed-file", "seed.json"],
            dir.path()
        )
        .status
        .success());
        branches.push(strip_timestamp(&dir.path().join("branch.json")));
    }
    assert_eq!(branches[0], branches[1]);
}

#[test]
fn properties_command_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["properties", "--json"], dir.path());
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);
}
