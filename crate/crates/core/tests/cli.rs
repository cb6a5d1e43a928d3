use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn noma(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noma-ra"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

const SMALL: &str = r#"{
  "counts": [2, 2],
  "levels": 2,
  "slots": 300,
  "hidden": [16, 16]
}
"#;

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("small.json"), SMALL).unwrap();
    dir
}

#[test]
fn train_then_simulate_round_trip() {
    let dir = workspace();
    let p = dir.path();
    let out = noma(
        &[
            "train",
            "--config",
            "small.json",
            "--reward",
            "geomean",
            "--epochs",
            "40",
            "--out",
            "hist.csv",
            "--matrix-out",
            "matrix.json",
        ],
        p,
    );
    let summary = stdout_json(&out);
    assert_eq!(summary["epochs"], 40);

    let hist = fs::read_to_string(p.join("hist.csv")).unwrap();
    let mut lines = hist.lines();
    assert_eq!(
        lines.next().unwrap(),
        "epoch,reward,arith_mean,geo_mean,min_throughput,type_1,type_2"
    );
    assert_eq!(lines.count(), 40);

    let sim = noma(
        &[
            "simulate",
            "--config",
            "small.json",
            "--matrix",
            "matrix.json",
            "--seed",
            "3",
            "--out",
            "dev.csv",
        ],
        p,
    );
    let v = stdout_json(&sim);
    assert_eq!(v["slots"], 300);
    let mut rdr = csv::Reader::from_path(p.join("dev.csv")).unwrap();
    let types: Vec<String> = rdr.records().map(|r| r.unwrap()[1].to_string()).collect();
    assert_eq!(types, ["1", "1", "2", "2"]);

    let oracle = stdout_json(&noma(
        &[
            "oracle",
            "--config",
            "small.json",
            "--matrix",
            "matrix.json",
        ],
        p,
    ));
    assert_eq!(oracle["type_means"].as_array().unwrap().len(), 2);
    assert!(oracle["rewards"]["total"].as_f64().unwrap() > 0.0);
}

#[test]
fn training_output_does_not_depend_on_thread_count() {
    let dir = workspace();
    let p = dir.path();
    let mut csvs = Vec::new();
    for threads in ["1", "3"] {
        let name = format!("h{threads}.csv");
        let out = Command::new(env!("CARGO_BIN_EXE_noma-ra"))
            .args([
                "train",
                "--config",
                "small.json",
                "--reward",
                "min",
                "--epochs",
                "24",
                "--seed",
                "9",
            ])
            .args(["--out", &name])
            .env("NOMA_RA_THREADS", threads)
            .current_dir(p)
            .output()
            .unwrap();
        assert!(out.status.success());
        csvs.push(fs::read(p.join(name)).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn matrix_from_action_zero_is_uniform() {
    let dir = workspace();
    fs::write(dir.path().join("a.json"), "[0, 0, 0, 0, 0, 0]").unwrap();
    let v = stdout_json(&noma(
        &["matrix-from-action", "--action", "a.json"],
        dir.path(),
    ));
    assert_eq!(v.as_array().unwrap().len(), 3);
    for (n, row) in v.as_array().unwrap().iter().enumerate() {
        for t in row.as_array().unwrap() {
            assert!((t.as_f64().unwrap() - 1.0 / (n + 2) as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn grid_baseline_writes_result() {
    let dir = workspace();
    let out = noma(
        &[
            "baseline",
            "--config",
            "small.json",
            "--reward",
            "min",
            "--method",
            "grid",
            "--resolution",
            "11",
            "--out",
            "b.json",
        ],
        dir.path(),
    );
    let printed = stdout_json(&out);
    let saved: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("b.json")).unwrap()).unwrap();
    assert_eq!(printed, saved);
    assert!(saved["reward"].as_f64().unwrap() > 0.0);
}

#[test]
fn sweep_levels_writes_one_history_per_level() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.json"),
        r#"{"counts": [1, 1, 2], "slots": 100, "hidden": [8]}"#,
    )
    .unwrap();
    let out = noma(
        &[
            "sweep-levels",
            "--config",
            "c.json",
            "--reward",
            "geomean",
            "--epochs",
            "16",
            "--max-levels",
            "3",
            "--out-dir",
            "sw",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let sw = dir.path().join("sw");
    assert!(sw.join("history_M2.csv").exists());
    assert!(sw.join("history_M3.csv").exists());
    let summary = fs::read_to_string(sw.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn malformed_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.json"),
        "{\n  \"counts\": [1, 2],\n  \"slots\": ,\n}\n",
    )
    .unwrap();
    fs::write(dir.path().join("m.json"), "[[0.5], [0.2, 0.2]]").unwrap();
    let out = noma(
        &["oracle", "--config", "bad.json", "--matrix", "m.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error:"), "{err}");
    assert!(err.contains("bad.json") && err.contains("line 3"), "{err}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"countz": [1]}"#).unwrap();
    fs::write(dir.path().join("m.json"), "[[0.5]]").unwrap();
    let out = noma(
        &["oracle", "--config", "c.json", "--matrix", "m.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("countz"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(noma(&[], dir.path()).status.code(), Some(2));
    assert_eq!(
        noma(&["train", "--reward", "median"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn infeasible_design_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = noma(
        &[
            "design-levels",
            "--vmax",
            "16",
            "--gamma",
            "1",
            "--noise",
            "1",
            "--levels",
            "6",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}
