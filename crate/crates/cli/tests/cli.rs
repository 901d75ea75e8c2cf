use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const APPENDIX: &str = "id,time,value
1,0,15.54
1,1,15.03
1,2,17.42
1,3,17.67
1,4,18.59
2,0,14.67
2,1,14.84
2,2,15.71
2,3,15.32
2,4,15.38
3,0,14.49
3,1,14.49
3,2,13.09
3,3,11.48
3,4,9.94
";

fn clump(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clump"))
        .current_dir(dir)
        .env_remove("CLUMP_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = clump(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("appendix.csv"), APPENDIX).unwrap();
    dir
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_cells(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn extract_reproduces_the_worked_example() {
    let dir = workspace();
    ok(dir.path(), &["extract", "appendix.csv", "--out-dir", "out"]);
    let rows = csv_cells(&dir.path().join("out/features.csv"));
    let want = [
        [0.38, 0.62, 0.51, 0.48, 0.05, 3.00],
        [0.09, 0.26, 0.19, 0.18, 0.01, 3.00],
        [-0.57, 0.38, 0.57, 0.38, -0.09, 0.33],
    ];
    for (row, want) in rows.iter().zip(want) {
        for (cell, want) in row[1..7].iter().zip(want) {
            let got: f64 = cell.parse().unwrap();
            assert!((got - want).abs() <= 0.005, "{got} vs {want}");
        }
    }
    let manifest = json(&dir.path().join("out/manifest.json"));
    assert_eq!(manifest["subcommand"], "extract");
    assert_eq!(manifest["config"]["scale"], "none");
    assert_eq!(manifest["inputs"]["input"], "appendix.csv");
}

#[test]
fn empty_input_fails() {
    let dir = workspace();
    fs::write(dir.path().join("empty.csv"), "").unwrap();
    let out = clump(dir.path(), &["extract", "empty.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty input"));
}

#[test]
fn short_trajectory_is_reported_not_fatal() {
    let dir = workspace();
    fs::write(
        dir.path().join("mixed.csv"),
        format!("{APPENDIX}9,0,1.0\n9,1,2.0\n"),
    )
    .unwrap();
    let out = ok(dir.path(), &["extract", "mixed.csv", "--out-dir", "out"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("rejected 9: too-short"), "{stderr}");
    assert_eq!(csv_cells(&dir.path().join("out/features.csv")).len(), 3);
}

#[test]
fn cluster_separates_the_falling_trajectory() {
    let dir = workspace();
    ok(
        dir.path(),
        &["cluster", "appendix.csv", "--k", "2", "--out-dir", "out"],
    );
    let out = dir.path().join("out");
    assert_eq!(
        fs::read_to_string(out.join("assignments.csv")).unwrap(),
        "id,cluster\n1,1\n2,1\n3,2\n"
    );
    let tree = json(&out.join("dendrogram.json"));
    assert_eq!(tree["merges"].as_array().unwrap().len(), 2);
    let profiles = json(&out.join("profiles.json"));
    assert_eq!(profiles[0]["size"], 2);
    assert_eq!(profiles[1]["size"], 1);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn cluster_k_bounds() {
    let dir = workspace();
    ok(
        dir.path(),
        &["cluster", "appendix.csv", "--k", "1", "--out-dir", "one"],
    );
    let cells = csv_cells(&dir.path().join("one/assignments.csv"));
    assert!(cells.iter().all(|r| r[1] == "1"));

    let zero = clump(
        dir.path(),
        &["cluster", "appendix.csv", "--k", "0", "--out-dir", "zero"],
    );
    assert!(!zero.status.success());
    let big = clump(
        dir.path(),
        &["cluster", "appendix.csv", "--k", "4", "--out-dir", "big"],
    );
    assert!(!big.status.success());
    assert!(!dir.path().join("big/manifest.json").exists());
}

#[test]
fn simulate_is_deterministic() {
    let dir = workspace();
    for name in ["a", "b"] {
        ok(
            dir.path(),
            &[
                "simulate",
                "--scenario",
                "balanced-low",
                "--seed",
                "42",
                "--out-dir",
                name,
            ],
        );
    }
    for file in ["panel.csv", "truth.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let truth = csv_cells(&dir.path().join("a/truth.csv"));
    assert_eq!(truth.len(), 200);
    assert_eq!(truth.iter().filter(|r| r[1] == "1").count(), 100);

    ok(
        dir.path(),
        &[
            "simulate",
            "--scenario",
            "balanced-low",
            "--seed",
            "43",
            "--out-dir",
            "c",
        ],
    );
    assert_ne!(
        fs::read(dir.path().join("a/panel.csv")).unwrap(),
        fs::read(dir.path().join("c/panel.csv")).unwrap()
    );
}

#[test]
fn unknown_scenario_lists_the_presets() {
    let dir = workspace();
    let out = clump(dir.path(), &["simulate", "--scenario", "nope"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unbalanced-high"));
}

#[test]
fn evaluate_perfect_assignment() {
    let dir = workspace();
    let d = dir.path();
    ok(d, &["simulate", "--seed", "5", "--out-dir", "sim"]);
    ok(d, &["extract", "sim/panel.csv", "--out-dir", "feat"]);
    let truth = fs::read_to_string(d.join("sim/truth.csv")).unwrap();
    fs::write(
        d.join("perfect.csv"),
        truth.replacen("id,true_cluster", "id,cluster", 1),
    )
    .unwrap();
    let out = ok(
        d,
        &[
            "evaluate",
            "--assignments",
            "perfect.csv",
            "--truth",
            "sim/truth.csv",
            "--features",
            "feat/features.csv",
            "--out-dir",
            "eval",
        ],
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["rand"], 1.0);
    assert_eq!(report["adjusted_rand"], 1.0);
    assert_eq!(json(&d.join("eval/evaluation.json")), report);
}

#[test]
fn study_writes_table_layout() {
    let dir = workspace();
    let d = dir.path();
    ok(
        d,
        &[
            "study",
            "--scenario",
            "balanced-high",
            "--reps",
            "6",
            "--seed",
            "3",
            "--out-dir",
            "st",
        ],
    );
    let table = fs::read_to_string(d.join("st/summary.csv")).unwrap();
    let first: Vec<&str> = table
        .lines()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(
        first,
        [
            "statistic",
            "No. of vals.",
            "Median",
            "Mean",
            "Std. dev.",
            "1st quartile",
            "3rd quartile"
        ]
    );
    assert_eq!(
        fs::read_to_string(d.join("st/records.jsonl"))
            .unwrap()
            .lines()
            .count(),
        6
    );
    let summary = json(&d.join("st/summary.json"));
    assert_eq!(summary["replications"], 6);

    // the manifest alone is enough to rerun, and the thread count does not matter
    let rerun = Command::new(env!("CARGO_BIN_EXE_clump"))
        .current_dir(d)
        .env("CLUMP_THREADS", "1")
        .args([
            "study",
            "--config",
            "st/manifest.json",
            "--out-dir",
            "again",
        ])
        .output()
        .unwrap();
    assert!(rerun.status.success());
    for file in ["summary.csv", "records.jsonl"] {
        assert_eq!(
            fs::read(d.join("st").join(file)).unwrap(),
            fs::read(d.join("again").join(file)).unwrap()
        );
    }
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = workspace();
    let d = dir.path();
    fs::write(
        d.join("settings.json"),
        r#"{"scenario": "unbalanced-low", "seed": 9, "t": 4, "out_dir": "from-file"}"#,
    )
    .unwrap();
    ok(
        d,
        &["simulate", "--config", "settings.json", "--seed", "10"],
    );
    let manifest = json(&d.join("from-file/manifest.json"));
    assert_eq!(manifest["seed"], 10);
    assert_eq!(manifest["config"]["scenario"], "unbalanced-low");
    let rows = csv_cells(&d.join("from-file/panel.csv"));
    assert_eq!(rows.len(), 800 * 4);

    fs::write(d.join("bad.json"), r#"{"sead": 1}"#).unwrap();
    assert!(!clump(d, &["simulate", "--config", "bad.json"])
        .status
        .success());
}

#[test]
fn custom_scenario_from_config() {
    let dir = workspace();
    let d = dir.path();
    let line = r#"{"b0": 1.0, "b1": 0.5, "var_u0": 0.0, "var_u1": 0.0, "corr": 0.0, "var_e": 0.0}"#;
    fs::write(
        d.join("custom.json"),
        format!(
            r#"{{"scenario": {{"name": "lines", "n_subjects": 4, "proportions": [1.0], "params": [{line}]}}}}"#
        ),
    )
    .unwrap();
    ok(
        d,
        &["simulate", "--config", "custom.json", "--out-dir", "out"],
    );
    let rows = csv_cells(&d.join("out/panel.csv"));
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| {
        let t: f64 = r[1].parse().unwrap();
        let y: f64 = r[2].parse().unwrap();
        y == 1.0 + 0.5 * t
    }));
}

#[test]
fn bench_writes_timing() {
    let dir = workspace();
    ok(
        dir.path(),
        &[
            "bench",
            "--sizes",
            "50,100",
            "--reps",
            "1",
            "--out-dir",
            "b",
        ],
    );
    let report = json(&dir.path().join("b/timing.json"));
    assert_eq!(report["sizes"], serde_json::json!([50, 100]));
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = workspace();
    let out = Command::new(env!("CARGO_BIN_EXE_clump"))
        .current_dir(dir.path())
        .env("CLUMP_THREADS", "many")
        .args(["simulate"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("CLUMP_THREADS"));
}
