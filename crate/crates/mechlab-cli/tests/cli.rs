//! End-to-end runs of the binary against the shipped scenario files,
//! pinning exit codes, report formats, and byte-level determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mechlab")).args(args).output().expect("binary runs")
}

fn run_scenario(sub: &str, name: &str, out: &Path, extra: &[&str]) -> Output {
    let scenario = scenario(name);
    let mut args = vec![
        sub,
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn gap_eval_hits_the_known_ratio_and_reports_are_deterministic() {
    let dirs = [TempDir::new().unwrap(), TempDir::new().unwrap()];
    for dir in &dirs {
        let out = run_scenario("eval", "spike-gap.json", dir.path(), &[]);
        assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }

    let summary = fs::read_to_string(dirs[0].path().join("spike-gap.summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,mechanism,metric,n,m,worst_cost,opt_cost,ratio,bound,pass"
    );
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], "spike-gap");
        assert_eq!(fields[1], "spike");
        let ratio: f64 = fields[7].parse().unwrap();
        assert!((ratio - 1.998001998001998).abs() <= 1e-9, "ratio {ratio}");
        assert_eq!(fields[9], "yes");
    }

    let ratios = fs::read_to_string(dirs[0].path().join("spike-gap.ratios.csv")).unwrap();
    assert!(ratios.starts_with("instance-id,mechanism,worst_cost,opt_cost,opt_candidate,ratio"));

    for file in ["spike-gap.json", "spike-gap.summary.csv", "spike-gap.ratios.csv"] {
        let a = fs::read(dirs[0].path().join(file)).unwrap();
        let b = fs::read(dirs[1].path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn group_audit_flags_the_coalition_and_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = run_scenario("audit", "rd-gsp.json", dir.path(), &[]);
    assert_eq!(exit_code(&out), 2);

    let detail: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rd-gsp.json")).unwrap())
            .unwrap();
    let coalition_result = detail["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| !r["coalitions"].is_null())
        .expect("a coalition report");
    let violation = &coalition_result["coalitions"]["violations"][0];
    assert_eq!(violation["costs_truthful"], serde_json::json!([1.0, 1.0]));
    assert_eq!(violation["costs_deviating"], serde_json::json!([0.51, 0.51]));
}

#[test]
fn unknown_mechanism_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let scenario_path = dir.path().join("foo.json");
    fs::write(
        &scenario_path,
        r#"{"name": "foo-check", "task": "eval", "mechanisms": ["foo"],
            "instances": [{"metric": {"kind": "line"},
                           "candidates": [[0.0], [1.0]], "agents": [[0.5]]}]}"#,
    )
    .unwrap();
    let out = run(&[
        "eval",
        "--scenario",
        scenario_path.to_str().unwrap(),
        "--out",
        dir.path().join("r").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown mechanism"));
}

#[test]
fn task_subcommand_mismatch_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let out = run_scenario("audit", "spike-gap.json", dir.path(), &[]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn search_with_zero_samples_is_skipped() {
    let dir = TempDir::new().unwrap();
    let out = run_scenario("search", "spike-search.json", dir.path(), &["--samples", "0"]);
    assert_eq!(exit_code(&out), 0);
    let summary = fs::read_to_string(dir.path().join("spike-search.summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().ends_with(",skipped"));
}

#[test]
fn search_finds_the_boundary_and_stays_reproducible() {
    let dirs = [TempDir::new().unwrap(), TempDir::new().unwrap()];
    for dir in &dirs {
        let out =
            run_scenario("search", "spike-search.json", dir.path(), &["--samples", "3000"]);
        assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["spike-search.summary.csv", "spike-search.ratios.csv", "spike-search.json"] {
        let a = fs::read(dirs[0].path().join(file)).unwrap();
        let b = fs::read(dirs[1].path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    let summary = fs::read_to_string(dirs[0].path().join("spike-search.summary.csv")).unwrap();
    let row = summary.lines().nth(1).unwrap();
    let ratio: f64 = row.split(',').nth(7).unwrap().parse().unwrap();
    assert!(ratio >= 1.99 && ratio <= 2.0 + 1e-9, "ratio {ratio}");
}

#[test]
fn compress_emits_the_stage_trace() {
    let dir = TempDir::new().unwrap();
    let out = run_scenario("compress", "compress-demo.json", dir.path(), &[]);
    assert_eq!(exit_code(&out), 0);
    let detail: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("compress-demo.json")).unwrap())
            .unwrap();
    let result = &detail["results"][0];
    let stages = result["stages"].as_array().unwrap();
    assert_eq!(stages[0]["step"], "tight");
    assert!(stages.len() >= 3, "expected left/right stages, got {}", stages.len());
    for stage in stages {
        let groups = stage["groups"].as_array().unwrap();
        assert!(!groups.is_empty());
        for g in groups {
            assert!(g["count"].as_u64().unwrap() >= 1);
            assert!(g["position"].is_number());
        }
    }
    let ratio = result["closed_form_ratio"].as_f64().unwrap();
    assert!(ratio <= 2.0 + 1e-9);
}

#[test]
fn lowerbound_and_reduce_scenarios_pass() {
    for (sub, name) in [("lowerbound", "simplex-dictator.json"), ("reduce", "lift-roundtrip.json")]
    {
        let dir = TempDir::new().unwrap();
        let out = run_scenario(sub, name, dir.path(), &[]);
        assert_eq!(
            exit_code(&out),
            0,
            "{name} stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let summary =
            fs::read_to_string(dir.path().join(format!("{}.summary.csv", name.trim_end_matches(".json"))))
                .unwrap();
        for line in summary.lines().skip(1) {
            assert!(line.ends_with(",yes"), "row failed: {line}");
        }
    }
}

#[test]
fn repro_all_prints_the_claim_table() {
    let out = run(&["repro-all", "--samples", "300"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("claim | bound | achieved | pass"), "missing header:\n{stdout}");
    assert!(stdout.contains("spike-gap | 1.9980019980019983 | 1.9980019980019983 | yes"));
    let rows = stdout.lines().filter(|l| l.contains(" | ")).count();
    assert!(rows >= 20, "expected at least 20 table rows, got {rows}");

    let skipped = run(&["repro-all", "--samples", "0"]);
    assert_eq!(exit_code(&skipped), 0);
    let stdout = String::from_utf8_lossy(&skipped.stdout);
    assert!(stdout.contains("skipped"));
}
