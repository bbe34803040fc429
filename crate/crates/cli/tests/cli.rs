//! Runs the `eva` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

use eva_core::sim::SimReport;

fn eva(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eva"))
        .args(args)
        .env_remove("EVA_CATALOG")
        .env_remove("EVA_TRACE")
        .env_remove("EVA_INTERFERENCE")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Vec<u8> {
    let out = eva(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn gen(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut args = vec!["gen-trace", "--out", &path];
    args.extend_from_slice(extra);
    ok(&args);
    path
}

fn simulate(trace: &str, extra: &[&str]) -> SimReport {
    let mut args = vec!["simulate", "--trace", trace];
    args.extend_from_slice(extra);
    SimReport::from_json(std::str::from_utf8(&ok(&args)).unwrap()).unwrap()
}

#[test]
fn no_packing_normalizes_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let trace = gen(dir.path(), "t.csv", &["--num-jobs", "12", "--seed", "1"]);
    let r = simulate(&trace, &["--scheduler", "no-packing", "--seed", "1"]);
    assert_eq!(r.normalized_cost, Some(1.0));
    assert_eq!(r.jobs_completed, 12);
    assert_eq!(r.scheduler, "no-packing");
}

#[test]
fn eva_is_no_costlier_without_interference() {
    let dir = tempfile::tempdir().unwrap();
    let trace = gen(dir.path(), "t.csv", &["--num-jobs", "20", "--seed", "2"]);
    let matrix = dir.path().join("g.csv");
    std::fs::write(&matrix, "workload_a,workload_b,tput_a_given_b\n").unwrap();
    let m = matrix.to_str().unwrap();
    let common = [
        "--interference",
        m,
        "--interference-fallback",
        "1.0",
        "--default-tput",
        "1.0",
        "--zero-delays",
    ];
    let np = simulate(
        &trace,
        &[&["--scheduler", "no-packing"][..], &common].concat(),
    );
    let eva = simulate(&trace, &[&["--scheduler", "eva"][..], &common].concat());
    assert!(eva.total_cost <= np.total_cost + 1e-6);
    assert!(eva.normalized_cost.unwrap() <= 1.0 + 1e-9);
}

#[test]
fn oracle_refuses_large_traces() {
    let dir = tempfile::tempdir().unwrap();
    let trace = gen(dir.path(), "t.csv", &["--num-jobs", "20", "--seed", "3"]);
    let out = eva(&["simulate", "--trace", &trace, "--scheduler", "oracle"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(
        dir.path(),
        "a.csv",
        &[
            "--num-jobs",
            "8",
            "--seed",
            "5",
            "--multi-task-fraction",
            "0.5",
        ],
    );
    let b = gen(
        dir.path(),
        "b.csv",
        &[
            "--num-jobs",
            "8",
            "--seed",
            "5",
            "--multi-task-fraction",
            "0.5",
        ],
    );
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let args = ["simulate", "--trace", &a, "--interference-fallback", "0.9"];
    assert_eq!(ok(&args), ok(&args));
}

#[test]
fn multi_task_share() {
    let dir = tempfile::tempdir().unwrap();
    let t = gen(
        dir.path(),
        "t.csv",
        &[
            "--num-jobs",
            "400",
            "--multi-task-fraction",
            "0.5",
            "--task-counts",
            "2,4",
            "--seed",
            "7",
        ],
    );
    let text = std::fs::read_to_string(t).unwrap();
    let counts: Vec<u32> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    let multi = counts.iter().filter(|&&c| c > 1).count();
    assert!(counts.iter().all(|c| [1, 2, 4].contains(c)));
    assert!((160..=240).contains(&multi), "{multi} multi-task jobs");
}

#[test]
fn provision_bench_columns() {
    let out = ok(&[
        "provision-bench",
        "--trials",
        "4",
        "--tasks",
        "8",
        "--seed",
        "1",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert!(v["no_packing_normalized"]["mean"].as_f64().unwrap() >= 1.0);
    assert!(v["full_reconfig_normalized"]["mean"].as_f64().unwrap() >= 1.0);
    assert_eq!(v["trials"].as_array().unwrap().len(), 4);
    assert_eq!(
        eva(&["provision-bench", "--tasks", "40"]).status.code(),
        Some(2)
    );
}

#[test]
fn solve_and_dump_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("c.csv");
    ok(&[
        "dump-catalog",
        "--which",
        "worked-example",
        "--out",
        cat.to_str().unwrap(),
    ]);
    let trace = gen(dir.path(), "t.csv", &["--num-jobs", "6", "--seed", "4"]);
    let out = ok(&["solve", "--trace", &trace]);
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    let cost = v["cost"].as_f64().unwrap();
    assert!(v["optimal"].as_bool().unwrap());
    assert!(cost <= v["full_reconfiguration_cost"].as_f64().unwrap() + 1e-9);
    assert!(
        v["full_reconfiguration_cost"].as_f64().unwrap()
            <= v["no_packing_cost"].as_f64().unwrap() + 1e-9
    );
    assert!(std::fs::read_to_string(cat).unwrap().contains("it1"));
}

#[test]
fn bad_inputs_exit_with_input_or_usage_codes() {
    assert_eq!(
        eva(&["gen-trace", "--multi-task-fraction", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        eva(&["simulate", "--trace", "/nonexistent.csv"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        eva(&["simulate", "--trace", "x.csv", "--scheduler", "magic"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(eva(&["frobnicate"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "job_id,arrival_time_s\n1,2\n").unwrap();
    assert_eq!(
        eva(&["simulate", "--trace", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn catalog_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("c.csv");
    ok(&[
        "dump-catalog",
        "--which",
        "worked-example",
        "--out",
        cat.to_str().unwrap(),
    ]);
    let trace = gen(
        dir.path(),
        "t.csv",
        &["--num-jobs", "3", "--seed", "1", "--workloads", "openfoam"],
    );
    let out = Command::new(env!("CARGO_BIN_EXE_eva"))
        .args(["solve", "--trace", &trace])
        .env("EVA_CATALOG", &cat)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let types: Vec<&str> = v["configuration"]["instances"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["instance_type"]["id"].as_str().unwrap())
        .collect();
    assert!(types.iter().all(|t| t.starts_with("it")));
}

#[test]
fn learned_table_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let trace = gen(dir.path(), "t.csv", &["--num-jobs", "30", "--seed", "6"]);
    let table = dir.path().join("table.csv");
    simulate(
        &trace,
        &[
            "--interference-fallback",
            "0.9",
            "--table-out",
            table.to_str().unwrap(),
        ],
    );
    let text = std::fs::read_to_string(table).unwrap();
    assert!(text.starts_with("subject_workload,companions_sorted_semicolon_list,throughput"));
}
