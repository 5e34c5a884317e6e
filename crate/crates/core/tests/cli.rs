//! The `hcsp` binary end to end: verbs, artifacts and exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn hcsp(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_hcsp")).args(args).env_remove("HCSP_OUT_DIR").output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn ok(args: &[&str]) -> Value {
    let r = hcsp(args);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A generated tiny instance; small enough for the exact verb.
fn tiny_instance(dir: &Path) -> PathBuf {
    let out = dir.join("inst");
    ok(&["generate", "--services", "3", "--caregivers", "2", "--seed", "5", "--profile", "tiny", "--out", s(&out)]);
    out.join("tiny-n3-m2-s5.json")
}

#[test]
fn generate_writes_instances_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let v = ok(&["generate", "--services", "10", "--count", "3", "--seed", "7", "--out", s(&out)]);
    assert_eq!(v["command"], "generate");
    for seed in 7..10 {
        let inst = hcsp::load_instance(out.join(format!("solomon-10-n10-m3-s{seed}.json"))).unwrap();
        assert_eq!(inst.n_services(), 10);
    }
    let m: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["format_version"], 1);
    assert_eq!(m["command"], "generate");
    assert_eq!(m["artifacts"].as_array().unwrap().len(), 3);
}

#[test]
fn generate_suite_writes_both_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("suite");
    ok(&["generate", "--suite", "--out", s(&out)]);
    for profile in ["solomon-10", "solomon-15"] {
        assert_eq!(std::fs::read_dir(out.join(profile)).unwrap().count(), 10, "{profile}");
    }
}

#[test]
fn bad_arguments_exit_with_two_and_a_json_error() {
    let r = hcsp(&["generate", "--services", "0", "--out", "/nonexistent/never"]);
    assert_eq!(r.code, 2);
    let e: Value = serde_json::from_str(&r.stderr).unwrap();
    assert_eq!(e["error"], "usage");
    assert_eq!(hcsp(&["frobnicate"]).code, 2);
    assert_eq!(hcsp(&["solve"]).code, 2);
}

#[test]
fn solve_then_eval_every_exported_solution() {
    let dir = tempfile::tempdir().unwrap();
    let inst = tiny_instance(dir.path());
    let out = dir.path().join("solve");
    let v = ok(&["solve", s(&inst), "--preset", "quick", "--seed", "1", "--out", s(&out)]);
    let size = v["details"]["front_size"].as_u64().unwrap() as usize;
    assert!(size > 0);
    let rows = hcsp::bench::read_front_csv(&out.join("front.csv")).unwrap();
    assert_eq!(rows.len(), size);
    assert!(out.join("run_log.jsonl").exists());
    for row in &rows {
        let sol = out.join(row.solution_file.as_ref().unwrap());
        let e = ok(&["eval", s(&inst), s(&sol)]);
        assert_eq!(e["details"]["feasible"], true);
        assert_eq!(e["details"]["f1"], row.f1);
        assert_eq!(e["details"]["f2"], row.f2);
    }
}

#[test]
fn exact_writes_the_front_and_one_lp_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let inst = tiny_instance(dir.path());
    let out = dir.path().join("exact");
    let lp = dir.path().join("lp");
    let v = ok(&["exact", s(&inst), "--step", "15", "--intervals", "8", "--emit-lp", s(&lp), "--out", s(&out)]);
    let steps = std::fs::read_to_string(out.join("grid_steps.jsonl")).unwrap().lines().count();
    assert_eq!(v["details"]["grid_points"].as_u64().unwrap() as usize, steps);
    assert_eq!(std::fs::read_dir(&lp).unwrap().count(), steps);
    let rows = hcsp::bench::read_front_csv(&out.join("front.csv")).unwrap();
    assert_eq!(rows.len(), v["details"]["front_size"].as_u64().unwrap() as usize);
}

#[test]
fn exact_refuses_large_instances() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inst");
    ok(&["generate", "--services", "10", "--seed", "1", "--out", s(&out)]);
    let r = hcsp(&["exact", s(&out.join("solomon-10-n10-m3-s1.json")), "--out", s(&dir.path().join("x"))]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    assert!(r.stderr.contains("error"));
}

#[test]
fn compare_reports_every_front() {
    let dir = tempfile::tempdir().unwrap();
    let inst = tiny_instance(dir.path());
    let exact = dir.path().join("exact");
    let heur = dir.path().join("heur");
    ok(&["exact", s(&inst), "--full-grid", "--step", "15", "--out", s(&exact)]);
    ok(&["solve", s(&inst), "--preset", "quick", "--out", s(&heur)]);
    let out = dir.path().join("cmp");
    let v = ok(&[
        "compare",
        s(&exact.join("front.csv")),
        s(&heur.join("front.csv")),
        "--labels",
        "exact,bialns",
        "--out",
        s(&out),
    ]);
    let reports = v["details"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["method"], "exact");
    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 3);
    assert!(report.starts_with("instance,method,CV,EPS,GD,IGD"));
    assert!(std::fs::read_to_string(out.join("plot.csv")).unwrap().starts_with("method,f1,f2,f1_norm,f2_norm"));

    // A front against itself is perfect.
    let v = ok(&["compare", s(&exact.join("front.csv")), s(&exact.join("front.csv")), "--out", s(&out)]);
    for r in v["details"].as_array().unwrap() {
        for k in ["CV", "EPS", "GD", "IGD"] {
            assert_eq!(r[k], 0.0, "{k}");
        }
    }
}

#[test]
fn malformed_inputs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b\n1,2\n").unwrap();
    let r = hcsp(&["compare", s(&bad), s(&bad), "--out", s(&dir.path().join("c"))]);
    assert_eq!(r.code, 1);
    let e: Value = serde_json::from_str(&r.stderr).unwrap();
    assert_eq!(e["error"], "parse");

    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{").unwrap();
    assert_eq!(hcsp(&["solve", s(&junk), "--out", s(&dir.path().join("d"))]).code, 1);
}
