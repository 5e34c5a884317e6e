//! Every example runs to completion. `cargo test` builds the examples but
//! does not run them.

use std::path::PathBuf;
use std::process::Command;

fn run(name: &str, args: &[&str]) -> String {
    // target/<profile>/deps/examples_run-<hash> -> target/<profile>/examples/<name>
    let exe = std::env::current_exe().unwrap();
    let bin: PathBuf = exe.parent().unwrap().parent().unwrap().join("examples").join(name);
    let out = if bin.exists() {
        Command::new(&bin).args(args).output().unwrap()
    } else {
        Command::new(env!("CARGO")).args(["run", "-q", "--example", name, "--"]).args(args).output().unwrap()
    };
    assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn generate_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("generate_suite", &[dir.path().to_str().unwrap()]);
    assert_eq!(out.lines().count(), 20);
}

#[test]
fn route_schedulers() {
    let out = run("route_schedulers", &[]);
    assert!(out.contains("WelfareFirst") && out.contains("CostFirst"));
}

#[test]
fn schedule_moves() {
    let out = run("schedule_moves", &[]);
    assert!(out.contains(r#"archive: ["(390, 180)", "(420, 120)", "(450, 30)"]"#), "{out}");
}

#[test]
fn solve_front() {
    let dir = tempfile::tempdir().unwrap();
    run("solve_front", &[dir.path().to_str().unwrap(), "quick"]);
    assert!(dir.path().join("front.csv").exists());
}

#[test]
fn exact_front() {
    let out = run("exact_front", &[]);
    assert!(out.contains("full grid equals enumeration"));
}

#[test]
fn compare_fronts() {
    let out = run("compare_fronts", &[]);
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn emit_milp() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("emit_milp", &[dir.path().to_str().unwrap()]);
    assert!(dir.path().join("model.lp").exists());
    let checked: Vec<&str> = out.lines().filter(|l| l.starts_with("solution")).collect();
    assert!(!checked.is_empty());
    assert!(checked.iter().all(|l| l.ends_with(" 0 violated rows")), "{out}");
}
