use std::process::Command;

use dsm_core::harness::{parse_csv, CSV_HEADER};

fn dsm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dsm"))
}

#[test]
fn run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let status = dsm()
        .args([
            "run",
            "--preset",
            "exp2",
            "--delta-rel",
            "0.02,0.01",
            "--seeds",
            "0,1",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert_eq!(parse_csv(&text).unwrap().len(), 4);
}

#[test]
fn table_on_stdout() {
    let out = dsm()
        .args(["run", "--preset", "exp2-const", "--delta-rel", "0.05"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("r.csv");
    std::fs::write(
        &cfg,
        format!(
            "preset = exp2\nc0 = 3\ndelta_rel = 0.02\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let status = dsm()
        .arg("--config")
        .arg(&cfg)
        .args(["run", "--c0", "2.5"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let rows = parse_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].c0, 2.5);
}

#[test]
fn divergent_run_exits_one() {
    let out = dsm()
        .args(["run", "--preset", "exp1", "--delta-rel", "0.001"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_config_exits_two() {
    for args in [
        vec!["run", "--preset", "exp7"],
        vec!["run", "--preset", "exp1", "--c0", "-1"],
        vec!["run", "--preset", "exp1", "--mode", "rk4"],
        vec!["run"],
    ] {
        let out = dsm().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn io_failure_exits_three() {
    let out = dsm()
        .args([
            "run",
            "--preset",
            "exp2",
            "--delta-rel",
            "0.02",
            "--out",
            "/nonexistent-dir/x.csv",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = dsm()
        .args([
            "--config",
            "/nonexistent-dir/c.conf",
            "run",
            "--preset",
            "exp2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn dump_solution_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sol.csv");
    let status = dsm()
        .args([
            "dump-solution",
            "--preset",
            "exp1",
            "--delta-rel",
            "0.01",
            "--seed",
            "3",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("x,u_exact,u_dsm"));
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn verify_lemmas_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lemmas.csv");
    let status = dsm()
        .args(["verify-lemmas", "--model", "cubic", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,passed,worst_margin,samples"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 4);
        assert!(cols[0].starts_with("cubic/"));
        assert_eq!(cols[1], "true", "{line}");
    }
}
