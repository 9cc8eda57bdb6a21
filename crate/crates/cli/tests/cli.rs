//! End-to-end runs of the `spinsim` binary: subcommands, exit codes
//! and output files.

use std::path::{Path, PathBuf};
use std::process::Command;

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn spinsim(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_spinsim"))
        .args(args)
        .current_dir(repo_root())
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn dj_f1_prints_constant_with_ratio_table() {
    let (code, stdout, _) = spinsim(&["dj", "--function", "f1"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("constant"), "{stdout}");
    assert!(stdout.contains("coherence ratio"));
    // √3 : 3 : √3 pattern normalized to the weakest line
    assert!(stdout.contains("+1.0000"));
    assert!(stdout.contains("+1.7321"), "{stdout}");
}

#[test]
fn dj_f5_prints_balanced() {
    let (code, stdout, _) = spinsim(&["dj", "--function", "f5"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("balanced"), "{stdout}");
}

#[test]
fn parity_of_the_alternating_string_is_odd() {
    let (code, stdout, _) = spinsim(&["parity", "--string", "010101"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("odd"), "{stdout}");
    assert!(stdout.contains("F1 F2 F3"), "{stdout}");

    let (code, stdout, _) = spinsim(&["parity", "--string", "010100"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("even"), "{stdout}");
}

#[test]
fn simulate_writes_the_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    for ext in ["json", "csv", "svg"] {
        let out = dir.path().join(format!("spec.{ext}"));
        let (code, stdout, stderr) = spinsim(&[
            "simulate",
            "--program",
            "programs/ch3i_gphase90.prog",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "stdout: {stdout}\nstderr: {stderr}");
        assert!(out.exists());
    }
}

#[test]
fn simulate_rejects_missing_input() {
    let (code, _, stderr) = spinsim(&[
        "simulate",
        "--program",
        "programs/does_not_exist.prog",
        "--out",
        "/tmp/x.json",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("error"));
}

#[test]
fn unknown_flags_exit_with_usage() {
    let (code, _, _) = spinsim(&["simulate", "--frobnicate"]);
    assert_eq!(code, 2);
    let (code, _, _) = spinsim(&["no-such-command"]);
    assert_eq!(code, 2);
}

#[test]
fn verify_gate_distinguishes_right_from_wrong_targets() {
    let dir = tempfile::tempdir().unwrap();
    let program = dir.path().join("gate.prog");
    std::fs::write(&program, "gphase C1 90\nacquire 1H\n").unwrap();

    // target: diag gate with e^{±iπ/2} on the first carbon pair
    let mut rows = Vec::new();
    for r in 0..16 {
        let mut row = Vec::new();
        for c in 0..16 {
            let entry = if r != c {
                [0.0, 0.0]
            } else if r == 0 {
                [0.0, 1.0]
            } else if r == 1 {
                [0.0, -1.0]
            } else {
                [1.0, 0.0]
            };
            row.push(entry);
        }
        rows.push(row);
    }
    let good = dir.path().join("target.json");
    std::fs::write(&good, serde_json::json!({ "rows": rows }).to_string()).unwrap();

    let (code, stdout, _) = spinsim(&[
        "verify-gate",
        "--system",
        "systems/ch3i.json",
        "--program",
        program.to_str().unwrap(),
        "--target",
        good.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("matches"));

    // flip one phase: verification must fail with exit code 1
    rows[0][0] = [0.0, -1.0];
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::json!({ "rows": rows }).to_string()).unwrap();
    let (code, stdout, _) = spinsim(&[
        "verify-gate",
        "--system",
        "systems/ch3i.json",
        "--program",
        program.to_str().unwrap(),
        "--target",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(code, 1, "{stdout}");
}

#[test]
fn trajectory_writes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let program = dir.path().join("loop.prog");
    // pole of the central transition around the two-pulse loop
    std::fs::write(
        &program,
        "selpulse 2 180 90\nselpulse 2 180 180\nacquire 1H\n",
    )
    .unwrap();
    let out = dir.path().join("traj.csv");
    let (code, stdout, stderr) = spinsim(&[
        "trajectory",
        "--system",
        "systems/ch3cn.json",
        "--program",
        program.to_str().unwrap(),
        "--pair",
        "2,3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stdout: {stdout}\nstderr: {stderr}");
    let body = std::fs::read_to_string(out).unwrap();
    assert!(body.starts_with("time_s,x,y,z"));
    assert!(body.lines().count() > 100);
}

#[test]
fn dj_spectrum_export_marks_inverted_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f7.svg");
    let (code, _, _) = spinsim(&["dj", "--function", "f7", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let svg = std::fs::read_to_string(out).unwrap();
    assert_eq!(svg.matches("class=\"inverted\"").count(), 3);
}
