//! End-to-end checks of the command-line driver: deterministic outputs,
//! config validation, exit codes, and thread-count plumbing.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shom"))
}

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("shom-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn write_cfg(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn simulate_runs_are_byte_identical() {
    let root = tmp("determinism");
    let cfg = write_cfg(
        &root,
        "slow_points = 64\nt_end = 0.2\nsnapshots = 2\ndt = 2e-3\n",
    );
    for sub in ["a", "b"] {
        let status = bin()
            .args(["--config"])
            .arg(&cfg)
            .args(["--out"])
            .arg(root.join(sub))
            .arg("simulate")
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in ["diagnostics.csv", "summary.txt", "snap002_zeta.bin", "config.txt"] {
        let a = std::fs::read(root.join("a").join(name)).unwrap();
        let b = std::fs::read(root.join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn unknown_config_key_exits_2() {
    let root = tmp("badkey");
    let cfg = write_cfg(&root, "wibble = 3\n");
    let out = bin()
        .args(["--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(root.join("out"))
        .arg("simulate")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("wibble"), "stderr should name the bad key: {err}");
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn near_resonant_stationary_exits_3() {
    let root = tmp("resonant");
    let cfg = write_cfg(
        &root,
        "initial = stream\nstream_velocity = 0.8727\nslow_points = 64\n",
    );
    let out = bin()
        .args(["--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(root.join("out"))
        .arg("stationary")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("margin"), "stderr should report the margin: {err}");
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn resonance_scan_reports_instead_of_failing() {
    let root = tmp("scan");
    let cfg = write_cfg(
        &root,
        "initial = stream\nstream_velocity = 0.8727\nslow_points = 64\n",
    );
    let out_dir = root.join("out");
    let status = bin()
        .args(["--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_dir)
        .arg("resonance-scan")
        .status()
        .unwrap();
    assert!(status.success(), "scan is diagnostic and must exit 0");
    let summary = std::fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert!(summary.contains("certified = false"), "{summary}");
    let flags = std::fs::read_to_string(out_dir.join("flags.csv")).unwrap();
    assert!(flags.lines().count() > 1, "flags.csv should list the hits");
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn thread_count_flag_is_honored() {
    let root = tmp("threads");
    let cfg = write_cfg(&root, "slow_points = 64\nt_end = 0.05\ndt = 5e-3\n");
    let out_dir = root.join("out");
    let status = bin()
        .args(["--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_dir)
        .args(["--threads", "2", "simulate"])
        .status()
        .unwrap();
    assert!(status.success());
    let summary = std::fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert!(summary.contains("threads = 2"), "{summary}");
    let _ = std::fs::remove_dir_all(&root);
}

#[test]
fn cell_verify_rejects_flat_bed() {
    let root = tmp("flatbed");
    let cfg = write_cfg(&root, "bottom = flat\nslow_points = 64\n");
    let out = bin()
        .args(["--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(root.join("out"))
        .arg("cell-verify")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let _ = std::fs::remove_dir_all(&root);
}
