use std::path::PathBuf;
use std::process::{Command, Output};

fn qgl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qgl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_config(name: &str, json: &str) -> String {
    let path = scratch(name);
    std::fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

const HEADER: &str = "n,epsilon,trial,solver,success,ip_fwd,ip_inv,eq,f_calls,rounds,elapsed_ms";

#[test]
fn help_lists_subcommands_and_defaults() {
    let out = qgl(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in [
        "quantum-gl",
        "classical-gl",
        "invert",
        "commit-demo",
        "qubit-commit-demo",
        "scaling",
    ] {
        assert!(text.contains(sub), "missing {sub}");
    }
    assert!(text.contains("max_rounds      40"));
    let out = qgl(&["scaling", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in ["--config", "--seed", "--out", "--trials"] {
        assert!(text.contains(flag), "missing {flag}");
    }
}

#[test]
fn same_seed_same_bytes() {
    let cfg = write_config(
        "det.json",
        r#"{"n": [6, 8], "epsilon": ["1/4", "1/8"], "trials": 5}"#,
    );
    let a = scratch("a.csv");
    let b = scratch("b.csv");
    for out in [&a, &b] {
        let status = qgl(&[
            "scaling",
            "--config",
            &cfg,
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ])
        .status;
        assert!(status.success());
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().next(), Some(HEADER));
    assert_eq!(text.lines().count(), 1 + 20);
}

#[test]
fn stdout_when_no_output_path() {
    let out = qgl(&["commit-demo", "--trials", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("success=2/2"));
}

#[test]
fn qubit_demo_reports_hiding() {
    let out = qgl(&["qubit-commit-demo", "--trials", "3"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("hiding n=8"));
}

#[test]
fn config_errors_exit_2() {
    let cfg = write_config("bad.json", r#"{"n": [8], "epsilon": [0.3]}"#);
    let out = qgl(&["scaling", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("epsilon"));
    let cfg = write_config(
        "solver.json",
        r#"{"n": [8], "epsilon": [0.25], "solver": "magic"}"#,
    );
    assert_eq!(qgl(&["scaling", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(qgl(&["invert", "--trials", "0"]).status.code(), Some(2));
    let cfg = write_config(
        "other.json",
        r#"{"subcommand": "invert", "n": [8], "epsilon": [0.25]}"#,
    );
    assert_eq!(qgl(&["scaling", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn resource_guard_exits_3() {
    let cfg = write_config("big.json", r#"{"n": [23], "epsilon": [0.5], "trials": 1}"#);
    assert_eq!(
        qgl(&["quantum-gl", "--config", &cfg]).status.code(),
        Some(3)
    );
}

#[test]
fn classical_rows_count_queries() {
    let cfg = write_config("cl.json", r#"{"n": [12], "epsilon": [0.25], "trials": 3}"#);
    let out = qgl(&["classical-gl", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // 12 / (2 · ½ · 1/16) = 192 votes → k = 8, 255 votes per bit
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[3], "classical");
        assert_eq!(cols[5], (12 * 255).to_string());
    }
}
