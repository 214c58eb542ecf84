use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use timebin::alist::from_alist;

fn timebin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timebin"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("cfg.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SHORT: &str = "[source]\nduration = 0.005\n";

#[test]
fn run_writes_bundle_and_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let out = dir.path().join("out");
    let o = timebin(&[
        "--config",
        &cfg,
        "--seed",
        "4",
        "--out",
        out.to_str().unwrap(),
        "run",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(!o.stdout.is_empty());
    for name in [
        "report.csv",
        "joint_histogram.csv",
        "sifted_pairs.csv",
        "key.hex",
        "key_report.csv",
    ] {
        assert!(out.join(name).exists(), "{name}");
    }
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.lines().nth(1).unwrap().starts_with("4,8,"));
}

#[test]
fn quiet_suppresses_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let o = timebin(&["--config", &cfg, "--quiet", "run"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn invalid_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[frame]\nbins_per_frame = 6\n");
    assert_eq!(timebin(&["--config", &cfg, "run"]).status.code(), Some(1));
    let cfg = write_config(dir.path(), "bogus_key = 3\n");
    assert_eq!(timebin(&["--config", &cfg, "run"]).status.code(), Some(1));
}

#[test]
fn missing_config_exits_with_three() {
    let o = timebin(&["--config", "/nonexistent/cfg.toml", "run"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn failed_verification_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{SHORT}[codes]\nrates = [0.9, 0.9, 0.9]\n"),
    );
    let o = timebin(&["--config", &cfg, "--quiet", "run"]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[sweep]\ncandidates = [2, 4, 8]\nmodel = \"uniform_offset\"\nmetric = \"bits_per_frame\"\nframes = 20000\n",
    );
    let out = dir.path().join("out");
    let o = timebin(&["--config", &cfg, "--out", out.to_str().unwrap(), "sweep"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("n,metric_name,value,stderr"));
    assert_eq!(
        text.lines()
            .filter(|l| l.contains(",analytic_bits_per_frame,"))
            .count(),
        3
    );
}

#[test]
fn chain_listing() {
    let o = timebin(&["chain", "--n", "2", "--d", "1", "--p", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("state_label,next_state_label,probability")
    );
    let total: f64 = lines
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 3.0).abs() < 1e-12, "{total}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("1.355832"));
}

#[test]
fn codegen_alist_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = timebin(&[
        "--out",
        dir.path().to_str().unwrap(),
        "codegen",
        "--n-code",
        "120",
        "--column-weight",
        "3",
        "--row-weight",
        "6",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let path = dir.path().join("ldpc_120_60.alist");
    let code = from_alist(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!((code.n(), code.m()), (120, 60));
    assert!(code.checks().iter().all(|c| c.len() == 6));
    assert!(code.count_four_cycles() <= 5);

    let o = timebin(&["codegen", "--n-code", "30", "--rate", "0"]);
    let identity = from_alist(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!((identity.n(), identity.m()), (30, 30));
}
