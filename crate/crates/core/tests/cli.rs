use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kipp(args: &[&str], runs: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kipp"))
        .args(args)
        .env("KIPP_RUNS_DIR", runs)
        .output()
        .expect("spawn kipp")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn generate_then_poly_and_classify() {
    let dir = tempfile::tempdir().unwrap();
    let j5 = dir.path().join("j5.json");
    let out = kipp(&["generate", "jordan", "--n", "5", "--out", j5.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let record: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["family"], "jordan");
    assert_eq!(record["seed"], 0);

    let out = kipp(&["poly", j5.to_str().unwrap(), "--check-oracle"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["polynomial"]["degree"], 5);
    assert!(v["oracleDiscrepancy"].as_f64().unwrap() < 1e-12);

    let out = kipp(&["--seed", "4", "classify", j5.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["seed"], 4);
    assert_eq!(v["circular"], true);
    let kinds: Vec<&str> = v["components"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["Point", "Ellipse", "Ellipse"]);
    let radius = v["discFit"]["radius"].as_f64().unwrap();
    assert!((radius - 0.75f64.sqrt()).abs() < 1e-10);
}

#[test]
fn seeded_generation_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--seed", "11", "generate", "pi", "--n", "5", "--ker", "2"];
    let a = kipp(&args, dir.path());
    let b = kipp(&args, dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = kipp(&["--seed", "12", "generate", "pi", "--n", "5", "--ker", "2"], dir.path());
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn boundary_csv_echoes_seed() {
    let dir = tempfile::tempdir().unwrap();
    let j2 = dir.path().join("j2.json");
    kipp(&["generate", "jordan", "--n", "2", "--out", j2.to_str().unwrap()], dir.path());
    let out = kipp(&["--seed", "3", "boundary", j2.to_str().unwrap(), "--samples", "12"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# seed=3"));
    assert_eq!(lines.next(), Some("theta,re,im"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 12);
    for r in rows {
        assert!((r[1].hypot(r[2]) - 0.5).abs() < 1e-12);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(kipp(&["no-such-command"], dir.path()).status.code(), Some(2));
    assert_eq!(kipp(&["generate", "jordan", "--n", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(kipp(&["poly", "/nonexistent/m.json"], dir.path()).status.code(), Some(2));
    assert_eq!(kipp(&["campaign", "--n-trials", "0"], dir.path()).status.code(), Some(2));

    let j2 = dir.path().join("j2.json");
    kipp(&["generate", "jordan", "--n", "2", "--out", j2.to_str().unwrap()], dir.path());
    let out = kipp(&["classify", j2.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let out = kipp(&["classify", j2.to_str().unwrap(), "--disc-only"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["circular"], true);

    let out = kipp(&["campaign", "--n-trials", "20", "--tol-center", "1e-30"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("FAIL"));
}

#[test]
fn campaign_uses_runs_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = kipp(&["--seed", "5", "campaign", "--n-trials", "30"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS seed=5 trials=30"));
    let run = dir.path().join("campaign-s5-n30");
    let lines = std::fs::read_to_string(run.join("records.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 30);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert!(run.join("config.json").exists());
}

#[test]
fn identities_command_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = kipp(&["identities", "--samples", "20"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["pass"], true);
}
