use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn rbi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbi"))
        .args(args)
        .env_remove("RBI_THREADS")
        .output()
        .expect("spawn rbi")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
  "n_states": 6,
  "true_target": 4,
  "prior_condition": "adversarial",
  "trials_per_sequence": 2,
  "max_sequences": 20,
  "num_runs": 24,
  "seed": 17,
  "record_trajectories": true
}"#;

fn read(dir: &Path, file: &str) -> Vec<u8> {
    fs::read(dir.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

#[test]
fn simulate_writes_manifest_and_results() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "cfg.json", SMALL);
    let out = tmp.path().join("out");
    let res = rbi(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    for f in ["manifest.json", "runs.csv", "summary.json", "trajectories.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let runs = String::from_utf8(read(&out, "runs.csv")).unwrap();
    let mut lines = runs.lines();
    assert_eq!(lines.next(), Some("run_id,decided_state,true_target,correct,num_sequences,stopped_by"));
    assert_eq!(lines.count(), 24);
    let summary: Value = serde_json::from_slice(&read(&out, "summary.json")).unwrap();
    let acc = summary["accuracy"].as_f64().unwrap();
    assert_eq!((acc * 24.0).round() as u64, summary["num_correct"].as_u64().unwrap());
}

#[test]
fn simulate_is_byte_stable_across_reruns_and_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "cfg.json", SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(rbi(&["simulate", "--config", &cfg, "--out", a.to_str().unwrap(), "--threads", "1"]).status.code(), Some(0));
    assert_eq!(rbi(&["simulate", "--config", &cfg, "--out", b.to_str().unwrap(), "--threads", "3"]).status.code(), Some(0));
    for f in ["manifest.json", "runs.csv", "summary.json", "trajectories.json"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
}

#[test]
fn manifest_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "cfg.json", SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(rbi(&["simulate", "--config", &cfg, "--out", a.to_str().unwrap(), "--seed", "99"]).status.code(), Some(0));
    let manifest = a.join("manifest.json");
    assert_eq!(rbi(&["simulate", "--config", manifest.to_str().unwrap(), "--out", b.to_str().unwrap()]).status.code(), Some(0));
    for f in ["manifest.json", "runs.csv", "summary.json"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
}

#[test]
fn negative_lambda_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", r#"{"policy": {"lambda2_init": -0.5}}"#);
    let res = rbi(&["simulate", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("lambda2_init"));
}

#[test]
fn malformed_json_reports_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", "{\n  \"n_states\": 5,\n  \"seed\": x\n}");
    let res = rbi(&["simulate", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 3"));
}

#[test]
fn sweep_rows_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "cfg.json", SMALL);
    let run = |dir: &str, threads: &str| {
        let out = tmp.path().join(dir);
        let res = rbi(&[
            "sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--alphas", "1,2", "--lambdas", "0,0.5",
            "--threads", threads,
        ]);
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
        read(&out, "sweep.csv")
    };
    let a = run("a", "1");
    let text = String::from_utf8(a.clone()).unwrap();
    assert!(text.starts_with("alpha,lambda,accuracy,mean_sequences,speed\n"));
    assert_eq!(text.lines().count(), 5);
    assert_eq!(a, run("b", "2"));
}

#[test]
fn empty_sweep_grid_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let res = rbi(&["sweep", "--out", tmp.path().join("o").to_str().unwrap(), "--alphas", "", "--lambdas", "0"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn geometry_outputs() {
    let res = rbi(&["geometry", "tau-double-prime", "--tau", "0.9", "--n", "3"]);
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8(res.stdout).unwrap();
    let value: f64 = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((value - 0.3944).abs() < 1e-4);

    let res = rbi(&["geometry", "gap-curve", "--alpha", "1", "--n", "30"]);
    let text = String::from_utf8(res.stdout).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',').map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 11);
    for (tau, gap) in rows {
        assert!((gap - (1.0 - tau) * 29f64.ln()).abs() < 1e-9);
    }

    let res = rbi(&["geometry", "tilde-tau", "--alpha", "inf", "--n", "7"]);
    let text = String::from_utf8(res.stdout).unwrap();
    for line in text.lines().skip(1) {
        let (a, b) = line.split_once(',').unwrap();
        assert_eq!(a, b);
    }

    assert_eq!(rbi(&["geometry", "tau-double-prime", "--tau", "0.1", "--n", "3"]).status.code(), Some(2));
    let res = rbi(&["geometry", "boundary-points", "--tau", "0.5", "--n", "3"]);
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.contains("v,1,0.25") && text.contains("w,2,0"));
}

#[test]
fn trajectory_export_for_three_states() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cfg.json",
        r#"{"n_states": 3, "true_target": 0, "trials_per_sequence": 1, "prior_condition": "adversarial", "seed": 3}"#,
    );
    let out = tmp.path().join("t");
    let res = rbi(&["trajectory", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let bytes = read(&out, "trajectory.json");
    let runs: Value = serde_json::from_slice(&bytes).unwrap();
    let run = &runs[0];
    assert!(run["prior_xy"].is_array());
    let seqs = run["sequences"].as_array().unwrap();
    assert!(!seqs.is_empty());
    for s in seqs {
        assert!(s["residual"].as_f64().unwrap() <= 1e-9);
        assert!(s["xy"].is_array());
        assert!(s["stopping_value"].is_number());
    }
    let again = tmp.path().join("t2");
    rbi(&["trajectory", "--config", &cfg, "--out", again.to_str().unwrap()]);
    assert_eq!(bytes, read(&again, "trajectory.json"));
}

#[test]
fn trajectory_with_zero_sequences_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "cfg.json", r#"{"n_states": 3, "true_target": 0, "max_sequences": 0}"#);
    let res = rbi(&["trajectory", "--config", &cfg, "--out", tmp.path().join("t").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn interactive_trajectory_reads_answers() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cfg.json",
        r#"{"n_states": 3, "true_target": 1, "trials_per_sequence": 1, "max_sequences": 30}"#,
    );
    let out = tmp.path().join("i");
    let mut child = Command::new(env!("CARGO_BIN_EXE_rbi"))
        .args(["trajectory", "--interactive", "--config", &cfg, "--out", out.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    {
        let stdin = child.stdin.as_mut().unwrap();
        let mut answers = String::new();
        for _ in 0..30 {
            answers.push_str("n\n");
        }
        stdin.write_all(answers.as_bytes()).unwrap();
    }
    let res = child.wait_with_output().unwrap();
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("[y/n]"));
    assert!(stdout.contains("decided states"));
}

#[test]
fn prop1_harness_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("p");
    let res = rbi(&["prop1-harness", "--out", out.to_str().unwrap(), "--alphas", "2", "--lambdas", "0,1"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = String::from_utf8(read(&out, "prop1.csv")).unwrap();
    assert!(csv.starts_with("alpha,lambda,valid_draws,lhs,rhs,difference,status\n"));
    let zero = csv.lines().nth(1).unwrap();
    assert!(zero.starts_with("2,0,2000,") && zero.contains(",0,pass"), "{zero}");
    assert_eq!(rbi(&["prop1-harness", "--out", out.to_str().unwrap(), "--draws", "10"]).status.code(), Some(2));
}
