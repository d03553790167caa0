use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const ISING: &str = r#"{"dims":[2,2],"terms":[{"A":[[1,0],[0,0],[0,0],[-1,0]],"B":[[1,0],[0,0],[0,0],[-1,0]]}]}"#;
const ZERO: &str = r#"{"dims":[2,2],"terms":[]}"#;
const QUTRIT: &str = r#"{"dims":[3,3],"terms":[{"A":[[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[-1,0]],"B":[[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[-1,0]]}]}"#;
const QUBIT_TRIT: &str = r#"{"dims":[2,3],"terms":[{"A":[[1,0],[0,0],[0,0],[-1,0]],"B":[[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[-1,0]]}]}"#;

fn bpctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bpctl"))
        .args(args)
        .env_remove("BPCTL_JOBS")
        .output()
        .expect("run bpctl")
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p.to_str().unwrap().to_string()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const SMALL_BUDGET: [&str; 6] = ["--restarts", "2", "--samples", "20", "--iterations", "200"];

#[test]
fn ising_speed_limit_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "ising.json", ISING);
    let mut args = vec!["speed-limit", "--hamiltonian", &h];
    args.extend(SMALL_BUDGET);
    let v = json_stdout(&bpctl(&args));
    assert_eq!(v["case"], "two-qubit");
    assert!((v["omega_star"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let gap = v["gap"].as_f64().unwrap();
    assert!((0.0..1e-4).contains(&gap), "{gap}");
    assert_eq!(v["header"]["seed"], 0);
    assert_eq!(v["header"]["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn zero_coupling_has_zero_speed_limit() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "zero.json", ZERO);
    let v = json_stdout(&bpctl(&["speed-limit", "--hamiltonian", &h]));
    assert_eq!(v["omega_star"].as_f64(), Some(0.0));
    assert_eq!(v["brute_force"].as_f64(), Some(0.0));
}

#[test]
fn qutrit_speed_limit_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "qutrit.json", QUTRIT);
    let v = json_stdout(&bpctl(&["speed-limit", "--hamiltonian", &h, "--no-brute-force"]));
    assert_eq!(v["case"], "qutrit");
    assert!((v["omega_star"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["brute_force"].is_null());
}

#[test]
fn unsupported_dimensions_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "h.json", QUBIT_TRIT);
    let out = bpctl(&["speed-limit", "--hamiltonian", &h]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn plan_for_maximal_entanglement() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "qutrit.json", QUTRIT);
    let traj = dir.path().join("traj.csv");
    let s = (1.0f64 / 3.0).sqrt().to_string();
    let target = format!("{s},{s},{s}");
    let v = json_stdout(&bpctl(&[
        "plan",
        "--target",
        &target,
        "--hamiltonian",
        &h,
        "--trajectory",
        traj.to_str().unwrap(),
    ]));
    let segs = v["segments"].as_array().unwrap();
    assert!((segs[0]["duration"].as_f64().unwrap() - 1.35102171771).abs() < 1e-10);
    assert!(segs.get(1).map_or(0.0, |s| s["duration"].as_f64().unwrap()) < 1e-12);
    let csv = fs::read_to_string(traj).unwrap();
    assert!(csv.starts_with("# "));
    assert!(csv.lines().any(|l| l == "t,sigma1,sigma2,sigma3"));
}

#[test]
fn north_pole_plan_is_empty() {
    let v = json_stdout(&bpctl(&["plan", "--target", "0,0,1", "--omega-star", "2"]));
    assert!(v["segments"].as_array().unwrap().is_empty());
    assert_eq!(v["total_time"].as_f64(), Some(0.0));
}

#[test]
fn plan_projects_targets_outside_the_chamber() {
    let out = bpctl(&["plan", "--target", "0.6,0.8,0", "--omega-star", "1"]);
    let v = json_stdout(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let t: Vec<f64> = v["target"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(t[2] >= t[0] && t[0] >= t[1]);
}

#[test]
fn plan_without_speed_limit_exits_with_two() {
    let out = bpctl(&["plan", "--target", "0,0,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "ising.json", ISING);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let mut args = vec!["speed-limit", "--hamiltonian", &h, "--seed", "7", "--out", out.to_str().unwrap()];
        args.extend(SMALL_BUDGET);
        assert!(bpctl(&args).status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let c1 = bpctl(&["sweep-eps", "--min", "0.01", "--max", "0.2", "--n", "5"]);
    let c2 = bpctl(&["sweep-eps", "--min", "0.01", "--max", "0.2", "--n", "5", "--jobs", "3"]);
    assert!(c1.status.success());
    assert_eq!(c1.stdout, c2.stdout);
}

#[test]
fn invalid_input_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cost.json");
    let r = bpctl(&["cost", "--epsilon", "-1", "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!out.exists());

    let bad = write(dir.path(), "bad.json", r#"{"dims":[2,2],"terms":[{"A":[[1,0]]}]}"#);
    let out = dir.path().join("speed.json");
    let r = bpctl(&["speed-limit", "--hamiltonian", &bad, "--out", out.to_str().unwrap()]);
    assert_ne!(r.status.code(), Some(0));
    assert!(!out.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"epsilon": 0.1}"#);
    let from_cfg = json_stdout(&bpctl(&["--config", &cfg, "cost"]));
    assert_eq!(from_cfg["epsilon"].as_f64(), Some(0.1));
    let overridden = json_stdout(&bpctl(&["--config", &cfg, "cost", "--epsilon", "0.05"]));
    assert_eq!(overridden["epsilon"].as_f64(), Some(0.05));

    let bad = write(dir.path(), "bad.json", r#"{"epsilon": 0.1, "bogus": 1}"#);
    assert_eq!(bpctl(&["--config", &bad, "cost"]).status.code(), Some(2));
}

#[test]
fn simulate_reads_hamiltonian_and_state_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{"hamiltonian": {ISING},
            "state": {{"dims":[2,2],"amplitudes":[[0.5,0],[0.5,0],[0.5,0],[0.5,0]]}},
            "control": {{"E":[[0,0],[0,0],[0,0],[0,0]],"F":[[0,0],[0,0],[0,0],[0,0]]}},
            "horizon": 0.5, "dt": 0.1}}"#
    );
    let cfg = write(dir.path(), "cfg.json", &cfg);
    let out = dir.path().join("traj.csv");
    let r = bpctl(&["--config", &cfg, "simulate", "--out", out.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = fs::read_to_string(out).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,sigma1,sigma2");
    assert_eq!(rows.len(), 7);
}

#[test]
fn sweep_reproduces_the_cost_command() {
    let out = bpctl(&["sweep-eps", "--min", "0.05", "--max", "0.1", "--n", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "epsilon,cost,x,transformed_cost");
    let first: Vec<f64> = rows[1].split(',').map(|x| x.parse().unwrap()).collect();
    let v = json_stdout(&bpctl(&["cost", "--epsilon", "0.05"]));
    assert!((first[1] - v["cost"].as_f64().unwrap()).abs() < 1e-10);
}

#[test]
fn qutrit_state_is_stabilized() {
    let v = json_stdout(&bpctl(&["stabilize", "--case", "qutrit"]));
    assert_eq!(v["pass"], true);
    assert!(v["max_drift"].as_f64().unwrap() < 1e-8);
}

#[test]
fn ising_lift_reaches_a_bell_state() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "ising.json", ISING);
    let out = bpctl(&["lift", "--case", "two-qubit", "--coupling", &h, "--dt", "0.01"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    let r = 1.0 / 2f64.sqrt();
    assert!((last[1] - r).abs() < 1e-9 && (last[2] - r).abs() < 1e-9, "{last:?}");
}

#[test]
fn decompose_needs_exactly_one_input() {
    assert_eq!(bpctl(&["decompose"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", r#"{"dims":[2,2],"amplitudes":[[0.6,0],[0,0],[0,0],[0.8,0]]}"#);
    let v = json_stdout(&bpctl(&["decompose", "--state", &s]));
    let sigma: Vec<f64> = v["sigma"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((sigma[0] - 0.8).abs() < 1e-12 && (sigma[1] - 0.6).abs() < 1e-12);
}
