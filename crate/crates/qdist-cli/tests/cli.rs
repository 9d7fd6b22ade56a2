use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdist")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_json(o: &Output, code: i32) -> Value {
    assert_eq!(o.status.code(), Some(code));
    let v: Value = serde_json::from_slice(&o.stderr).expect("stderr is json");
    assert!(v["error"].is_string() && v["message"].is_string());
    v
}

fn write_state(dir: &Path, name: &str, bloch: &str) -> String {
    let json = stdout(&qdist(&["measure", "bloch", "--vector", bloch]));
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn bad_arguments_exit_two_with_json() {
    error_json(&qdist(&["nonsense"]), 2);
    error_json(&qdist(&["bounds", "--a", "1", "--b", "1", "--theta", "1", "--grid", "4"]), 2);
    error_json(&qdist(&["bounds", "--a", "1", "--b", "1"]), 2);
    let v = error_json(&qdist(&["measure", "bloch", "--vector", "1,1,1"]), 2);
    assert_eq!(v["error"], "BadBloch");
}

#[test]
fn help_succeeds() {
    assert!(qdist(&["--help"]).status.success());
    assert!(qdist(&["--version"]).status.success());
}

#[test]
fn povm_mode_requires_seed() {
    let base = ["oracle", "min-error", "--a", "1", "--b", "0.5", "--theta", "1", "--mode", "povm"];
    error_json(&qdist(&base), 2);
    let mut with_seed = base.to_vec();
    with_seed.extend(["--seed", "9"]);
    let v: Value = serde_json::from_str(&stdout(&qdist(&with_seed))).unwrap();
    let pe = v["closed_form"]["helstrom_pe"].as_f64().unwrap();
    assert!((v["value"].as_f64().unwrap() - pe).abs() < 1e-8);
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["bounds", "--a", "1", "--b", "0.6", "--theta", "50", "--deg", "--grid", "7"];
    let first = stdout(&qdist(&args));
    assert_eq!(first, stdout(&qdist(&args)));
    let pov = ["oracle", "max-kl", "--a", "0.9", "--b", "0.6", "--theta", "1", "--mode", "povm", "--seed", "4"];
    assert_eq!(stdout(&qdist(&pov)), stdout(&qdist(&pov)));
}

#[test]
fn bounds_csv_layout() {
    let out = stdout(&qdist(&["bounds", "--a", "1", "--b", "1", "--theta", "45", "--deg", "--grid", "5"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "t,Q,M,I_num,L,N,R,P,S");
    assert_eq!(lines.len(), 6);
    assert!(!out.contains('\r'));
    let mid: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(mid[0], 0.5);
    // Pure states: M, I_num and P coincide.
    assert!((mid[2] - mid[3]).abs() < 1e-9 && (mid[3] - mid[7]).abs() < 1e-9);
}

#[test]
fn bits_scale_by_ln2() {
    let args = ["bounds", "--a", "1", "--b", "0.5", "--theta", "1", "--grid", "3"];
    let nats = stdout(&qdist(&args));
    let mut b = args.to_vec();
    b.push("--bits");
    let bits = stdout(&qdist(&b));
    let row = |s: &str| -> Vec<f64> { s.lines().nth(2).unwrap().split(',').map(|x| x.parse().unwrap()).collect() };
    for (n, b) in row(&nats).iter().zip(row(&bits)).skip(1) {
        assert!((n / std::f64::consts::LN_2 - b).abs() < 1e-10);
    }
}

#[test]
fn three_dimensional_bounds_leave_numeric_column_empty() {
    let dir = tempfile::tempdir().unwrap();
    let r0 = dir.path().join("r0.json");
    let r1 = dir.path().join("r1.json");
    std::fs::write(&r0, r#"{"dim":3,"matrix":[[[0.5,0],[0.1,0],[0,0]],[[0.1,0],[0.3,0],[0,0]],[[0,0],[0,0],[0.2,0]]]}"#).unwrap();
    std::fs::write(&r1, r#"{"dim":3,"matrix":[[[0.2,0],[0,0],[0,0]],[[0,0],[0.4,0],[0,0.05]],[[0,0],[0,-0.05],[0.4,0]]]}"#).unwrap();
    let out = stdout(&qdist(&["bounds", "--rho0", r0.to_str().unwrap(), "--rho1", r1.to_str().unwrap(), "--grid", "3"]));
    let mid: Vec<&str> = out.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(mid.len(), 9);
    assert_eq!(mid[3], "");
}

#[test]
fn fidelity_json() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_state(dir.path(), "a.json", "0.3,-0.2,0.5");
    let b = write_state(dir.path(), "b.json", "0,0,1");
    let v: Value = serde_json::from_str(&stdout(&qdist(&["measure", "fidelity", "--rho0", &a, "--rho1", &b]))).unwrap();
    let f = v["fidelity"].as_f64().unwrap();
    assert!((f - 0.75f64.sqrt()).abs() < 1e-12);
    let bures = v["bures"].as_f64().unwrap();
    assert!((bures - (2.0 - 2.0 * f).sqrt()).abs() < 1e-12);
}

#[test]
fn bloch_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_state(dir.path(), "a.json", "-0.41,0.27,0.63");
    let v: Value = serde_json::from_str(&stdout(&qdist(&["measure", "bloch", "--rho0", &a]))).unwrap();
    let got: Vec<f64> = v["bloch"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (g, w) in got.iter().zip([-0.41, 0.27, 0.63]) {
        assert!((g - w).abs() < 1e-12);
    }
}

#[test]
fn tradeoff_peak() {
    let out = stdout(&qdist(&["tradeoff", "--theta-grid", "179"]));
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "theta_deg,phi_opt_deg,ps,c,ps_plus_c,loose_bound");
    let (mut best_phi, mut best_theta) = (0.0f64, 0.0);
    for l in lines {
        let r: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(r[4] <= r[5] + 1e-12);
        if r[1] > best_phi {
            best_phi = r[1];
            best_theta = r[0];
        }
    }
    assert!((best_phi - 6.9926).abs() < 2e-3, "{best_phi}");
    assert!((best_theta - 27.75).abs() <= 0.5, "{best_theta}");
}

#[test]
fn broadcast_report() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_state(dir.path(), "a.json", "0,0,0.4");
    let b = write_state(dir.path(), "b.json", "0,0,-0.7");
    let v: Value = serde_json::from_str(&stdout(&qdist(&["broadcast", "--rho0", &a, "--rho1", &b]))).unwrap();
    assert_eq!(v["can_broadcast"], true);
    assert_eq!(v["cloning_feasible"], false);
    assert!(v["broadcaster"]["marginal_error"].as_f64().unwrap() < 1e-10);
    let c = write_state(dir.path(), "c.json", "0.5,0,0");
    let v: Value = serde_json::from_str(&stdout(&qdist(&["broadcast", "--rho0", &a, "--rho1", &c]))).unwrap();
    assert_eq!(v["can_broadcast"], false);
    assert!(v.get("broadcaster").is_none());
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    let args = ["tradeoff", "--theta-grid", "9"];
    let direct = stdout(&qdist(&args));
    let mut with_out = args.to_vec();
    with_out.extend(["--out", p.to_str().unwrap()]);
    assert!(stdout(&qdist(&with_out)).is_empty());
    assert_eq!(std::fs::read_to_string(&p).unwrap(), direct);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["bounds", "--a", "0.8", "--b", "0.9", "--theta", "0.7", "--grid", "9"];
    let run = |n: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_qdist")).args(args).env("QDIST_THREADS", n).output().unwrap();
        stdout(&o)
    };
    assert_eq!(run("1"), run("4"));
}
