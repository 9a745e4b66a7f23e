use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const MOMENT: &str = r#"{"k":2,"interval":["1","2"],"coeffs":[["0","1"],["0","0","1"]]}"#;
const LINE: &str = r#"{"k":2,"interval":["0","1"],"coeffs":[["0","1"],["1","2"]]}"#;

fn improv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_improv")).args(args).env_remove("IMPROV_BUDGET").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn dirichlet_check_at_mu_one() {
    let out = improv(&["dirichlet", "check", "--xi", "2/7", "--N", "3", "--mu", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict_A"], "soluble");
    assert_eq!(v["verdict_B"], "soluble");
    assert!(v["lattice"].is_null());
    assert!(v["witnesses"]["A"]["q"].is_array());
}

#[test]
fn dirichlet_check_modes_agree() {
    let out = improv(&["dirichlet", "check", "--xi", "2/7,3/5", "--N", "10", "--mu", "4/5", "--mode", "both"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["consistent"], true);
    let lat = json(&improv(&["dirichlet", "check", "--xi", "2/7,3/5", "--N", "10", "--mu", "4/5", "--mode", "lattice"]));
    assert_eq!(lat["lattice"], v["lattice"]);
    assert!(lat["verdict_A"].is_null());
    let bad = improv(&["dirichlet", "check", "--xi", "2/7", "--N", "3", "--mu", "1", "--mode", "lattice"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn parse_errors_exit_two() {
    for args in [
        vec!["dirichlet", "check", "--xi", "0.5", "--N", "3", "--mu", "1"],
        vec!["dirichlet", "check", "--xi", "1/2", "--N", "3", "--mu", "1", "--bogus"],
        vec!["dirichlet", "scan", "--xi", "1/2", "--N", "5,3", "--mu", "1/2"],
        vec!["basiclemma", "verify", "--n", "3", "--rep", "nonsense"],
        vec!["frobnicate"],
    ] {
        let out = improv(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn degenerate_curve_names_the_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let line = write(dir.path(), "line.json", LINE);
    let out = improv(&["orbit", "stats", "--curve", &line, "--N", "4,8", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not contained in a proper affine subspace"));
    assert!(out.stdout.is_empty());
}

#[test]
fn orbit_stats_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let curve = write(dir.path(), "m.json", MOMENT);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = ["orbit", "stats", "--curve", &curve, "--mu", "1/2", "--N", "16,32,...,128", "--samples", "30", "--seed", "0"];
    let mut one: Vec<&str> = base.to_vec();
    one.extend(["--out", a.to_str().unwrap(), "--workers", "1"]);
    let mut two: Vec<&str> = base.to_vec();
    two.extend(["--out", b.to_str().unwrap(), "--workers", "3"]);
    assert_eq!(improv(&one).status.code(), Some(0));
    assert_eq!(improv(&two).status.code(), Some(0));
    let (a, b) = (std::fs::read_to_string(a).unwrap(), std::fs::read_to_string(b).unwrap());
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert!(lines[0].starts_with("# config: "));
    assert_eq!(lines[2], "N,K_fraction_first,K_fraction_both,mean_box_count,count_stddev,samples_ok,samples_aborted");
    assert_eq!(lines.len(), 7);
    assert!(lines[3].starts_with("16,"));
}

#[test]
fn budget_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let curve = write(dir.path(), "m.json", MOMENT);
    let out = Command::new(env!("CARGO_BIN_EXE_improv"))
        .args(["orbit", "stats", "--curve", &curve, "--N", "4", "--samples", "2"])
        .env("IMPROV_BUDGET", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"budget\":2"));
    let ok = improv(&["orbit", "stats", "--curve", &curve, "--N", "4", "--samples", "2", "--budget", "100000"]);
    assert_eq!(ok.status.code(), Some(0));
    let lattice = improv(&["dirichlet", "check", "--xi", "2/7", "--N", "30", "--mu", "1/2", "--mode", "lattice", "--budget", "2"]);
    assert_eq!(lattice.status.code(), Some(3));
}

#[test]
fn shadow_json() {
    let dir = tempfile::tempdir().unwrap();
    let curve = write(dir.path(), "m.json", MOMENT);
    let out = improv(&["orbit", "shadow", "--curve", &curve, "--s0", "1", "--N", "1000", "--exponent", "3/4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let dev = v["report"]["deviation"].as_f64().unwrap();
    assert!((dev / 1000f64.powf(-1.5) - 1.0).abs() < 1e-9);
    let bad = improv(&["orbit", "shadow", "--curve", &curve, "--s0", "1", "--N", "1000", "--exponent", "1/3"]);
    assert_eq!(bad.status.code(), Some(2));
    let missing = improv(&["orbit", "shadow", "--curve", "/nonexistent/c.json", "--s0", "1", "--N", "10", "--exponent", "3/4"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn basiclemma_summary() {
    let out = improv(&["basiclemma", "verify", "--n", "3", "--rep", "adjoint", "--trials", "8", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["trials"], 8);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
    assert_eq!(v["dims"].as_array().unwrap().len(), 8);
    let again = improv(&["basiclemma", "verify", "--n", "3", "--rep", "adjoint", "--trials", "8", "--seed", "0"]);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn curve_commands() {
    let dir = tempfile::tempdir().unwrap();
    let curve = write(dir.path(), "m.json", MOMENT);
    let out = improv(&["curve", "check", "--curve", &curve]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# nondegenerate: true"));
    assert!(text.contains("component,degree,alpha,C"));
    assert!(text.lines().any(|l| l.starts_with("2,2,1/2,")));
    let line = write(dir.path(), "line.json", LINE);
    let text = String::from_utf8(improv(&["curve", "check", "--curve", &line]).stdout).unwrap();
    assert!(text.contains("# nondegenerate: false"));

    let d = json(&improv(&["curve", "decompose", "--matrix", "2,1,0;3,2,0;0,0,1"]));
    assert_eq!(d["reconstructs"], true);
    assert_eq!(d["phi"], serde_json::json!(["1/2", "0/1"]));
    assert_eq!(improv(&["curve", "decompose", "--matrix", "0,1;-1,0"]).status.code(), Some(2));
    assert_eq!(improv(&["curve", "decompose", "--matrix", "1,1;1,1"]).status.code(), Some(2));
}

#[test]
fn scan_over_a_curve() {
    let dir = tempfile::tempdir().unwrap();
    let curve = write(dir.path(), "m.json", MOMENT);
    let out = improv(&["dirichlet", "scan", "--curve", &curve, "--grid", "4", "--N", "2..10", "--mu", "9/10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["report"]["rows"][0]["s"], "9/8");
}
