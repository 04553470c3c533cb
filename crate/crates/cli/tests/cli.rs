use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run_with_cache(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cobordlab"))
        .args(args)
        .env("COBORDLAB_CACHE", cache)
        .output()
        .expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    run_with_cache(&dir.path().join("cache.json"), args)
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn partitions(class: &Value) -> Vec<Vec<u64>> {
    class["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["partition"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect())
        .collect()
}

#[test]
fn class_of_p4() {
    let v = json(&run(&["class", "P(4)", "-p", "2", "--json"]));
    assert_eq!(partitions(&v["class"]), vec![vec![4], vec![2, 2], vec![2, 1, 1]]);
    assert!(v["class"]["terms"].as_array().unwrap().iter().all(|t| t["coeff"] == 1));
    let text = run(&["class", "P(4)", "-p", "2"]);
    assert_eq!(String::from_utf8(text.stdout).unwrap().trim(), "[P(4)] = b[4] + b[2]^2 + b[2]*b[1]^2");
}

#[test]
fn dimq_of_p4() {
    let v = json(&run(&["dimq", "P(4)", "-p", "2", "-q", "2", "--json"]));
    assert_eq!(v, serde_json::json!({ "direct": 2, "viaGenerators": 2 }));
}

#[test]
fn raw_class_outside_l2() {
    let out = run(&["express", "b[2]*b[1]^2", "-p", "2", "--json"]);
    let v = json(&out);
    assert_eq!(v["result"]["status"], "notInLp");
    assert_eq!(v["result"]["witness"], serde_json::json!([2, 1, 1]));
    let strict = run(&["express", "b[2]*b[1]^2", "-p", "2", "--require-member"]);
    assert_eq!(strict.status.code(), Some(2));
    let member = json(&run(&["express", "b[4] + b[2]^2 + b[2]*b[1]^2", "--json"]));
    assert_eq!(member["result"]["status"], "member");
}

#[test]
fn normalization_note() {
    let out = run(&["express", "H(4,2)"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("H(2,4)"));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "[H(2,4)] = X[5]");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["dimq", "P(4)", "-q", "3"]).status.code(), Some(1));
    assert_eq!(run(&["class", "P(4", "-p", "2"]).status.code(), Some(1));
    assert_eq!(run(&["class", "P(4)", "-p", "4"]).status.code(), Some(1));
    assert_eq!(run(&["class", "P(4)", "--max-weight", "2"]).status.code(), Some(1));
    assert_eq!(run(&["express", "b[5]", "--max-weight", "3"]).status.code(), Some(1));
    assert_eq!(run(&["nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["dimq", "P(4)"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["dimq", "b[2]*b[1]^2", "-q", "2"]).status.code(), Some(2));
    assert_eq!(run(&["realize", "P(4)", "-q", "2", "--family", "perturbed(3)"]).status.code(), Some(1));
}

#[test]
fn output_is_identical_with_and_without_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("nested").join("cache.json");
    let args = ["express", "2.P(4)*H(2,4) + P(2)*P(2)*P(3)", "--json"];
    let miss = run_with_cache(&cache, &args);
    assert!(cache.exists());
    let hit = run_with_cache(&cache, &args);
    assert!(miss.status.success());
    assert_eq!(miss.stdout, hit.stdout);
    std::fs::write(&cache, "{ not json").unwrap();
    let corrupt = run_with_cache(&cache, &args);
    assert_eq!(miss.stdout, corrupt.stdout);
    let other = run(&args);
    assert_eq!(miss.stdout, other.stdout);
}

#[test]
fn perturbed_family_agrees_on_dimq() {
    for fam in ["standard", "perturbed(11)"] {
        let v = json(&run(&["dimq", "P(2)*P(2)*H(2,4)", "-q", "4", "--family", fam, "--json"]));
        assert_eq!(v["direct"], v["viaGenerators"]);
    }
}

#[test]
fn bounds_and_realizations() {
    let main = json(&run(&["bound", "P(4)", "-q", "2", "--json"]));
    assert_eq!(main["bound"], 2);
    let milnor = json(&run(&["bound", "H(2,4)", "--kind", "milnor", "--json"]));
    assert_eq!(milnor["report"]["holds"], true);
    assert_eq!(milnor["report"]["required"], 1);
    let ratio = json(&run(&["bound", "P(10)", "--kind", "ratio", "--set", "np", "-s", "1", "-q", "2", "--json"]));
    assert_eq!(ratio["bound"], 5);
    let small = json(&run(&["bound", "P(1)*P(1)*P(1)", "-p", "3", "-q", "3", "--kind", "small", "--json"]));
    assert_eq!(small["report"]["holds"], true);
    let r = json(&run(&["realize", "P(4)*P(2)", "-q", "4", "--json"]));
    assert_eq!(r["realization"]["achievedDim"], 1);
    let g = json(&run(&["realize", "P(4)", "-p", "2", "--group", "2,2", "--json"]));
    assert_eq!(g["group"], serde_json::json!([2, 2]));
}

#[test]
fn rho_and_localize() {
    let v = json(&run(&["rho", "np-5", "-p", "2", "-q", "2", "--json"]));
    assert_eq!(v["rho"], "4/9");
    let v = json(&run(&["rho", "-p", "2", "-q", "2", "--json"]));
    assert_eq!(v["rho"], "2/5");
    let l = json(&run(&["localize", "--weights", "0,0,1", "--zeta", "2", "-p", "3", "-r", "2", "--json"]));
    assert_eq!(l["lhs"], l["rhs"]);
    assert_eq!(l["lhs"], 1);
}

#[test]
fn selftest_subset() {
    let out = run(&["selftest", "--criterion", "1", "--criterion", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[PASS] criterion  1"));
    assert!(text.trim_end().ends_with("2 of 2 criteria passed"));
    assert_eq!(run(&["selftest", "--criterion", "13"]).status.code(), Some(1));
}
