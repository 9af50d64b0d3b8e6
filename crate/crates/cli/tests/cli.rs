use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn mms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mms"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn scratch(name: &str, contents: &[u8]) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mms-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn construct_then_analyze() {
    let star = mms(&["construct", "star", "--n", "8", "--k", "3"]);
    assert!(star.status.success());
    let path = scratch("star.json", &star.stdout);
    let p = path.to_str().unwrap();

    let out = mms(&["analyze", "--input", p, "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["count"], 21);
    assert_eq!(v["pivot_is_large"], true);

    // n = 8 is below 2k^3
    let out = mms(&["analyze", "--input", p, "--k", "3", "--check", "thm5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn lp_values_on_a_path() {
    let path = scratch("path.json", br#"{"n":4,"k":2,"edges":[[1,2],[2,3],[3,4]]}"#);
    let p = path.to_str().unwrap();
    assert_eq!(json(&mms(&["lp", "nu", "--hypergraph", p]))["nu"], 2);
    assert_eq!(json(&mms(&["lp", "nu-star", "--hypergraph", p]))["value"], "2/1");
    assert_eq!(json(&mms(&["lp", "tau-star", "--hypergraph", p]))["value"], "2/1");
}

#[test]
fn baranyai_formats() {
    let out = mms(&["baranyai", "--n", "6", "--k", "3", "--validate"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["valid"], true);
    assert_eq!(v["rounds"].as_array().unwrap().len(), 10);

    let csv = mms(&["--format", "csv", "baranyai", "--n", "6", "--k", "3"]);
    assert!(String::from_utf8(csv.stdout).unwrap().starts_with("field,value"));
}

#[test]
fn feige_search_and_erdos() {
    let v = json(&mms(&[
        "feige",
        "search",
        "--m",
        "1",
        "--threshold",
        "2",
        "--grid",
        "20",
    ]));
    assert_eq!(v["best_prob"], "1/2");
    let v = json(&mms(&["erdos", "--n", "6", "--r", "3", "--s", "1"]));
    assert_eq!(v["formula"], "10");
}

#[test]
fn violated_claim_exits_two() {
    let out = mms(&["harness", "constructions", "--n", "30"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    let hm2 = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["claim"] == "hm-construction-2")
        .unwrap();
    assert_eq!(hm2["status"], "violated");
}

#[test]
fn harness_is_deterministic_across_threads() {
    let args = [
        "--seed", "5", "harness", "lemmas", "--n", "14", "--k", "3", "--trials", "10",
    ];
    let a = mms(&args);
    assert_eq!(a.status.code(), Some(0));
    let mut single = vec!["--threads", "1"];
    single.extend(args);
    assert_eq!(a.stdout, mms(&single).stdout);
}
