use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn stoch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stoch")).args(args).env_remove("STOCH_MAX_N").output().unwrap()
}

fn write(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("stoch-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const I3: &str = r#"{"n": 3, "entries": [["1","0","0"],["0","1","0"],["0","0","1"]]}"#;

#[test]
fn decompose_identity() {
    let path = write("i3.json", I3);
    let out = stoch(&["decompose", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let zero = serde_json::json!([["0", "0", "0"], ["0", "0", "0"], ["0", "0", "0"]]);
    assert_eq!(v["a_r"]["entries"], zero);
    assert_eq!(v["a_c"]["entries"], zero);
    assert_eq!(v["a_ds"]["entries"][1][1], "1");
}

#[test]
fn decompose_csv() {
    let path = write("m.csv", "1/2, 1/2\n0, 1\n");
    let out = stoch(&["--format", "csv", "decompose", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("a_ds\n"), "{text}");
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn classify_and_charpoly() {
    let path = write("half.json", r#"{"n": 2, "entries": [["1/2","1/2"],["1/2","1/2"]]}"#);
    let out = stoch(&["classify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let tags: Vec<String> = serde_json::from_value(json(&out)).unwrap();
    assert!(tags.contains(&"DS".to_string()), "{tags:?}");

    let out = stoch(&["charpoly", path.to_str().unwrap()]);
    assert_eq!(json(&out)["coeffs"], serde_json::json!(["1", "-1", "0"]));
}

#[test]
fn birkhoff_weights_sum_to_one() {
    let path = write("ds.json", r#"{"n": 2, "entries": [["1/3","2/3"],["2/3","1/3"]]}"#);
    let out = stoch(&["birkhoff", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let terms = json(&out);
    let weights: Vec<&str> = terms.as_array().unwrap().iter().map(|t| t["w"].as_str().unwrap()).collect();
    let mut sorted = weights.clone();
    sorted.sort();
    assert_eq!(sorted, ["1/3", "2/3"]);
}

#[test]
fn selftest_suite_alias() {
    let out = stoch(&["selftest", "--suite", "theorem-2.3", "--n", "4", "--trials", "100"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn transposes_on_three_factors_fail_with_a_certificate() {
    let form = r#"{"family": "DS_conj", "m": 3, "n": 3, "perms": [[1,2,3],[1,2,3],[1,2,3]], "transpose": true}"#;
    let path = write("triple.json", form);
    let out = stoch(&["preserver-verify", "--form", path.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["holds"], false);
    assert_eq!(v["verdict"], "certificate");
    assert_eq!(v["counterexample"]["evidence"]["kind"], "spectrum");
    assert_eq!(v["counterexample"]["inputs"].as_array().unwrap().len(), 3);
}

#[test]
fn generated_forms_verify() {
    let out = stoch(&["preserver-gen", "--family", "DS_conj", "--n", "3", "--m", "3", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let path = write("gen.json", std::str::from_utf8(&out.stdout).unwrap());
    let out = stoch(&["preserver-verify", "--form", path.to_str().unwrap(), "--seed", "1", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["verdict"], "evidence");
}

#[test]
fn example_is_infeasible() {
    let out = stoch(&["feasible", "--example", "3"]);
    let v = json(&out);
    assert_eq!(v["feasible"], false);
    assert_eq!(v["bound_sum"], "1/3");
}

#[test]
fn bad_input_exits_two() {
    let malformed = write("bad.json", r#"{"n": 2, "entries": [["1","x"],["0","1"]]}"#);
    let out = stoch(&["decompose", malformed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let ragged = write("ragged.csv", "1,0\n0\n");
    assert_eq!(stoch(&["decompose", ragged.to_str().unwrap()]).status.code(), Some(2));

    let mismatch = write("mismatch.json", r#"{"n": 3, "entries": [["1","0"],["0","1"]]}"#);
    assert_eq!(stoch(&["decompose", mismatch.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(stoch(&["decompose", "/nonexistent/matrix.json"]).status.code(), Some(2));
    assert_eq!(stoch(&["no-such-verb"]).status.code(), Some(2));
    assert_eq!(stoch(&["selftest", "--suite", "no-such-suite"]).status.code(), Some(2));
}

#[test]
fn size_limit_from_environment() {
    let path = write("i3-limit.json", I3);
    let out = Command::new(env!("CARGO_BIN_EXE_stoch"))
        .args(["decompose", path.to_str().unwrap()])
        .env("STOCH_MAX_N", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
