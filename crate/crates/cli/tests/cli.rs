use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conicsphere"))
        .args(args)
        .env_remove("CONICSPHERE_TOL")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn schema() -> jsonschema::JSONSchema {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/output.schema.json");
    let raw: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&raw).expect("schema compiles")
}

#[test]
fn every_report_matches_the_schema() {
    let schema = schema();
    let cases: &[&[&str]] = &[
        &["decide", "1/2", "1/2", "1/2"],
        &["decide", "0.3", "0.3", "0.3"],
        &["decide", "2", "1/2", "1/2"],
        &["decide", "2", "3", "4"],
        &["decide", "2", "2", "1/3"],
        &["canonicalize", "7/5", "2/3", "5/4"],
        &["monodromy", "1/3", "2/5", "3/4"],
        &["area", "1", "1", "1"],
        &["cone-check", "1/2", "1/2", "1/2"],
        &["rational", "1", "2", "2", "--compare", "1,-2,1;1"],
        &["catalan", "4"],
        &["membrane", "1/2", "1/2", "3/4", "--format", "json"],
        &["membrane", "2", "1/3", "2/3", "--format", "json"],
    ];
    for args in cases {
        let doc = json(args);
        if let Err(errors) = schema.validate(&doc) {
            let msgs: Vec<String> = errors.map(|e| e.to_string()).collect();
            panic!("{args:?}: {msgs:?}");
        };
    }
}

#[test]
fn decide_reports_exact_verdicts() {
    let doc = json(&["decide", "1/2", "1/2", "1/2"]);
    assert_eq!(doc["exists"], true);
    assert_eq!(doc["rule"], "Theorem1");
    assert_eq!(doc["witness"]["canonical"][0], "1/2");
    // Decimals are read exactly.
    let doc = json(&["decide", "0.35", "1.5", "2"]);
    assert_eq!(doc["input"][0], "7/20");
    // Same exact triple, same document.
    assert_eq!(json(&["decide", "0.5", "2/4", "1/2"])["witness"], json(&["decide", "1/2", "1/2", "1/2"])["witness"]);
}

#[test]
fn catalan_text_and_area() {
    let out = run(&["catalan", "3", "--format", "text"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "2\n");
    let doc = json(&["area", "1", "1", "1"]);
    let area = doc["diagnostics"]["area"].as_f64().unwrap();
    assert!((area - 4.0 * std::f64::consts::PI).abs() < 1e-5);
    assert_eq!(doc["diagnostics"]["tolerance"], 1e-6);
}

#[test]
fn tolerance_from_environment_and_flag() {
    let out = Command::new(env!("CARGO_BIN_EXE_conicsphere"))
        .args(["area", "1/2", "1/2", "1/2"])
        .env("CONICSPHERE_TOL", "1e-4")
        .output()
        .unwrap();
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["diagnostics"]["tolerance"], 1e-4);
    let doc = json(&["area", "1/2", "1/2", "1/2", "--tol", "1e-3"]);
    assert_eq!(doc["diagnostics"]["tolerance"], 1e-3);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["decide", "1/2", "x", "1"]).status.code(), Some(2));
    assert_eq!(run(&["decide", "1/2", "1/2"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["catalan", "3", "--format", "svg"]).status.code(), Some(2));
    // No metric, so nothing to integrate.
    assert_eq!(run(&["area", "3/10", "3/10", "3/10"]).status.code(), Some(3));
    assert_eq!(run(&["rational", "2", "2", "2"]).status.code(), Some(2));
}

#[test]
fn membrane_svg_to_file() {
    let dir = std::env::temp_dir().join(format!("conicsphere-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("octant.svg");
    let out = run(&["membrane", "1/2", "1/2", "1/2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.starts_with("<?xml") && svg.contains("v1: 1/2π"));
    std::fs::remove_dir_all(&dir).unwrap();
}
