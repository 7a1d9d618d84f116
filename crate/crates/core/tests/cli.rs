use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn qsieve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsieve")).args(args).output().expect("run qsieve")
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = qsieve(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    assert_eq!(v["schema_version"], 1);
    v
}

fn forms_dir() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/forms").to_string_lossy().into_owned()
}

#[test]
fn classify_and_unit_genus() {
    let v = json(&["classify", "--d", "6"]);
    assert_eq!(v["kind"], "classify");
    let text = String::from_utf8(qsieve(&["classify", "--d", "6"]).stdout).unwrap();
    assert!(text.contains("5 + 2*sqrt(6)"), "{text}");
    let v = json(&["unit-genus", "--d", "6"]);
    assert_eq!(v["result"]["d0"], "3");
}

#[test]
fn errors_exit_nonzero_with_module_tag() {
    let out = qsieve(&["unit-genus", "--d", "2"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error unitgenus:"), "{err}");
    let out = qsieve(&["classify", "--d", "12"]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error quadfield:"));
}

#[test]
fn tables_match_transcription() {
    let out = qsieve(&["tables"]);
    let expected = include_str!("data/tables_transcribed.csv");
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
    let refined = String::from_utf8(qsieve(&["tables", "--presentation", "refined"]).stdout).unwrap();
    assert_ne!(refined, expected);
}

#[test]
fn character_level_frey_irred() {
    let v = json(&["character", "--d", "129", "--e-rule", "printed"]);
    assert_eq!(v["result"]["nebentypus"]["e_rule"], "printed");
    let v = json(&["level", "--d", "129", "--c-even", "true"]);
    assert_eq!(v["result"]["selected_level"], "258");
    let v = json(&["frey", "--d", "6", "--A", "1", "--B", "1", "--q", "5", "--sample", "4", "--seed", "3"]);
    let traces = v["result"]["traces"].as_array().unwrap();
    assert_eq!(traces.len(), 2);
    assert!(traces.iter().all(|t| t["reduction"] == "multiplicative"));
    let samples = v["result"]["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 4);
    assert!(samples
        .iter()
        .all(|s| s["psi3_constant"] == "-3" && s["psi5_constant"] == "5" && s["isogeny_identity"] == true));
    // same seed, same samples
    assert_eq!(v, json(&["frey", "--d", "6", "--A", "1", "--B", "1", "--q", "5", "--sample", "4", "--seed", "3"]));
    let v = json(&["frey", "--d", "6", "--A", "-7", "--B", "20"]);
    assert!(v["result"]["j_invariant"].as_str().unwrap().starts_with("188837384000"));
    let v = json(&["irred", "--d", "6", "--aux", "3"]);
    assert_eq!(v["result"]["excluded_primes"], serde_json::json!(["2", "3", "97"]));
}

#[test]
fn sieve_on_fixture() {
    let f = format!("{}/d6_1536.json", forms_dir());
    let v = json(&["sieve", "--d", "6", "--forms", &f, "--pmax", "200"]);
    let verdicts = v["result"].as_array().unwrap();
    assert_eq!(verdicts.len(), 13);
    for verdict in verdicts {
        assert!(verdict["statuses"].as_object().unwrap().values().all(|s| s["status"] == "discarded"));
    }
}

#[test]
fn ellenberg_and_search() {
    let v = json(&["ellenberg", "--D", "129", "--kappa", "1/90000"]);
    assert_eq!(v["result"]["threshold"]["p_star"], "64633");
    let v = json(&["ellenberg", "--D", "129", "--kappa", "1/90000", "--p", "1000", "--trace-terms"]);
    assert!(!v["result"]["guard_violations"].as_array().unwrap().is_empty());
    let v = json(&["search", "--d", "17", "--H", "50"]);
    let hits: Vec<(String, String)> = v["result"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["trivial"] == false)
        .map(|r| (r["a"].to_string(), r["c"].to_string()))
        .collect();
    assert_eq!(hits.len(), 4);
}

#[test]
fn replay_and_config() {
    let v = json(&["replay", "--d", "6", "--forms", &forms_dir()]);
    assert_eq!(v["result"]["conclusion"]["theorem_consistent"], true);
    let v = json(&["replay", "--d", "129", "--forms", &forms_dir()]);
    assert_eq!(v["result"]["conclusion"]["theorem_consistent"], true);

    let dir = std::env::temp_dir().join(format!("qsieve_cli_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"general_h": 30}"#).unwrap();
    let v = json(&["--config", cfg.to_str().unwrap(), "search", "--d", "129", "--p", "7"]);
    assert!(v["result"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["a"].as_str().unwrap().parse::<i64>().unwrap().abs() <= 30));
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let out = qsieve(&["--config", cfg.to_str().unwrap(), "classify", "--d", "6"]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error config:"));
    let _ = std::fs::remove_dir_all(dir);
}
