use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn polygrid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polygrid")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = polygrid(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn fit_then_predict_recovers_training_labels() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model, pred) = (p(dir.path(), "w.csv"), p(dir.path(), "m.json"), p(dir.path(), "p.json"));
    ok(&["synth", "--instrument", "whoqol", "--rows", "100", "--no-error", "--out", &data, "--seed", "4"]);
    ok(&["fit", "--data", &data, "--sector", "cover", "--solver", "ridge", "--out", &model]);
    ok(&["predict", "--model", &model, "--scores", &data, "--out", &pred]);
    let preds: Value = serde_json::from_str(&std::fs::read_to_string(&pred).unwrap()).unwrap();
    let truth: Vec<String> = csv::Reader::from_path(&data)
        .unwrap()
        .records()
        .map(|r| r.unwrap().get(4).unwrap().to_string())
        .collect();
    let hits = preds
        .as_array()
        .unwrap()
        .iter()
        .zip(&truth)
        .filter(|(p, t)| p["labels"][0].as_str() == Some(t.as_str()))
        .count();
    assert!(hits >= 95, "{hits} of 100");
    assert_eq!(preds[0]["labels"][0].as_str(), Some(truth[0].as_str()));
}

#[test]
fn explain_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = (p(dir.path(), "a.csv"), p(dir.path(), "m.json"));
    ok(&["synth", "--instrument", "ampiab", "--rows", "120", "--out", &data, "--seed", "2"]);
    ok(&["fit", "--data", &data, "--na", "2", "--out", &model]);
    let (s1, s2, dm) = (p(dir.path(), "1.svg"), p(dir.path(), "2.svg"), p(dir.path(), "d.json"));
    ok(&["explain", "--model", &model, "--scores", &data, "--rows", "0,5", "--svg", &s1, "--diagram", &dm]);
    ok(&["explain", "--model", &model, "--scores", &data, "--rows", "0,5", "--svg", &s2]);
    let a = std::fs::read(&s1).unwrap();
    assert_eq!(a, std::fs::read(&s2).unwrap());
    assert!(String::from_utf8(a).unwrap().starts_with("<svg"));
    let dm: Value = serde_json::from_str(&std::fs::read_to_string(&dm).unwrap()).unwrap();
    assert_eq!(dm["rows"], 3);
}

#[test]
fn validate_zero_error_data() {
    let dir = tempfile::tempdir().unwrap();
    let (data, prepared, report) = (p(dir.path(), "w.csv"), p(dir.path(), "w.json"), p(dir.path(), "r.json"));
    ok(&["synth", "--instrument", "whoqol", "--no-error", "--out", &data, "--seed", "9"]);
    // the manifest of synthetic data travels with the prepared document
    ok(&["prep", "--input", &data, "--out", &prepared]);
    ok(&["validate", "--data", &prepared, "--out", &report]);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["violations"]["total_violations"], 0);
    assert_eq!(r["violations"]["arrangements"].as_array().unwrap().len(), 3);
    assert_eq!(r["covariances_positive"], true);
}

#[test]
fn validate_reports_omega_for_synthetic_documents() {
    let spec = polygrid::data::Instrument::Whoqol.spec(80).without_error();
    let ds = polygrid::data::synth_congeneric(&spec, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (doc, report) = (p(dir.path(), "s.json"), p(dir.path(), "r.json"));
    std::fs::write(&doc, serde_json::to_string(&ds).unwrap()).unwrap();
    ok(&["validate", "--data", &doc, "--out", &report]);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["omega"].as_f64(), Some(1.0));
    assert_eq!(r["violations"]["total_violations"], 0);
}

#[test]
fn harness_commands_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = p(dir.path(), "w.csv");
    let config = p(dir.path(), "run.json");
    std::fs::write(
        &config,
        r#"{"experiment": {"ss": 4, "metrics": ["accuracy", "f1.macro"]},
            "grid": {"ns_per_domain": [1], "n_a": [1, 2], "vorder": ["rho"], "annulus": ["s-invariant"],
                     "sector": ["cover", "miss"], "solver": [{"variant": "lstsq"}], "cutoff": ["single"]}}"#,
    )
    .unwrap();
    ok(&["synth", "--instrument", "whoqol", "--rows", "80", "--out", &data, "--seed", "1"]);
    let (g1, g2, best) = (p(dir.path(), "g1.csv"), p(dir.path(), "g2.csv"), p(dir.path(), "best.json"));
    ok(&["gridsearch", "--config", &config, "--data", &data, "--out", &g1, "--best", &best, "--seed", "5"]);
    ok(&["gridsearch", "--config", &config, "--data", &data, "--out", &g2, "--seed", "5"]);
    assert_eq!(std::fs::read(&g1).unwrap(), std::fs::read(&g2).unwrap());
    let best: Value = serde_json::from_str(&std::fs::read_to_string(&best).unwrap()).unwrap();
    assert_eq!(best.as_array().unwrap().len(), 2);

    let ev = p(dir.path(), "ev.csv");
    ok(&["evaluate", "--config", &config, "--data", &data, "--baselines", "random,dt,mlp", "--out", &ev, "--seed", "5"]);
    let report = p(dir.path(), "rank.json");
    let out = ok(&["rank", "--results", &ev, "--out", &report]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("echelon 1"), "{text}");
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r[0]["dominance"]["models"].as_array().unwrap().len(), 4);
}

#[test]
fn failures_emit_a_json_error_document() {
    let out = polygrid(&["predict", "--model", "/nonexistent/model.json", "--scores", "/nonexistent.csv"]);
    assert!(!out.status.success());
    let doc: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert!(doc["message"].as_str().unwrap().contains("model.json"));
    assert!(doc["error"].is_string());
}
