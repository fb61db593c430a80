use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SHIPPED_SYNTH: &str = include_str!("../../../configs/synth.default.toml");
const SHIPPED_RULES: &str = include_str!("../../../configs/rules.sample.toml");

fn trxcat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trxcat"))
        .args(args)
        .current_dir(dir)
        .env_remove("TRXCAT_SEED")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = trxcat(dir, args);
    assert!(
        out.status.success(),
        "trxcat {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn small_synth(dir: &Path, n: usize) -> PathBuf {
    let text = SHIPPED_SYNTH.replace("n_records = 50000", &format!("n_records = {n}"));
    assert_ne!(text, SHIPPED_SYNTH);
    let path = dir.join("synth.toml");
    fs::write(&path, text).unwrap();
    path
}

fn manifest(dir: &Path, output: &str) -> serde_json::Value {
    let text = fs::read_to_string(dir.join(format!("{output}.manifest.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn stages_chain_from_synth_to_evaluate() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--n-records", "2500", "--out", "corpus.jsonl"]);
    ok(d, &["preprocess", "--in", "corpus.jsonl", "--out", "tokens.jsonl"]);
    ok(d, &["dedup", "--in", "corpus.jsonl", "--out", "deduped.jsonl", "--report", "drops.jsonl"]);
    ok(d, &["label", "--in", "deduped.jsonl", "--out", "labeled.jsonl", "--force", "--drop-unlabeled"]);
    ok(d, &["split", "--in", "labeled.jsonl", "--train-out", "train.jsonl", "--test-out", "test.jsonl"]);
    ok(d, &["featurize", "--in", "train.jsonl", "--out", "features.bin"]);
    ok(d, &["train", "--in", "train.jsonl", "--featurizer", "features.bin", "--model", "naive_bayes", "--out", "m.bin"]);
    let eval = ok(d, &["evaluate", "--model", "m.bin", "--test", "test.jsonl", "--report", "report.json"]);
    assert!(String::from_utf8_lossy(&eval.stdout).contains("weighted precision"));
    ok(d, &["predict", "--model", "m.bin", "--in", "test.jsonl", "--out", "pred.jsonl"]);

    let tokens = fs::read_to_string(d.join("tokens.jsonl")).unwrap();
    assert_eq!(tokens.lines().count(), 2500);
    let first: serde_json::Value = serde_json::from_str(tokens.lines().next().unwrap()).unwrap();
    assert!(first["tokens"].is_array() && first["id"].is_string());

    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert!(report["weighted"]["f1"].as_f64().unwrap() > 0.8);
    let test_rows = fs::read_to_string(d.join("test.jsonl")).unwrap().lines().count();
    let pred = fs::read_to_string(d.join("pred.jsonl")).unwrap();
    assert_eq!(pred.lines().count(), test_rows);
    let rendered = ok(d, &["report", "--in", "report.json"]);
    assert!(String::from_utf8_lossy(&rendered.stdout).contains("Category"));

    let m = manifest(d, "m.bin");
    assert_eq!(m["command"], "train");
    assert_eq!(m["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn synth_reruns_are_byte_identical_and_seed_precedence_holds() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--n-records", "400", "--out", "a.jsonl"]);
    ok(d, &["synth", "--n-records", "400", "--out", "b.jsonl"]);
    let read = |name: &str| fs::read(d.join(name)).unwrap();
    assert_eq!(read("a.jsonl"), read("b.jsonl"));
    let strip = |v: serde_json::Value| v["outputs"][0]["sha256"].clone();
    assert_eq!(strip(manifest(d, "a.jsonl")), strip(manifest(d, "b.jsonl")));

    let with_env = |args: &[&str], seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_trxcat"))
            .args(args)
            .current_dir(d)
            .env("TRXCAT_SEED", seed)
            .output()
            .unwrap();
        assert!(out.status.success());
    };
    with_env(&["synth", "--n-records", "400", "--out", "env.jsonl"], "7");
    ok(d, &["synth", "--n-records", "400", "--seed", "7", "--out", "flag.jsonl"]);
    with_env(&["synth", "--n-records", "400", "--seed", "7", "--out", "both.jsonl"], "8");
    assert_ne!(read("env.jsonl"), read("a.jsonl"));
    assert_eq!(read("env.jsonl"), read("flag.jsonl"));
    assert_eq!(read("both.jsonl"), read("flag.jsonl"));
    assert_eq!(manifest(d, "env.jsonl")["seed"], 7);
}

#[test]
fn predicting_zero_records_writes_an_empty_file() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--n-records", "600", "--out", "c.jsonl"]);
    ok(d, &["train", "--in", "c.jsonl", "--out", "m.bin"]);
    fs::write(d.join("empty.jsonl"), "").unwrap();
    ok(d, &["predict", "--model", "m.bin", "--in", "empty.jsonl", "--out", "pred.jsonl"]);
    assert_eq!(fs::read(d.join("pred.jsonl")).unwrap(), b"");
}

#[test]
fn exit_codes_separate_usage_from_data_errors() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let code = |args: &[&str]| trxcat(d, args).status.code().unwrap();
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["train", "--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["synth", "--out", "x.jsonl", "--bogus"]), 1);
    assert_eq!(code(&["train", "--in", "x", "--out", "y", "--model", "perceptron"]), 1);
    assert_eq!(code(&["dedup", "--in", "missing.jsonl", "--out", "o.jsonl"]), 2);
    fs::write(d.join("bad.jsonl"), "{\"id\":\"a\",\"description\":\"x\",\"value\":\"1\",\"date\":\"2022-13-01\"}\n").unwrap();
    let out = trxcat(d, &["label", "--in", "bad.jsonl", "--out", "o.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("date"));
    assert_eq!(code(&["dedup", "--in", "bad.jsonl", "--out", "o.jsonl", "--threshold", "1.5"]), 2);
}

#[test]
fn manifest_hashes_track_config_bytes() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--n-records", "300", "--out", "c.jsonl"]);
    fs::write(d.join("rules.toml"), SHIPPED_RULES).unwrap();
    fs::write(d.join("rules2.toml"), SHIPPED_RULES).unwrap();
    fs::write(d.join("rules3.toml"), format!("{SHIPPED_RULES}\n# tweak\n")).unwrap();
    for (rules, out) in [("rules.toml", "a.jsonl"), ("rules2.toml", "b.jsonl"), ("rules3.toml", "c2.jsonl")] {
        ok(d, &["label", "--rules", rules, "--in", "c.jsonl", "--out", out, "--force"]);
    }
    let hash = |out: &str| manifest(d, out)["configs"][0]["sha256"].clone();
    assert_eq!(hash("a.jsonl"), hash("b.jsonl"));
    assert_ne!(hash("a.jsonl"), hash("c2.jsonl"));
    // the comment changes no label, so the outputs agree
    let out_hash = |out: &str| manifest(d, out)["outputs"][0]["sha256"].clone();
    assert_eq!(out_hash("a.jsonl"), out_hash("c2.jsonl"));
    let input_hash = |out: &str| manifest(d, out)["inputs"][0]["sha256"].clone();
    assert_eq!(input_hash("a.jsonl"), input_hash("c2.jsonl"));
}

#[test]
fn experiment_builds_its_corpus_and_writes_tables() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    small_synth(d, 1500);
    fs::write(d.join("rules.sample.toml"), SHIPPED_RULES).unwrap();
    fs::write(
        d.join("exp.toml"),
        r#"fractions = [0.8, 0.5]
seeds = [1, 2]

[pipeline]
synth = "synth.toml"
rules = "rules.sample.toml"
dedup_threshold = 0.85

[[models]]
name = "Naive Bayes"
[models.features]
kind = "ngram-tfidf"
[models.model]
kind = "naive_bayes"
"#,
    )
    .unwrap();
    let out = ok(d, &["experiment", "--config", "exp.toml", "--out", "results"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Training data 80%") && text.contains("Training data 50%"));
    assert_eq!(fs::read_to_string(d.join("results/tables.txt")).unwrap(), text);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("results/experiment.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 4);
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("results/manifest.json")).unwrap()).unwrap();
    let configs: Vec<&str> = m["configs"].as_array().unwrap().iter().map(|c| c["path"].as_str().unwrap()).collect();
    assert!(configs.iter().any(|p| p.ends_with("synth.toml")));
    let rendered = ok(d, &["report", "--in", "results/experiment.json"]);
    assert_eq!(String::from_utf8_lossy(&rendered.stdout), text);
}
