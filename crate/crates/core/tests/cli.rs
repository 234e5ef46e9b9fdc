//! The `divsample` binary: subcommands chained by hand, exit codes, and a
//! pipeline run that fails midway.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_divsample");

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn config(name: &str) -> String {
    format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn divsample(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(divsample(&["--help"]).status.code(), Some(0));
    assert_eq!(divsample(&[]).status.code(), Some(1));
    assert_eq!(divsample(&["frobnicate"]).status.code(), Some(1));
    let bad = divsample(&["sample", "--corpus", &fixture("corpus_20.tsv"), "--n", "2", "--strategy", "best", "--out", "/dev/null"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = divsample(&["stats", "--corpus", "/nonexistent/corpus.tsv"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nonexistent"));

    let broken = dir.path().join("broken.tsv");
    fs::write(&broken, "doc_id\ttitle\n1\tx\n").unwrap();
    assert_eq!(divsample(&["stats", "--corpus", path(&broken)]).status.code(), Some(2));
}

#[test]
fn subcommands_chain_into_a_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| -> PathBuf { dir.path().join(name) };

    let out = divsample(&["preprocess", "--input", &fixture("corpus_20.tsv"), "--out", path(&p("corpus.jsonl"))]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("20 -> 19"));

    let out = divsample(&[
        "sample", "--corpus", path(&p("corpus.jsonl")), "--n", "2", "--trace-all",
        "--out", path(&p("sample.jsonl")), "--trace", path(&p("trace.csv")),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert_eq!(fs::read_to_string(p("sample.jsonl")).unwrap().lines().count(), 8);

    let out = divsample(&["analyze-trace", "--trace", path(&p("trace.csv")), "--ranks", "1,2,5", "--knee"]);
    assert!(out.status.success(), "{out:?}");
    let analysis: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(analysis["Fungi"]["length"], 6);

    let out = divsample(&[
        "verbalise", "--corpus", path(&p("sample.jsonl")), "--m", "4", "--seed", "3",
        "--config", &config("gen.toml"), "--keywords", &fixture("keywords.jsonl"),
        "--out", path(&p("instructions.jsonl")),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("instructions\t32"));

    let out = divsample(&[
        "generate", "--instructions", path(&p("instructions.jsonl")), "--k", "2",
        "--out", path(&p("candidates.jsonl")), "--failures", path(&p("failures.jsonl")),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("accepted\t16"));

    let out = divsample(&[
        "assemble", "--candidates", path(&p("candidates.jsonl")), "--split", "0.75",
        "--out-train", path(&p("train.jsonl")), "--out-valid", path(&p("valid.jsonl")),
    ]);
    assert!(out.status.success(), "{out:?}");
    let train = fs::read_to_string(p("train.jsonl")).unwrap().lines().count();
    let valid = fs::read_to_string(p("valid.jsonl")).unwrap().lines().count();
    assert_eq!(train + valid, 16);
    assert_eq!(valid, 4);

    fs::write(p("ids.txt"), "7730162\n8812001\n").unwrap();
    let out = divsample(&[
        "compare", "--corpus", path(&p("corpus.jsonl")),
        "--sample", &format!("gme={}", path(&p("sample.jsonl"))),
        "--sample", &format!("hand={}", path(&p("ids.txt"))),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).starts_with("sample\truns"));

    let out = divsample(&["mismatch", "--corpus", &fixture("corpus_20.tsv"), "--synonyms", &fixture("synonyms.tsv")]);
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["skipped_without_abstract"], 1);
}

#[test]
fn score_prints_the_fixture_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("score.json");
    let out = divsample(&["score", "--gold", &fixture("gold.json"), "--pred", &fixture("predictions.jsonl"), "--report", path(&report)]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("precision\t0.6667"), "{text}");
    assert!(text.contains("recall\t0.5714"), "{text}");
    assert!(text.contains("malformed_clauses\t1"), "{text}");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["true_positives"], 4);

    let out = divsample(&["score", "--gold", &fixture("gold.json"), "--pred", &fixture("predictions.jsonl"), "--matching", "exact"]);
    assert!(stdout(&out).contains("precision\t0.1667"));
}

#[test]
fn unknown_template_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = divsample(&[
        "verbalise", "--corpus", &fixture("corpus_20.tsv"), "--template", "nope",
        "--out", path(&dir.path().join("i.jsonl")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn unreachable_backend_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let instructions = dir.path().join("i.jsonl");
    let out = divsample(&["verbalise", "--corpus", &fixture("corpus_20.tsv"), "--m", "1", "--out", path(&instructions)]);
    assert!(out.status.success(), "{out:?}");
    let out = divsample(&[
        "generate", "--instructions", path(&instructions), "--backend-url", "http://127.0.0.1:9/",
        "--retries", "0", "--timeout-secs", "2", "--out", path(&dir.path().join("c.jsonl")),
    ]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn run_failing_at_generate_keeps_earlier_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = divsample(&[
        "run", "--config", &config("pipeline.toml"), "--out", path(&out_dir),
        "--backend-url", "http://127.0.0.1:9/",
    ]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("generate"));
    for file in ["corpus.jsonl", "sample.jsonl", "trace.csv", "instructions.jsonl"] {
        let meta = fs::metadata(out_dir.join(file)).unwrap_or_else(|_| panic!("{file} missing"));
        assert!(meta.len() > 0, "{file} is empty");
    }
    for file in ["candidates.jsonl", "train.jsonl", "manifest.json"] {
        assert!(!out_dir.join(file).exists(), "{file} should not exist");
    }
}

#[test]
fn run_is_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out_dir = dir.path().join(name);
        let out = divsample(&["run", "--config", &config("pipeline.toml"), "--out", path(&out_dir), "--seed", seed]);
        assert!(out.status.success(), "{out:?}");
        fs::read(out_dir.join("manifest.json")).unwrap()
    };
    let a = run("a", "7");
    assert_eq!(a, run("b", "7"));
    assert_ne!(a, run("c", "8"));
}
