//! End-to-end tests of the `embalign` binary: the full pipeline on a
//! synthetic fixture, exit codes, and output determinism across flags.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_embalign"))
}

fn run_ok(args: &[&str]) -> serde_json::Value {
    let output = bin().args(args).output().expect("spawn embalign");
    assert!(
        output.status.success(),
        "embalign {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = String::from_utf8(output.stdout).unwrap();
    let line = stdout.lines().last().expect("summary line");
    serde_json::from_str(line).expect("one-line JSON summary")
}

fn run_expect_failure(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn embalign")
}

fn path_str(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn pipeline_on_synthetic_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let synth = run_ok(&[
        "synth",
        "--docs",
        "24",
        "--sents",
        "5",
        "--dim",
        "24",
        "--sigma",
        "0.01",
        "--seed",
        "11",
        "--out-dir",
        &d.display().to_string(),
    ]);
    assert_eq!(synth["command"], "synth");
    assert_eq!(synth["sentences_per_side"], 120);

    let doc_args = [
        "doc",
        "--src",
        &path_str(d, "src.jsonl"),
        "--tgt",
        &path_str(d, "tgt.jsonl"),
        "--src-emb",
        &path_str(d, "src.emb"),
        "--tgt-emb",
        &path_str(d, "tgt.emb"),
        "--dim",
        "24",
        "--min-chars",
        "0",
        "--scheme",
        "slen",
        "--out",
        &path_str(d, "doc_pairs.tsv"),
    ];
    let doc = run_ok(&doc_args);
    assert_eq!(doc["pairs"], 24);

    let eval_doc = run_ok(&[
        "eval",
        "--task",
        "document",
        "--pred",
        &path_str(d, "doc_pairs.tsv"),
        "--gold",
        &path_str(d, "gold_docs.tsv"),
    ]);
    assert_eq!(eval_doc["recall"], 1.0);

    let sent = run_ok(&[
        "sent",
        "--src",
        &path_str(d, "src.jsonl"),
        "--tgt",
        &path_str(d, "tgt.jsonl"),
        "--src-emb",
        &path_str(d, "src.emb"),
        "--tgt-emb",
        &path_str(d, "tgt.emb"),
        "--dim",
        "24",
        "--min-chars",
        "0",
        "--strategy",
        "intersection",
        "--doc-pairs",
        &path_str(d, "doc_pairs.tsv"),
        "--emit-text",
        "--out",
        &path_str(d, "sent_pairs.tsv"),
    ]);
    assert_eq!(sent["strategy"], "intersection");

    let eval_sent = run_ok(&[
        "eval",
        "--task",
        "sentence",
        "--pred",
        &path_str(d, "sent_pairs.tsv"),
        "--gold",
        &path_str(d, "gold_sents.tsv"),
    ]);
    assert_eq!(eval_sent["recall"], 1.0);

    // Margin subsampling with token counts from the emitted text columns.
    let margin = run_ok(&[
        "margin-subsample",
        "--pairs",
        &path_str(d, "sent_pairs.tsv"),
        "--src-emb",
        &path_str(d, "src.emb"),
        "--tgt-emb",
        &path_str(d, "tgt.emb"),
        "--dim",
        "24",
        "--budget",
        "60",
        "--out",
        &path_str(d, "subsample.tsv"),
    ]);
    let words = margin["target_words"].as_u64().unwrap();
    assert!(words >= 60, "budget not reached: {words}");
    let selected = margin["selected"].as_u64().unwrap();
    assert!(selected > 0 && selected < 120);

    // Same subsample with counts from the corpus must agree on the pair set.
    run_ok(&[
        "margin-subsample",
        "--pairs",
        &path_str(d, "sent_pairs.tsv"),
        "--src-emb",
        &path_str(d, "src.emb"),
        "--tgt-emb",
        &path_str(d, "tgt.emb"),
        "--dim",
        "24",
        "--budget",
        "60",
        "--tgt",
        &path_str(d, "tgt.jsonl"),
        "--min-chars",
        "0",
        "--out",
        &path_str(d, "subsample_corpus.tsv"),
    ]);
    assert_eq!(
        std::fs::read(d.join("subsample.tsv")).unwrap(),
        std::fs::read(d.join("subsample_corpus.tsv")).unwrap()
    );
}

#[test]
fn doc_output_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_ok(&[
        "synth",
        "--docs",
        "20",
        "--sents",
        "4",
        "--dim",
        "16",
        "--sigma",
        "0.05",
        "--seed",
        "3",
        "--out-dir",
        &d.display().to_string(),
    ]);
    for (threads, out) in [("1", "a.tsv"), ("8", "b.tsv"), ("1", "c.tsv")] {
        run_ok(&[
            "doc",
            "--threads",
            threads,
            "--src",
            &path_str(d, "src.jsonl"),
            "--tgt",
            &path_str(d, "tgt.jsonl"),
            "--src-emb",
            &path_str(d, "src.emb"),
            "--tgt-emb",
            &path_str(d, "tgt.emb"),
            "--dim",
            "16",
            "--min-chars",
            "0",
            "--scheme",
            "slidf",
            "--out",
            &path_str(d, out),
        ]);
    }
    let a = std::fs::read(d.join("a.tsv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(d.join("b.tsv")).unwrap());
    assert_eq!(a, std::fs::read(d.join("c.tsv")).unwrap());
}

#[test]
fn build_lexicon_subtracts_words_from_glossary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("glossary.tsv"),
        "quick brown fox\tsnabb brun rav\nhello\thej\n",
    )
    .unwrap();
    std::fs::write(d.join("words.tsv"), "quick\tsnabb\nfox\trav\n").unwrap();
    let summary = run_ok(&[
        "build-lexicon",
        "--glossary",
        &path_str(d, "glossary.tsv"),
        "--words",
        &path_str(d, "words.tsv"),
        "--out",
        &path_str(d, "improved.tsv"),
    ]);
    assert_eq!(summary["new_entries"], 2);
    let improved = std::fs::read_to_string(d.join("improved.tsv")).unwrap();
    assert!(improved.contains("brown\tbrun"));
    assert!(improved.contains("hello\thej"));
    assert!(improved.contains("quick\tsnabb"));
}

#[test]
fn exit_codes_distinguish_usage_and_data_errors() {
    // Unknown flag: usage error, exit 1.
    let usage = run_expect_failure(&["doc", "--definitely-not-a-flag"]);
    assert_eq!(usage.status.code(), Some(1));

    // Missing input file: data error, exit 2, path in the message.
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = run_expect_failure(&[
        "doc",
        "--src",
        &path_str(d, "missing.jsonl"),
        "--tgt",
        &path_str(d, "missing.jsonl"),
        "--src-emb",
        &path_str(d, "missing.emb"),
        "--tgt-emb",
        &path_str(d, "missing.emb"),
        "--scheme",
        "slen",
        "--out",
        &path_str(d, "out.tsv"),
    ]);
    assert_eq!(data.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&data.stderr);
    assert!(stderr.contains("missing.jsonl"), "stderr: {stderr}");

    // Help exits 0.
    let help = run_expect_failure(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn eval_reports_partial_recall() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("gold.tsv"), "a\t1\nb\t2\nc\t3\nd\t4\n").unwrap();
    std::fs::write(d.join("pred.tsv"), "a\t1\nb\t2\nc\t3\nx\t9\ny\t8\n").unwrap();
    let summary = run_ok(&[
        "eval",
        "--task",
        "document",
        "--pred",
        &path_str(d, "pred.tsv"),
        "--gold",
        &path_str(d, "gold.tsv"),
    ]);
    assert_eq!(summary["hits"], 3);
    assert_eq!(summary["recall"], 0.75);
}
