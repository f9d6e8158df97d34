//! End-to-end checks of the `disclabel` binary: each test spawns the real
//! executable and inspects its exit code, output files, and manifests.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use disclabel::cli::{RunManifest, StatsSummary};
use disclabel::corpus::{save_documents, save_relations, Document, Relation, TokenSpan};
use disclabel::evaluation::ScoreReport;
use disclabel::pipeline::PredictedRelation;
use disclabel::synth::{grammar_corpus, GrammarOptions};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_disclabel"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary should spawn");
    assert!(
        out.status.success(),
        "command {:?} failed with {:?}\nstdout: {}\nstderr: {}",
        cmd.get_args().collect::<Vec<_>>(),
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read_manifest(path: &Path) -> RunManifest {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("manifest {} unreadable: {e}", path.display()));
    serde_json::from_str(&text).expect("manifest should parse")
}

fn read_jsonl_relations(path: &Path) -> Vec<PredictedRelation> {
    std::fs::read_to_string(path)
        .expect("predictions file should exist")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("prediction line should parse"))
        .collect()
}

/// Writes a small synthetic corpus and returns (docs path, relations path).
fn write_corpus(dir: &Path, n_docs: usize, seed: u64) -> (PathBuf, PathBuf) {
    let corpus = grammar_corpus(&GrammarOptions::lexical(n_docs, seed)).expect("corpus generates");
    let docs = dir.join("docs.jsonl");
    let rels = dir.join("relations.jsonl");
    save_documents(&docs, &corpus.documents).unwrap();
    save_relations(&rels, &corpus.relations).unwrap();
    (docs, rels)
}

#[test]
fn prepare_train_predict_evaluate_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let (docs, rels) = write_corpus(dir, 12, 11);

    for task in ["connective", "argument"] {
        run_ok(bin().args(["prepare", "--task", task]).args([
            "--docs",
            docs.to_str().unwrap(),
            "--relations",
            rels.to_str().unwrap(),
            "--out-dir",
            dir.join("prep").to_str().unwrap(),
        ]));
        let instances = dir.join("prep").join(format!("{task}-instances.jsonl"));
        assert!(instances.is_file(), "{task} instances missing");
        let manifest = read_manifest(&dir.join("prep").join(format!("{task}-manifest.json")));
        assert_eq!(manifest.command, "prepare");
        assert_eq!(manifest.inputs.len(), 2);
        for input in &manifest.inputs {
            assert_eq!(input.sha256.len(), 64, "digest should be hex sha-256");
        }
        assert!(manifest.wall_clock_seconds >= 0.0);
    }

    // One tiny run per task keeps the test fast; quality is irrelevant here.
    for task in ["connective", "argument"] {
        let model_dir = dir.join(format!("models-{task}"));
        run_ok(bin().args(["train", "--task", task]).args([
            "--instances",
            dir.join("prep")
                .join(format!("{task}-instances.jsonl"))
                .to_str()
                .unwrap(),
            "--out-dir",
            model_dir.to_str().unwrap(),
            "--encoder",
            "tiny",
            "--epochs",
            "1",
            "--runs",
            "1",
            "--seed",
            "7",
        ]));
        let seed_dir = model_dir.join("seed-7");
        for file in [
            "config.json",
            "vocab.txt",
            "labels.json",
            "weights.bin",
            "metadata.json",
        ] {
            assert!(seed_dir.join(file).is_file(), "{task} model lacks {file}");
        }
        let manifest = read_manifest(&model_dir.join("manifest.json"));
        assert_eq!(manifest.seeds, vec![7]);
        assert_eq!(manifest.outputs.len(), 1);
    }

    let preds = dir.join("preds.jsonl");
    run_ok(bin().args(["predict"]).args([
        "--docs",
        docs.to_str().unwrap(),
        "--connective-model",
        dir.join("models-connective/seed-7").to_str().unwrap(),
        "--argument-model",
        dir.join("models-argument/seed-7").to_str().unwrap(),
        "--out",
        preds.to_str().unwrap(),
    ]));
    assert!(preds.is_file());
    assert!(dir.join("preds-manifest.json").is_file());
    for p in read_jsonl_relations(&preds) {
        assert!(!p.connective.is_empty(), "predicted connective never empty");
    }

    run_ok(bin().args(["evaluate"]).args([
        "--docs",
        docs.to_str().unwrap(),
        "--gold",
        rels.to_str().unwrap(),
        "--pred",
        preds.to_str().unwrap(),
        "--out-dir",
        dir.join("eval").to_str().unwrap(),
        "--errors",
    ]));
    let report: ScoreReport = serde_json::from_str(
        &std::fs::read_to_string(dir.join("eval/report.json")).unwrap(),
    )
    .unwrap();
    assert!(report.n_gold > 0);
    assert!(dir.join("eval/near_misses.json").is_file());
    assert!(dir.join("eval/connective_errors.json").is_file());
    assert!(dir.join("eval/manifest.json").is_file());
}

#[test]
fn baseline_predict_labels_raw_text_with_char_spans() {
    let tmp = tempfile::tempdir().unwrap();
    let text_path = tmp.path().join("essay.txt");
    let text = "The plan looked sound because the data supported it.\n\n\
                Budgets shrank. As a result teams cut scope.";
    std::fs::write(&text_path, text).unwrap();

    let out = tmp.path().join("preds.jsonl");
    let run = run_ok(bin().args(["predict", "--baseline"]).args([
        "--text",
        text_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("relations predicted"), "stdout: {stdout}");

    let preds = read_jsonl_relations(&out);
    let surfaces: Vec<String> = preds
        .iter()
        .map(|p| {
            let spans = p.char_spans.as_ref().expect("raw text mode sets char spans");
            spans
                .connective
                .iter()
                .map(|s| &text[s.begin..s.end])
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    assert!(
        surfaces.iter().any(|s| s == "because"),
        "expected a \"because\" connective, got {surfaces:?}"
    );
    assert!(
        surfaces.iter().any(|s| s == "As a result"),
        "expected the multiword connective, got {surfaces:?}"
    );
    // Document ids come from the file stem.
    assert!(preds.iter().all(|p| p.doc_id == "essay"));
}

#[test]
fn evaluate_rejects_predictions_for_unknown_documents() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let (docs, rels) = write_corpus(dir, 3, 5);

    let stray = Relation {
        relation_id: "stray-1".into(),
        doc_id: "no-such-doc".into(),
        connective: TokenSpan::from_range(0..1),
        arg1: TokenSpan::from_range(1..2),
        arg2: TokenSpan::from_range(2..3),
        sense: None,
    };
    let preds = dir.join("preds.jsonl");
    save_relations(&preds, &[stray]).unwrap();

    let out = bin()
        .args(["evaluate"])
        .args([
            "--docs",
            docs.to_str().unwrap(),
            "--gold",
            rels.to_str().unwrap(),
            "--pred",
            preds.to_str().unwrap(),
            "--out-dir",
            dir.join("eval").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(7), "evaluation errors exit with 7");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no-such-doc"), "stderr: {stderr}");
}

#[test]
fn missing_model_directory_reports_expected_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let (docs, _) = write_corpus(tmp.path(), 2, 3);

    let out = bin()
        .args(["predict"])
        .args([
            "--docs",
            docs.to_str().unwrap(),
            "--connective-model",
            "/no/such/model",
            "--argument-model",
            "/no/such/other",
            "--out",
            tmp.path().join("p.jsonl").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(6), "model errors exit with 6");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("config.json"), "stderr: {stderr}");
}

#[test]
fn relative_model_paths_resolve_under_the_model_dir_env_var() {
    let tmp = tempfile::tempdir().unwrap();
    let (docs, _) = write_corpus(tmp.path(), 2, 3);
    // An empty directory under the base: resolution succeeds, loading then
    // fails on the missing config file inside the resolved path, which
    // proves the env var was consulted.
    let base = tmp.path().join("models");
    std::fs::create_dir_all(base.join("conn")).unwrap();

    let out = bin()
        .env("DISCLABEL_MODEL_DIR", &base)
        .args(["predict"])
        .args([
            "--docs",
            docs.to_str().unwrap(),
            "--connective-model",
            "conn",
            "--argument-model",
            "conn",
            "--out",
            tmp.path().join("p.jsonl").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let resolved = base.join("conn").join("config.json");
    assert!(
        stderr.contains(resolved.to_str().unwrap()),
        "stderr should name the resolved path: {stderr}"
    );
}

#[test]
fn usage_errors_exit_with_two_and_help_with_zero() {
    let no_input = bin().args(["predict", "--baseline"]).output().unwrap();
    assert_eq!(no_input.status.code(), Some(2), "missing --docs/--text");

    let unknown = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(2));

    let conflicting = bin()
        .args([
            "predict",
            "--baseline",
            "--connective-model",
            "x",
            "--docs",
            "d.jsonl",
            "--out",
            "o.jsonl",
        ])
        .output()
        .unwrap();
    assert_eq!(conflicting.status.code(), Some(2), "baseline conflicts with models");

    let help = bin().args(["--help"]).output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("predict"));
}

#[test]
fn stats_summarizes_span_lengths_and_shape_fractions() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let (docs, rels) = write_corpus(dir, 30, 21);

    let out_json = dir.join("stats.json");
    let run = run_ok(bin().args(["stats"]).args([
        "--docs",
        docs.to_str().unwrap(),
        "--relations",
        rels.to_str().unwrap(),
        "--out",
        out_json.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("same-paragraph"), "stdout: {stdout}");
    assert!(stdout.contains("arg2-before-arg1"), "stdout: {stdout}");

    let summary: StatsSummary =
        serde_json::from_str(&std::fs::read_to_string(&out_json).unwrap()).unwrap();
    assert!(summary.n_relations > 0);
    assert!(summary.spans.mean_span_length > 0.0);
    assert!((0.0..=100.0).contains(&summary.arg2_first_percent));
    assert!((0.0..=100.0).contains(&summary.same_paragraph_percent));
    assert!(dir.join("stats-manifest.json").is_file());
}

#[test]
fn subset_evaluation_filters_both_sides() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    let doc = Document::from_raw_text("d1", "alpha beta gamma delta because epsilon zeta eta")
        .unwrap();
    // One arg2-first relation (arg2 strictly before arg1) and one regular.
    let arg2_first = Relation {
        relation_id: "g1".into(),
        doc_id: "d1".into(),
        connective: TokenSpan::from_range(4..5),
        arg1: TokenSpan::from_range(5..7),
        arg2: TokenSpan::from_range(0..2),
        sense: None,
    };
    let regular = Relation {
        relation_id: "g2".into(),
        doc_id: "d1".into(),
        connective: TokenSpan::from_range(4..5),
        arg1: TokenSpan::from_range(2..4),
        arg2: TokenSpan::from_range(5..6),
        sense: None,
    };
    let docs = dir.join("docs.jsonl");
    let gold = dir.join("gold.jsonl");
    let pred = dir.join("pred.jsonl");
    save_documents(&docs, &[doc]).unwrap();
    save_relations(&gold, &[arg2_first.clone(), regular.clone()]).unwrap();
    let mut p1 = arg2_first;
    p1.relation_id = "p1".into();
    let mut p2 = regular;
    p2.relation_id = "p2".into();
    save_relations(&pred, &[p1, p2]).unwrap();

    let run = run_ok(bin().args(["evaluate", "--subset", "arg2-first"]).args([
        "--docs",
        docs.to_str().unwrap(),
        "--gold",
        gold.to_str().unwrap(),
        "--pred",
        pred.to_str().unwrap(),
        "--out-dir",
        dir.join("eval").to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(
        stdout.contains("kept 1/2 predicted and 1/2 gold"),
        "stdout: {stdout}"
    );
    let report: ScoreReport = serde_json::from_str(
        &std::fs::read_to_string(dir.join("eval/report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report.n_gold, 1);
    assert_eq!(report.n_predicted, 1);
    // Identical pred and gold in the subset: perfect scores.
    assert_eq!(report.arg1_arg2.true_positives, 1);
}
