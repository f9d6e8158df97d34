//! Acceptance checks, one test per criterion, each ending in a single
//! PASS line with the measured numbers.
//!
//! The first six run on synthetic data in seconds to minutes with no
//! external resources. The last three reproduce full-scale corpus numbers
//! and need the licensed PDTB corpus plus full-size trained models, so
//! they are `#[ignore]`d and read their inputs from environment variables
//! (see each test's message for setup).

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use disclabel::classifier::{ClassifierConfig, Task, TrainedClassifier};
use disclabel::corpus::{load_conll_corpus, Document, Relation, TokenSpan};
use disclabel::evaluation::{
    aggregate, evaluate, filter_arg2_first, filter_discontinuous, match_relations, score,
    ScoreReport,
};
use disclabel::labeling::{
    decode_argument_tags, decode_connective_tags, encode_argument_tags, encode_connective_tags,
    extract_window, ConnTag, DEFAULT_WINDOW_SIZE,
};
use disclabel::pipeline::{Pipeline, PipelineConfig};
use disclabel::synth::{
    grammar_corpus, perturb_relations, random_corpus, GoldArgumentTagger, GoldConnectiveTagger,
    GrammarOptions, PerturbOptions, RandomOptions,
};

fn pass(number: u32, name: &str, detail: String) {
    println!("criterion {number} ({name}): PASS - {detail}");
}

/// Criterion 1: encoding a relation into per-token tags and decoding the
/// tags back recovers the connective span exactly and the argument spans
/// up to window restriction, over randomized relations that include
/// discontinuous arguments and 1-3-token connectives.
#[test]
fn label_encode_decode_round_trips() {
    let corpus = random_corpus(&RandomOptions {
        n_documents: 400,
        tokens_per_document: (40, 160),
        relations_per_document: (1, 5),
        max_connective_len: 3,
        max_argument_len: 6,
        discontinuous_fraction: 0.35,
        mean_paragraph_len: 40,
        seed: 424_242,
    })
    .expect("corpus generates");
    assert!(
        corpus.relations.len() >= 1000,
        "need at least 1,000 relations, generated {}",
        corpus.relations.len()
    );

    let mut n_connective_checks = 0usize;
    for doc in &corpus.documents {
        let gold_in_doc: Vec<&Relation> = corpus
            .relations
            .iter()
            .filter(|r| r.doc_id == doc.doc_id)
            .collect();
        for paragraph in doc.paragraphs() {
            let sequence = encode_connective_tags(doc, paragraph, &corpus.relations)
                .expect("paragraph encodes");
            let decoded: BTreeSet<TokenSpan> =
                decode_connective_tags(&sequence.tags, paragraph.lo)
                    .into_iter()
                    .collect();
            let expected: BTreeSet<TokenSpan> = gold_in_doc
                .iter()
                .filter(|r| {
                    r.connective
                        .first()
                        .is_some_and(|f| f >= paragraph.lo && f < paragraph.hi)
                })
                .map(|r| r.connective.clone())
                .collect();
            assert_eq!(
                decoded, expected,
                "connective round-trip failed in {} paragraph {}..{}",
                doc.doc_id, paragraph.lo, paragraph.hi
            );
            n_connective_checks += expected.len();
        }
    }

    let mut n_argument_checks = 0usize;
    for rel in &corpus.relations {
        let doc = corpus.document(&rel.doc_id).expect("document exists");
        let window =
            extract_window(doc, &rel.connective, DEFAULT_WINDOW_SIZE).expect("window extracts");
        let sequence = encode_argument_tags(&window, rel);
        let (arg1, arg2) = decode_argument_tags(&sequence.tags, &window);
        assert_eq!(
            arg1,
            rel.arg1.restrict(window.lo, window.hi),
            "arg1 round-trip failed for {}",
            rel.relation_id
        );
        assert_eq!(
            arg2,
            rel.arg2.restrict(window.lo, window.hi),
            "arg2 round-trip failed for {}",
            rel.relation_id
        );
        n_argument_checks += 1;
    }

    pass(
        1,
        "label round-trips",
        format!(
            "{n_connective_checks} connective and {n_argument_checks} argument spans recovered exactly"
        ),
    );
}

/// Reference segmenter for criterion 2, written directly from the decoding
/// rule: a single-word connective tag is a span of its own; a maximal block
/// of consecutive multiword tags forms one span.
fn brute_force_connective_spans(tags: &[ConnTag], offset: usize) -> Vec<TokenSpan> {
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        match tags[i] {
            ConnTag::None => i += 1,
            ConnTag::Conn => {
                spans.push(TokenSpan::from_range(offset + i..offset + i + 1));
                i += 1;
            }
            ConnTag::MwConn => {
                let start = i;
                while i < tags.len() && tags[i] == ConnTag::MwConn {
                    i += 1;
                }
                spans.push(TokenSpan::from_range(offset + start..offset + i));
            }
        }
    }
    spans
}

/// Criterion 2: the production decoder agrees with the brute-force
/// segmenter on every tag string of length 1 through 6 (3^1 + ... + 3^6 =
/// 1,092 strings), at offset zero and at a nonzero offset.
#[test]
fn connective_decoder_matches_brute_force_segmenter() {
    let variants = [ConnTag::None, ConnTag::Conn, ConnTag::MwConn];
    let mut n_strings = 0usize;
    for len in 1..=6usize {
        for code in 0..3usize.pow(len as u32) {
            let mut tags = Vec::with_capacity(len);
            let mut rest = code;
            for _ in 0..len {
                tags.push(variants[rest % 3]);
                rest /= 3;
            }
            for offset in [0, 3] {
                assert_eq!(
                    decode_connective_tags(&tags, offset),
                    brute_force_connective_spans(&tags, offset),
                    "decoder disagrees on {tags:?} at offset {offset}"
                );
            }
            n_strings += 1;
        }
    }
    assert_eq!(n_strings, 1092);
    pass(
        2,
        "connective decoder semantics",
        format!("{n_strings} tag strings segmented identically at two offsets"),
    );
}

/// Matched-component counts: (connective, both-args, arg1, arg2).
type Counts = (u32, u32, u32, u32);

/// Exhaustive assignment oracle for criterion 3: tries every one-to-one
/// partial pairing of predictions to golds with identical connective token
/// sets and returns the lexicographic maximum of (pairs, both-args-exact,
/// arg1-exact, arg2-exact).
fn oracle_assignment(preds: &[Relation], golds: &[Relation]) -> Counts {
    fn go(
        p: usize,
        preds: &[Relation],
        golds: &[Relation],
        used: &mut [bool],
        current: Counts,
        best: &mut Counts,
    ) {
        if p == preds.len() {
            *best = (*best).max(current);
            return;
        }
        go(p + 1, preds, golds, used, current, best);
        for g in 0..golds.len() {
            if used[g] || preds[p].connective != golds[g].connective {
                continue;
            }
            used[g] = true;
            let arg1 = preds[p].arg1 == golds[g].arg1;
            let arg2 = preds[p].arg2 == golds[g].arg2;
            let next = (
                current.0 + 1,
                current.1 + u32::from(arg1 && arg2),
                current.2 + u32::from(arg1),
                current.3 + u32::from(arg2),
            );
            go(p + 1, preds, golds, used, next, best);
            used[g] = false;
        }
    }
    let mut best = (0, 0, 0, 0);
    let mut used = vec![false; golds.len()];
    go(0, preds, golds, &mut used, (0, 0, 0, 0), &mut best);
    best
}

/// Criterion 3: on 500 randomized documents holding at most 6 relations
/// each, the matcher's true-positive counts equal the exhaustive oracle's,
/// in under a minute.
#[test]
fn matcher_tp_counts_equal_exhaustive_assignment_oracle() {
    let started = Instant::now();
    let corpus = random_corpus(&RandomOptions {
        n_documents: 500,
        relations_per_document: (0, 6),
        seed: 97,
        ..RandomOptions::default()
    })
    .expect("corpus generates");
    let predictions = perturb_relations(
        &corpus,
        &PerturbOptions {
            seed: 1097,
            ..PerturbOptions::default()
        },
    );

    let mut by_doc: BTreeMap<&str, (Vec<Relation>, Vec<Relation>)> = BTreeMap::new();
    for doc in &corpus.documents {
        by_doc.insert(&doc.doc_id, (Vec::new(), Vec::new()));
    }
    for pred in &predictions {
        by_doc.get_mut(pred.doc_id.as_str()).unwrap().0.push(pred.clone());
    }
    for gold in &corpus.relations {
        by_doc.get_mut(gold.doc_id.as_str()).unwrap().1.push(gold.clone());
    }

    let mut n_docs = 0usize;
    let mut total_pairs = 0u32;
    for (doc_id, (preds, golds)) in &by_doc {
        assert!(golds.len() <= 6, "{doc_id} has more than 6 gold relations");
        let result = match_relations(preds, golds).expect("matching succeeds");
        let report = score(&result);
        let matched = (
            report.connective.true_positives as u32,
            report.arg1_arg2.true_positives as u32,
            report.arg1.true_positives as u32,
            report.arg2.true_positives as u32,
        );
        let oracle = oracle_assignment(preds, golds);
        assert_eq!(
            matched, oracle,
            "matcher is suboptimal on {doc_id}: matcher {matched:?} vs oracle {oracle:?}"
        );
        total_pairs += oracle.0;
        n_docs += 1;
    }

    let elapsed = started.elapsed();
    assert_eq!(n_docs, 500);
    assert!(
        elapsed.as_secs() < 60,
        "oracle comparison took {elapsed:?}, budget is one minute"
    );
    pass(
        3,
        "scorer oracle",
        format!(
            "matcher equals the exhaustive oracle on {n_docs} documents ({total_pairs} pairs) in {:.1}s",
            elapsed.as_secs_f64()
        ),
    );
}

/// Criterion 4: scorer identities. Scoring a prediction set against itself
/// yields F = 100.00 everywhere; an empty prediction set yields F = 0; and
/// the combined-argument F never exceeds either single-argument F across
/// 1,000 randomized perturbations.
#[test]
fn scorer_identities_hold() {
    let corpus = grammar_corpus(&GrammarOptions::lexical(40, 13)).expect("corpus generates");
    let gold = &corpus.relations;
    assert!(!gold.is_empty());

    let perfect = evaluate(gold, gold).expect("self-evaluation succeeds");
    for (name, component) in perfect.components() {
        assert_eq!(component.f1, 1.0, "{name} F1 should be exactly 100.00");
        assert_eq!(component.precision, 1.0);
        assert_eq!(component.recall, 1.0);
    }

    let empty = evaluate(&[], gold).expect("empty evaluation succeeds");
    for (name, component) in empty.components() {
        assert_eq!(component.f1, 0.0, "{name} F1 should be exactly 0");
        assert_eq!(component.true_positives, 0);
    }

    let mut n_perturbations = 0usize;
    for seed in 0..1000u64 {
        let perturbed = perturb_relations(&corpus, &PerturbOptions {
            seed,
            ..PerturbOptions::default()
        });
        let report = evaluate(&perturbed, gold).expect("evaluation succeeds");
        assert!(
            report.arg1_arg2.f1 <= report.arg1.f1 && report.arg1_arg2.f1 <= report.arg2.f1,
            "seed {seed}: joint F {:.4} exceeds arg F ({:.4}, {:.4})",
            report.arg1_arg2.f1,
            report.arg1.f1,
            report.arg2.f1
        );
        n_perturbations += 1;
    }

    pass(
        4,
        "scorer identities",
        format!(
            "self-score 100.00, empty-score 0, joint <= min(arg1, arg2) on {n_perturbations} perturbations"
        ),
    );
}

/// Window bounds as documented for the argument stage: centered on the
/// connective's first token, clipped to the document, never shifted.
fn window_bounds(center: usize, window_size: usize, n_tokens: usize) -> (usize, usize) {
    let lo = center.saturating_sub(window_size / 2);
    let hi = (center + window_size / 2).max(center + 1).min(n_tokens);
    (lo, hi)
}

/// Criterion 5: with classifier stubs that emit gold tags, the pipeline
/// returns exactly the gold relations whose arguments fit their windows,
/// and that ceiling equals a direct window-coverage count.
#[test]
fn gold_stub_pipeline_reaches_window_coverage_ceiling() {
    let options = GrammarOptions {
        n_documents: 80,
        far_arg_fraction: 0.4,
        seed: 31,
        ..GrammarOptions::default()
    };
    let corpus = grammar_corpus(&options).expect("corpus generates");

    // Direct count, written out from the window rule rather than taken
    // from the generator's bookkeeping.
    let mut covered: BTreeSet<(String, TokenSpan, TokenSpan, TokenSpan)> = BTreeSet::new();
    for rel in &corpus.relations {
        let doc = corpus.document(&rel.doc_id).expect("document exists");
        let center = rel.connective.first().expect("connective nonempty");
        let (lo, hi) = window_bounds(center, options.window_size, doc.len());
        let fits = |span: &TokenSpan| span.iter().all(|i| i >= lo && i < hi);
        if fits(&rel.arg1) && fits(&rel.arg2) {
            covered.insert((
                rel.doc_id.clone(),
                rel.connective.clone(),
                rel.arg1.clone(),
                rel.arg2.clone(),
            ));
        }
    }
    assert!(
        covered.len() < corpus.relations.len(),
        "the far-argument fraction should leave some relations uncovered"
    );

    let connective_stub = GoldConnectiveTagger::new(&corpus.documents, &corpus.relations);
    let argument_stub = GoldArgumentTagger::new(&corpus.relations);
    let pipeline = Pipeline::new(&connective_stub, &argument_stub, PipelineConfig::default())
        .expect("pipeline builds");

    let mut produced: BTreeSet<(String, TokenSpan, TokenSpan, TokenSpan)> = BTreeSet::new();
    for doc in &corpus.documents {
        for pred in pipeline.label_document(doc).expect("labeling succeeds") {
            produced.insert((pred.doc_id, pred.connective, pred.arg1, pred.arg2));
        }
    }

    assert_eq!(
        produced, covered,
        "gold-stub pipeline output differs from the window-covered gold set"
    );
    assert_eq!(corpus.window_covered(options.window_size), covered.len());
    assert_eq!(corpus.n_window_covered, covered.len());

    pass(
        5,
        "oracle-closure pipeline",
        format!(
            "gold stubs reproduce {} of {} relations; ceiling equals the direct coverage count",
            covered.len(),
            corpus.relations.len()
        ),
    );
}

fn smoke_config(task: Task, seed: u64) -> ClassifierConfig {
    let base = match task {
        Task::Connective => ClassifierConfig::connective(),
        Task::Argument => ClassifierConfig::argument(),
    };
    // Three epochs are fixed by the criterion; the optimizer settings are
    // free, and a small batch buys more steps from the small corpus.
    ClassifierConfig {
        encoder_name: "tiny".into(),
        max_subtoken_length: 64,
        learning_rate: 3e-3,
        epochs: 3,
        batch_size: 4,
        n_runs: 1,
        seed,
        ..base
    }
}

/// Criterion 6: a tiny encoder fine-tuned for 3 epochs on a 200-paragraph
/// synthetic corpus with rule-based connectives reaches connective F >= 95
/// and combined-argument F >= 80 on held-out synthetic data, within 10
/// minutes of CPU time.
#[test]
fn tiny_encoder_learns_synthetic_corpus() {
    let started = Instant::now();
    let train_corpus = grammar_corpus(&GrammarOptions::lexical(200, 77)).expect("train corpus");
    let held_out = grammar_corpus(&GrammarOptions::lexical(60, 78)).expect("held-out corpus");
    let n_paragraphs: usize = train_corpus
        .documents
        .iter()
        .map(|d| d.paragraphs().len())
        .sum();
    assert_eq!(n_paragraphs, 200, "training corpus should be 200 paragraphs");

    let connective_model = disclabel::classifier::train(
        &smoke_config(Task::Connective, 7),
        &train_corpus.connective_training_instances().unwrap(),
    )
    .expect("connective training succeeds");
    let argument_model = disclabel::classifier::train(
        &smoke_config(Task::Argument, 7),
        &train_corpus
            .argument_training_instances(DEFAULT_WINDOW_SIZE)
            .unwrap(),
    )
    .expect("argument training succeeds");

    let pipeline = Pipeline::new(&connective_model, &argument_model, PipelineConfig::default())
        .expect("pipeline builds");
    let mut predicted = Vec::new();
    for doc in &held_out.documents {
        for pred in pipeline.label_document(doc).expect("labeling succeeds") {
            predicted.push(pred.to_relation());
        }
    }
    let report = evaluate(&predicted, &held_out.relations).expect("evaluation succeeds");

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 600,
        "smoke test took {elapsed:?}, budget is 10 minutes"
    );
    assert!(
        report.connective.f1 >= 0.95,
        "connective F {:.4} below 0.95\n{report}",
        report.connective.f1
    );
    assert!(
        report.arg1_arg2.f1 >= 0.80,
        "combined-argument F {:.4} below 0.80\n{report}",
        report.arg1_arg2.f1
    );

    pass(
        6,
        "learnability smoke test",
        format!(
            "connective F {:.2}, combined-argument F {:.2} on held-out data in {:.0}s",
            100.0 * report.connective.f1,
            100.0 * report.arg1_arg2.f1,
            elapsed.as_secs_f64()
        ),
    );
}

fn env_path(var: &str, purpose: &str) -> std::path::PathBuf {
    match std::env::var_os(var) {
        Some(v) => std::path::PathBuf::from(v),
        None => panic!(
            "set {var} to {purpose}; this check needs licensed full-scale data and is skipped by default"
        ),
    }
}

/// Loads the corpus split named by a pair of environment variables.
fn env_corpus(docs_var: &str, rels_var: &str) -> (Vec<Document>, Vec<Relation>) {
    let docs = env_path(docs_var, "the tokenized documents JSONL of the split");
    let rels = env_path(rels_var, "the gold relations JSONL of the split");
    load_conll_corpus(docs, rels).expect("corpus loads")
}

/// Runs the full pipeline with one trained model pair over every document.
fn score_model_pair(
    models: &std::path::Path,
    seed_dir: &str,
    documents: &[Document],
    gold: &[Relation],
) -> ScoreReport {
    let connective = TrainedClassifier::load(models.join("connective").join(seed_dir))
        .expect("connective model loads");
    let argument = TrainedClassifier::load(models.join("argument").join(seed_dir))
        .expect("argument model loads");
    let pipeline = Pipeline::new(&connective, &argument, PipelineConfig::default())
        .expect("pipeline builds");
    let mut predicted = Vec::new();
    for doc in documents {
        for pred in pipeline.label_document(doc).expect("labeling succeeds") {
            predicted.push(pred.to_relation());
        }
    }
    evaluate(&predicted, gold).expect("evaluation succeeds")
}

fn seed_dirs(models: &std::path::Path) -> Vec<String> {
    let mut seeds: Vec<String> = std::fs::read_dir(models.join("connective"))
        .expect("connective model directory lists")
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    seeds.sort();
    seeds
}

/// Criterion 7: span statistics over the full training split reproduce the
/// reference counts exactly: 6231/12243/13810/14240/14617 relations under
/// the 25/50/75/100/250-token thresholds, mean extent 36.79, and 84.94%
/// of relations inside one paragraph.
#[test]
#[ignore = "needs the licensed PDTB training split (set DISCLABEL_PDTB_DOCS / DISCLABEL_PDTB_RELATIONS)"]
fn pdtb_train_split_span_statistics() {
    let (documents, relations) = env_corpus("DISCLABEL_PDTB_DOCS", "DISCLABEL_PDTB_RELATIONS");
    let stats =
        disclabel::corpus::compute_span_stats(&relations, &documents, &[25, 50, 75, 100, 250])
            .expect("stats compute");

    let counts: Vec<usize> = stats.rows.iter().map(|r| r.n_relations).collect();
    assert_eq!(counts, vec![6231, 12243, 13810, 14240, 14617]);
    assert!(
        (stats.mean_span_length - 36.79).abs() < 0.005,
        "mean span length {:.4} should round to 36.79",
        stats.mean_span_length
    );
    let same_paragraph =
        100.0 * disclabel::corpus::same_paragraph_fraction(&relations, &documents).unwrap();
    assert!(
        (same_paragraph - 84.94).abs() < 0.005,
        "same-paragraph share {same_paragraph:.4} should round to 84.94"
    );
    pass(
        7,
        "full-scale span statistics",
        format!(
            "counts {counts:?}, mean {:.2}, same-paragraph {same_paragraph:.2}%",
            stats.mean_span_length
        ),
    );
}

/// Criterion 8: the full pipeline averaged over four seeds reaches
/// Conn F 96.77 +/- 1.0, Arg1 F 60.12 +/- 1.5, Arg2 F 80.50 +/- 1.5 and
/// combined F 53.28 +/- 1.5 on the test split.
#[test]
#[ignore = "needs the licensed PDTB test split and four trained full-size model pairs (set DISCLABEL_PDTB_TEST_DOCS / DISCLABEL_PDTB_TEST_RELATIONS / DISCLABEL_PDTB_MODELS)"]
fn pdtb_test_split_pipeline_scores() {
    let (documents, gold) =
        env_corpus("DISCLABEL_PDTB_TEST_DOCS", "DISCLABEL_PDTB_TEST_RELATIONS");
    let models = env_path(
        "DISCLABEL_PDTB_MODELS",
        "a directory holding connective/<seed>/ and argument/<seed>/ trained models",
    );
    let seeds = seed_dirs(&models);
    assert_eq!(seeds.len(), 4, "expected four seeds, found {seeds:?}");

    let reports: Vec<ScoreReport> = seeds
        .iter()
        .map(|seed| score_model_pair(&models, seed, &documents, &gold))
        .collect();
    let summary = aggregate(&reports).expect("aggregation succeeds");

    for (name, mean, target, tolerance) in [
        ("connective", 100.0 * summary.connective.mean_f1, 96.77, 1.0),
        ("arg1", 100.0 * summary.arg1.mean_f1, 60.12, 1.5),
        ("arg2", 100.0 * summary.arg2.mean_f1, 80.50, 1.5),
        ("arg1+arg2", 100.0 * summary.arg1_arg2.mean_f1, 53.28, 1.5),
    ] {
        assert!(
            (mean - target).abs() <= tolerance,
            "{name} mean F {mean:.2} outside {target} +/- {tolerance}"
        );
    }
    pass(
        8,
        "full-scale pipeline scores",
        format!(
            "mean F over {} seeds: conn {:.2}, arg1 {:.2}, arg2 {:.2}, joint {:.2}",
            summary.n_runs,
            100.0 * summary.connective.mean_f1,
            100.0 * summary.arg1.mean_f1,
            100.0 * summary.arg2.mean_f1,
            100.0 * summary.arg1_arg2.mean_f1
        ),
    );
}

/// Criterion 9: subset analyses on the test split. The discontinuity
/// filter selects 93 gold relations; combined-argument F averaged over the
/// four seeds lands near 75.6 on the Arg2-first subset and near 14.7 on
/// the discontinuous subset.
#[test]
#[ignore = "needs the licensed PDTB test split and four trained full-size model pairs (set DISCLABEL_PDTB_TEST_DOCS / DISCLABEL_PDTB_TEST_RELATIONS / DISCLABEL_PDTB_MODELS)"]
fn pdtb_test_split_subset_scores() {
    let (documents, gold) =
        env_corpus("DISCLABEL_PDTB_TEST_DOCS", "DISCLABEL_PDTB_TEST_RELATIONS");
    let models = env_path(
        "DISCLABEL_PDTB_MODELS",
        "a directory holding connective/<seed>/ and argument/<seed>/ trained models",
    );

    let discontinuous_gold = filter_discontinuous(&gold);
    assert_eq!(
        discontinuous_gold.len(),
        93,
        "discontinuity filter should select 93 gold relations"
    );

    let seeds = seed_dirs(&models);
    let mut arg2_first_f = Vec::new();
    let mut discontinuous_f = Vec::new();
    for seed in &seeds {
        let connective = TrainedClassifier::load(models.join("connective").join(seed))
            .expect("connective model loads");
        let argument = TrainedClassifier::load(models.join("argument").join(seed))
            .expect("argument model loads");
        let pipeline = Pipeline::new(&connective, &argument, PipelineConfig::default())
            .expect("pipeline builds");
        let mut predicted = Vec::new();
        for doc in &documents {
            for pred in pipeline.label_document(doc).expect("labeling succeeds") {
                predicted.push(pred.to_relation());
            }
        }
        let arg2_first = evaluate(&filter_arg2_first(&predicted), &filter_arg2_first(&gold))
            .expect("subset evaluation succeeds");
        arg2_first_f.push(100.0 * arg2_first.arg1_arg2.f1);
        let discontinuous = evaluate(&filter_discontinuous(&predicted), &discontinuous_gold)
            .expect("subset evaluation succeeds");
        discontinuous_f.push(100.0 * discontinuous.arg1_arg2.f1);
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let arg2_first_mean = mean(&arg2_first_f);
    let discontinuous_mean = mean(&discontinuous_f);
    assert!(
        (arg2_first_mean - 75.6).abs() <= 3.0,
        "arg2-first combined F {arg2_first_mean:.2} outside 75.6 +/- 3"
    );
    assert!(
        (discontinuous_mean - 14.7).abs() <= 3.0,
        "discontinuous combined F {discontinuous_mean:.2} outside 14.7 +/- 3"
    );
    pass(
        9,
        "full-scale subset scores",
        format!(
            "93 discontinuous gold relations; combined F: arg2-first {arg2_first_mean:.2}, discontinuous {discontinuous_mean:.2}"
        ),
    );
}
