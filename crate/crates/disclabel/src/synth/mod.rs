//! Synthetic corpora with gold relation annotations.
//!
//! Two generators cover different testing needs. [`grammar_corpus`] builds
//! documents from a small clause grammar whose tags follow the word pools,
//! so a fresh model can actually learn the tasks and window coverage is
//! controlled exactly (an argument is either fully inside or fully outside
//! its extraction window, never partial). [`random_corpus`] places
//! unconstrained, possibly discontinuous spans for round-trip and scorer
//! stress tests. [`perturb_relations`] derives noisy "predictions" from a
//! gold set, and the gold oracles replay reference tags through the
//! [`TokenClassifier`] interface so the pipeline can run without a trained
//! model.

use std::collections::HashMap;

use rand::prelude::*;
use rand::rngs::StdRng;

use crate::classifier::{Task, TokenClassifier, TrainingInstance};
use crate::corpus::{Document, Paragraph, Relation, TokenSpan};
use crate::error::{Error, Result};
use crate::labeling::{
    argument_instances, connective_instances, encode_argument_tags, encode_connective_tags,
    ArgTag, ConnTag, SegmentRef, Window, DEFAULT_WINDOW_SIZE,
};

/// Words that fill the first argument, position by position. The head pool
/// maps to `ARG1-B`, the other two to `ARG1-I`, and no word appears in any
/// other pool, so the tag of a word is decidable from its surface alone.
const ARG1_HEADS: &[&str] = &["alice", "marcus", "nadia", "victor", "priya", "ethan"];
const ARG1_VERBS: &[&str] = &["praised", "warned", "funded", "audited", "hired", "briefed"];
const ARG1_TAILS: &[&str] = &["engineers", "auditors", "vendors", "tenants", "interns", "clients"];

/// Second-argument pools, disjoint from everything above.
const ARG2_HEADS: &[&str] = &["markets", "prices", "sales", "profits", "exports", "returns"];
const ARG2_VERBS: &[&str] = &["rose", "fell", "stalled", "rallied", "slipped", "surged"];
const ARG2_TAILS: &[&str] = &["sharply", "briefly", "overnight", "abroad", "locally", "twice"];

/// Neutral words tagged `NONE` everywhere.
const FILLER: &[&str] = &[
    "meanwhile",
    "overall",
    "reportedly",
    "apparently",
    "indeed",
    "notably",
    "elsewhere",
    "still",
];

/// Connective surfaces. These words never occur outside a connective.
const SINGLE_CONNECTIVES: &[&str] = &["because", "although", "unless", "whereas"];
const MULTI_CONNECTIVES: &[&[&str]] = &[
    &["as", "a", "result"],
    &["on", "the", "other", "hand"],
    &["in", "other", "words"],
];

/// A generated document set with its gold relations and the construction
/// counts tests check against.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub documents: Vec<Document>,
    pub relations: Vec<Relation>,
    /// Relations whose argument spans both lie entirely inside the
    /// extraction window around their connective, counted at generation
    /// time (not re-derived from the spans).
    pub n_window_covered: usize,
    /// Relations whose whole second argument precedes the first.
    pub n_arg2_first: usize,
}

impl SynthCorpus {
    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }

    /// Counts relations with both arguments inside their window by direct
    /// index arithmetic, independent of any decoder.
    pub fn window_covered(&self, window_size: usize) -> usize {
        let lengths: HashMap<&str, usize> = self
            .documents
            .iter()
            .map(|d| (d.doc_id.as_str(), d.len()))
            .collect();
        let half = window_size / 2;
        self.relations
            .iter()
            .filter(|rel| {
                let (Some(center), Some(&n)) =
                    (rel.connective.first(), lengths.get(rel.doc_id.as_str()))
                else {
                    return false;
                };
                let lo = center.saturating_sub(half);
                let hi = (center + half).max(center + 1).min(n);
                let inside = |span: &TokenSpan| {
                    span.first().is_some_and(|f| f >= lo) && span.last().is_some_and(|l| l < hi)
                };
                inside(&rel.arg1) && inside(&rel.arg2)
            })
            .count()
    }

    /// One connective-task training instance per paragraph, with owned
    /// words, ready for the trainer.
    pub fn connective_training_instances(&self) -> Result<Vec<TrainingInstance<ConnTag>>> {
        let mut out = Vec::new();
        for doc in &self.documents {
            for seq in connective_instances(doc, &self.relations)? {
                let words = seq.words(doc).iter().map(|w| w.to_string()).collect();
                out.push(TrainingInstance::new(words, seq.tags)?);
            }
        }
        Ok(out)
    }

    /// One argument-task training instance per relation window.
    pub fn argument_training_instances(
        &self,
        window_size: usize,
    ) -> Result<Vec<TrainingInstance<ArgTag>>> {
        let mut out = Vec::new();
        for doc in &self.documents {
            for seq in argument_instances(doc, &self.relations, window_size)? {
                let words = seq.words(doc).iter().map(|w| w.to_string()).collect();
                out.push(TrainingInstance::new(words, seq.tags)?);
            }
        }
        Ok(out)
    }
}

/// Knobs for the clause-grammar generator.
#[derive(Debug, Clone)]
pub struct GrammarOptions {
    pub n_documents: usize,
    /// Inclusive range of paragraphs per document.
    pub paragraphs_per_document: (usize, usize),
    /// Inclusive range of sentences per paragraph.
    pub sentences_per_paragraph: (usize, usize),
    /// Probability that a sentence carries a relation.
    pub relation_fraction: f64,
    /// Probability that a relation's connective is multiword.
    pub multiword_fraction: f64,
    /// Probability that a relation sentence is connective-initial, putting
    /// the whole second argument before the first.
    pub arg2_first_fraction: f64,
    /// Probability that a relation's first argument is pushed entirely
    /// outside the extraction window by inserted filler.
    pub far_arg_fraction: f64,
    /// Window size the far-argument placement is computed against.
    pub window_size: usize,
    /// Cap on relations per document; `None` means unlimited.
    pub max_relations_per_document: Option<usize>,
    pub seed: u64,
}

impl Default for GrammarOptions {
    fn default() -> Self {
        GrammarOptions {
            n_documents: 50,
            paragraphs_per_document: (1, 3),
            sentences_per_paragraph: (1, 4),
            relation_fraction: 0.6,
            multiword_fraction: 0.25,
            arg2_first_fraction: 0.2,
            far_arg_fraction: 0.0,
            window_size: DEFAULT_WINDOW_SIZE,
            max_relations_per_document: None,
            seed: 0,
        }
    }
}

impl GrammarOptions {
    /// Single-paragraph documents with at most one relation each, so every
    /// extraction window contains exactly one relation's words. Both tasks
    /// are then decidable from word surfaces alone, which is what the
    /// learnability tests rely on.
    pub fn lexical(n_documents: usize, seed: u64) -> Self {
        GrammarOptions {
            n_documents,
            paragraphs_per_document: (1, 1),
            sentences_per_paragraph: (1, 3),
            relation_fraction: 0.8,
            multiword_fraction: 0.25,
            arg2_first_fraction: 0.2,
            far_arg_fraction: 0.0,
            max_relations_per_document: Some(1),
            ..GrammarOptions::default()
        }
        .with_seed(seed)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_documents == 0 {
            return Err(Error::Config("grammar corpus needs at least one document".into()));
        }
        for (name, (lo, hi)) in [
            ("paragraphs_per_document", self.paragraphs_per_document),
            ("sentences_per_paragraph", self.sentences_per_paragraph),
        ] {
            if lo == 0 || lo > hi {
                return Err(Error::Config(format!("{name} range ({lo}, {hi}) is invalid")));
            }
        }
        for (name, value) in [
            ("relation_fraction", self.relation_fraction),
            ("multiword_fraction", self.multiword_fraction),
            ("arg2_first_fraction", self.arg2_first_fraction),
            ("far_arg_fraction", self.far_arg_fraction),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Config(format!("{name} {value} is outside [0, 1]")));
            }
        }
        // Clause plus longest connective must fit inside a half-window, or
        // the full-coverage guarantee for near arguments breaks.
        if self.window_size / 2 < 8 {
            return Err(Error::Config(format!(
                "window size {} is too small for the clause grammar (need ≥ 16)",
                self.window_size
            )));
        }
        Ok(())
    }
}

/// Accumulates paragraph word lists and hands out document-level indices.
struct Emitter {
    paragraphs: Vec<Vec<String>>,
    count: usize,
}

impl Emitter {
    fn new() -> Self {
        Emitter { paragraphs: vec![Vec::new()], count: 0 }
    }

    fn push(&mut self, word: &str) -> usize {
        let index = self.count;
        self.paragraphs.last_mut().expect("emitter always has a paragraph").push(word.into());
        self.count += 1;
        index
    }

    fn break_paragraph(&mut self) {
        if !self.paragraphs.last().is_some_and(Vec::is_empty) {
            self.paragraphs.push(Vec::new());
        }
    }

    fn into_text(mut self) -> String {
        self.paragraphs.retain(|p| !p.is_empty());
        self.paragraphs
            .iter()
            .map(|p| p.join(" "))
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}

/// Index spans recorded while a relation sentence is emitted.
struct PendingRelation {
    connective: Vec<usize>,
    arg1: Vec<usize>,
    arg2: Vec<usize>,
    arg2_first: bool,
    far: bool,
}

fn pick<'a>(rng: &mut StdRng, pool: &[&'a str]) -> &'a str {
    pool[rng.random_range(0..pool.len())]
}

fn range_sample(rng: &mut StdRng, (lo, hi): (usize, usize)) -> usize {
    rng.random_range(lo..=hi)
}

fn emit_clause(emitter: &mut Emitter, rng: &mut StdRng, arg2: bool) -> Vec<usize> {
    let (heads, verbs, tails) = if arg2 {
        (ARG2_HEADS, ARG2_VERBS, ARG2_TAILS)
    } else {
        (ARG1_HEADS, ARG1_VERBS, ARG1_TAILS)
    };
    vec![
        emitter.push(pick(rng, heads)),
        emitter.push(pick(rng, verbs)),
        emitter.push(pick(rng, tails)),
    ]
}

fn emit_connective(emitter: &mut Emitter, rng: &mut StdRng, multiword: bool) -> Vec<usize> {
    if multiword {
        let form = MULTI_CONNECTIVES[rng.random_range(0..MULTI_CONNECTIVES.len())];
        form.iter().map(|w| emitter.push(w)).collect()
    } else {
        vec![emitter.push(pick(rng, SINGLE_CONNECTIVES))]
    }
}

fn emit_filler_sentence(emitter: &mut Emitter, rng: &mut StdRng) {
    for _ in 0..rng.random_range(2..=5) {
        emitter.push(pick(rng, FILLER));
    }
    emitter.push(".");
}

/// Emits one relation sentence and records its spans.
///
/// Canonical form: `arg1-clause CONN arg2-clause .`
/// Connective-initial form: `CONN arg2-clause , arg1-clause .`
/// Far form: canonical with enough filler between arg1 and the connective
/// that arg1 falls entirely left of the extraction window.
fn emit_relation_sentence(
    emitter: &mut Emitter,
    rng: &mut StdRng,
    options: &GrammarOptions,
) -> PendingRelation {
    let multiword = rng.random_bool(options.multiword_fraction);
    let far = !rng.random_bool(options.arg2_first_fraction)
        && rng.random_bool(options.far_arg_fraction);
    if !far && rng.random_bool(options.arg2_first_fraction) {
        let connective = emit_connective(emitter, rng, multiword);
        let arg2 = emit_clause(emitter, rng, true);
        emitter.push(",");
        let arg1 = emit_clause(emitter, rng, false);
        emitter.push(".");
        return PendingRelation { connective, arg1, arg2, arg2_first: true, far: false };
    }

    let arg1 = emit_clause(emitter, rng, false);
    if far {
        // The gap puts arg1's last token strictly left of
        // `center - window_size / 2`, so the whole argument misses the
        // window rather than straddling its edge.
        let gap = options.window_size / 2 + rng.random_range(0..8);
        for _ in 0..gap {
            emitter.push(pick(rng, FILLER));
        }
    }
    let connective = emit_connective(emitter, rng, multiword);
    let arg2 = emit_clause(emitter, rng, true);
    emitter.push(".");
    PendingRelation { connective, arg1, arg2, arg2_first: false, far }
}

/// Generates a corpus from the clause grammar, deterministically from the
/// options. Connectives are always contiguous, never adjacent to another
/// connective, and unique per starting token, so gold tags decode back to
/// exactly the generated relations.
pub fn grammar_corpus(options: &GrammarOptions) -> Result<SynthCorpus> {
    options.validate()?;
    let mut rng = StdRng::seed_from_u64(options.seed);
    let mut documents = Vec::with_capacity(options.n_documents);
    let mut relations = Vec::new();
    let mut n_far = 0;
    let mut n_arg2_first = 0;

    for d in 0..options.n_documents {
        let doc_id = format!("synth-{d:04}");
        let mut emitter = Emitter::new();
        let mut pending = Vec::new();
        let budget = options.max_relations_per_document.unwrap_or(usize::MAX);

        for p in 0..range_sample(&mut rng, options.paragraphs_per_document) {
            if p > 0 {
                emitter.break_paragraph();
            }
            for _ in 0..range_sample(&mut rng, options.sentences_per_paragraph) {
                if pending.len() < budget && rng.random_bool(options.relation_fraction) {
                    pending.push(emit_relation_sentence(&mut emitter, &mut rng, options));
                } else {
                    emit_filler_sentence(&mut emitter, &mut rng);
                }
            }
        }
        if emitter.count == 0 {
            emit_filler_sentence(&mut emitter, &mut rng);
        }

        let expected_len = emitter.count;
        let doc = Document::from_raw_text(doc_id.clone(), emitter.into_text())?;
        if doc.len() != expected_len {
            return Err(Error::Labeling(format!(
                "grammar corpus emitted {expected_len} words for {doc_id} but tokenization found {}",
                doc.len()
            )));
        }

        for (k, rel) in pending.into_iter().enumerate() {
            let relation = Relation {
                relation_id: format!("{doc_id}-r{k}"),
                doc_id: doc_id.clone(),
                connective: rel.connective.into_iter().collect(),
                arg1: rel.arg1.into_iter().collect(),
                arg2: rel.arg2.into_iter().collect(),
                sense: None,
            };
            relation.validate(&doc)?;
            n_far += usize::from(rel.far);
            n_arg2_first += usize::from(rel.arg2_first);
            relations.push(relation);
        }
        documents.push(doc);
    }

    let n_window_covered = relations.len() - n_far;
    let corpus = SynthCorpus { documents, relations, n_window_covered, n_arg2_first };
    debug_assert_eq!(corpus.window_covered(options.window_size), corpus.n_window_covered);
    Ok(corpus)
}

/// Knobs for the unconstrained randomizer.
#[derive(Debug, Clone)]
pub struct RandomOptions {
    pub n_documents: usize,
    /// Inclusive range of tokens per document.
    pub tokens_per_document: (usize, usize),
    /// Inclusive range of relations per document (best effort; placement
    /// can run out of room in small documents).
    pub relations_per_document: (usize, usize),
    /// Connective length is drawn from `1..=max_connective_len`.
    pub max_connective_len: usize,
    /// Argument run length is drawn from `1..=max_argument_len`.
    pub max_argument_len: usize,
    /// Probability that an argument consists of two separated runs.
    pub discontinuous_fraction: f64,
    /// Mean paragraph length in tokens.
    pub mean_paragraph_len: usize,
    pub seed: u64,
}

impl Default for RandomOptions {
    fn default() -> Self {
        RandomOptions {
            n_documents: 50,
            tokens_per_document: (30, 120),
            relations_per_document: (1, 6),
            max_connective_len: 3,
            max_argument_len: 5,
            discontinuous_fraction: 0.3,
            mean_paragraph_len: 20,
            seed: 0,
        }
    }
}

impl RandomOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.tokens_per_document;
        if self.n_documents == 0
            || lo == 0
            || lo > hi
            || self.relations_per_document.0 > self.relations_per_document.1
            || self.max_connective_len == 0
            || self.max_argument_len == 0
            || self.mean_paragraph_len == 0
        {
            return Err(Error::Config("random corpus options are inconsistent".into()));
        }
        if lo < self.max_connective_len + 4 {
            return Err(Error::Config(format!(
                "documents of {lo} tokens cannot hold a {}-token connective plus arguments",
                self.max_connective_len
            )));
        }
        if !(0.0..=1.0).contains(&self.discontinuous_fraction) {
            return Err(Error::Config(format!(
                "discontinuous_fraction {} is outside [0, 1]",
                self.discontinuous_fraction
            )));
        }
        Ok(())
    }
}

/// Samples a contiguous argument run of free tokens, avoiding `taken`.
fn sample_run(
    rng: &mut StdRng,
    n_tokens: usize,
    max_len: usize,
    taken: &TokenSpan,
) -> TokenSpan {
    for _ in 0..64 {
        let len = rng.random_range(1..=max_len.min(n_tokens));
        let start = rng.random_range(0..=n_tokens - len);
        let run: TokenSpan = (start..start + len).filter(|i| !taken.contains(*i)).collect();
        if !run.is_empty() {
            return run;
        }
    }
    TokenSpan::new()
}

/// Generates documents with freely placed, possibly discontinuous argument
/// spans. Connectives stay contiguous, inside one paragraph, and keep one
/// token of clearance from each other so paragraph tags decode back to the
/// generated spans; arguments may land anywhere outside connective tokens.
pub fn random_corpus(options: &RandomOptions) -> Result<SynthCorpus> {
    options.validate()?;
    let mut rng = StdRng::seed_from_u64(options.seed);
    let mut documents = Vec::with_capacity(options.n_documents);
    let mut relations = Vec::new();
    let mut n_arg2_first = 0;

    let vocab: Vec<&str> = FILLER
        .iter()
        .chain(ARG1_HEADS)
        .chain(ARG2_HEADS)
        .chain(ARG1_TAILS)
        .copied()
        .collect();

    for d in 0..options.n_documents {
        let doc_id = format!("rand-{d:04}");
        let n_tokens = range_sample(&mut rng, options.tokens_per_document);
        let mut emitter = Emitter::new();
        while emitter.count < n_tokens {
            emitter.push(pick(&mut rng, &vocab));
            let at_break = rng.random_range(0..options.mean_paragraph_len) == 0;
            if at_break && emitter.count < n_tokens {
                emitter.break_paragraph();
            }
        }
        let doc = Document::from_raw_text(doc_id.clone(), emitter.into_text())?;
        debug_assert_eq!(doc.len(), n_tokens);

        // Connective tokens plus one token of clearance on each side, so
        // multiword runs from different relations never touch.
        let mut blocked = TokenSpan::new();
        let mut conn_tokens = TokenSpan::new();
        let paragraphs = doc.paragraphs();
        let target = range_sample(&mut rng, options.relations_per_document);
        let mut placed = 0;

        for _ in 0..target * 16 {
            if placed == target {
                break;
            }
            let len = rng.random_range(1..=options.max_connective_len);
            let para = &paragraphs[rng.random_range(0..paragraphs.len())];
            if para.hi - para.lo < len {
                continue;
            }
            let start = rng.random_range(para.lo..=para.hi - len);
            if (start..start + len).any(|i| blocked.contains(i)) {
                continue;
            }
            let connective: TokenSpan = (start..start + len).collect();

            for i in start.saturating_sub(1)..(start + len + 1).min(n_tokens) {
                blocked.insert(i);
            }
            for i in start..start + len {
                conn_tokens.insert(i);
            }

            let mut sample_arg = |taken: &TokenSpan| {
                let mut arg = sample_run(&mut rng, n_tokens, options.max_argument_len, taken);
                if !arg.is_empty() && rng.random_bool(options.discontinuous_fraction) {
                    let mut second = taken.clone();
                    for i in &arg {
                        second.insert(i);
                    }
                    for i in sample_run(&mut rng, n_tokens, options.max_argument_len, &second) {
                        arg.insert(i);
                    }
                }
                arg
            };

            let arg1 = sample_arg(&conn_tokens);
            let mut taken = conn_tokens.clone();
            for i in &arg1 {
                taken.insert(i);
            }
            let arg2 = sample_arg(&taken);
            if arg1.is_empty() || arg2.is_empty() {
                continue;
            }

            let relation = Relation {
                relation_id: format!("{doc_id}-r{placed}"),
                doc_id: doc_id.clone(),
                connective,
                arg1,
                arg2,
                sense: None,
            };
            relation.validate(&doc)?;
            if let (Some(a2_last), Some(a1_first)) = (relation.arg2.last(), relation.arg1.first()) {
                n_arg2_first += usize::from(a2_last < a1_first);
            }
            relations.push(relation);
            placed += 1;
        }
        documents.push(doc);
    }

    let mut corpus =
        SynthCorpus { documents, relations, n_window_covered: 0, n_arg2_first };
    corpus.n_window_covered = corpus.window_covered(DEFAULT_WINDOW_SIZE);
    Ok(corpus)
}

/// Knobs for deriving noisy predictions from a gold set.
#[derive(Debug, Clone)]
pub struct PerturbOptions {
    /// Probability that a gold relation yields no prediction at all.
    pub drop_fraction: f64,
    /// Probability that a predicted argument boundary moves by 1–2 tokens.
    pub shift_fraction: f64,
    /// Probability that the predicted connective span is wrong.
    pub wrong_connective_fraction: f64,
    /// Probability of an extra prediction sharing a gold connective span
    /// (forces the matcher to choose between candidates).
    pub duplicate_fraction: f64,
    /// Probability of an invented relation per document.
    pub spurious_fraction: f64,
    pub seed: u64,
}

impl Default for PerturbOptions {
    fn default() -> Self {
        PerturbOptions {
            drop_fraction: 0.1,
            shift_fraction: 0.4,
            wrong_connective_fraction: 0.15,
            duplicate_fraction: 0.2,
            spurious_fraction: 0.2,
            seed: 0,
        }
    }
}

impl PerturbOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Moves one boundary of `span` by `delta` tokens, keeping the result
/// nonempty, in `[0, n)`, and disjoint from `keep_out`.
fn shift_span(rng: &mut StdRng, span: &mut TokenSpan, n: usize, keep_out: &TokenSpan) {
    let delta = rng.random_range(1..=2usize);
    let grow = rng.random_bool(0.5);
    let at_start = rng.random_bool(0.5);
    for _ in 0..delta {
        let (Some(first), Some(last)) = (span.first(), span.last()) else { return };
        if grow {
            let candidate = if at_start { first.checked_sub(1) } else { Some(last + 1) };
            match candidate {
                Some(i) if i < n && !keep_out.contains(i) && !span.contains(i) => span.insert(i),
                _ => return,
            };
        } else {
            if span.len() == 1 {
                return;
            }
            span.remove(if at_start { first } else { last });
        }
    }
}

/// Derives a prediction set from gold relations by dropping, shifting,
/// corrupting, duplicating, and inventing, deterministically from the
/// options. All outputs stay valid relations over the corpus documents.
pub fn perturb_relations(corpus: &SynthCorpus, options: &PerturbOptions) -> Vec<Relation> {
    let mut rng = StdRng::seed_from_u64(options.seed);
    let lengths: HashMap<&str, usize> = corpus
        .documents
        .iter()
        .map(|d| (d.doc_id.as_str(), d.len()))
        .collect();
    let mut out = Vec::new();
    let mut next_id = 0;
    let mut push = |out: &mut Vec<Relation>, mut rel: Relation| {
        rel.relation_id = format!("p-{next_id}");
        next_id += 1;
        out.push(rel);
    };

    for gold in &corpus.relations {
        let n = lengths[gold.doc_id.as_str()];
        if rng.random_bool(options.drop_fraction) {
            continue;
        }
        let mut pred = gold.clone();
        if rng.random_bool(options.wrong_connective_fraction) {
            // Slide the whole connective one token, staying off the args.
            let keep_out = {
                let mut k = pred.arg1.clone();
                for i in &pred.arg2 {
                    k.insert(i);
                }
                k
            };
            let shifted: TokenSpan = pred
                .connective
                .iter()
                .map(|i| (i + 1).min(n - 1))
                .filter(|i| !keep_out.contains(*i))
                .collect();
            if !shifted.is_empty() && shifted != pred.connective {
                pred.connective = shifted;
            }
        }
        if rng.random_bool(options.shift_fraction) {
            let keep_out = {
                let mut k = pred.connective.clone();
                for i in &pred.arg2 {
                    k.insert(i);
                }
                k
            };
            shift_span(&mut rng, &mut pred.arg1, n, &keep_out);
        }
        if rng.random_bool(options.shift_fraction / 2.0) {
            let keep_out = {
                let mut k = pred.connective.clone();
                for i in &pred.arg1 {
                    k.insert(i);
                }
                k
            };
            shift_span(&mut rng, &mut pred.arg2, n, &keep_out);
        }
        if rng.random_bool(options.duplicate_fraction) {
            let mut twin = pred.clone();
            let keep_out = {
                let mut k = twin.connective.clone();
                for i in &twin.arg2 {
                    k.insert(i);
                }
                k
            };
            shift_span(&mut rng, &mut twin.arg1, n, &keep_out);
            push(&mut out, twin);
        }
        push(&mut out, pred);
    }

    for doc in &corpus.documents {
        if !rng.random_bool(options.spurious_fraction) || doc.len() < 4 {
            continue;
        }
        let t = rng.random_range(0..doc.len() - 3);
        let spurious = Relation {
            relation_id: String::new(),
            doc_id: doc.doc_id.clone(),
            connective: TokenSpan::from_range(t..t + 1),
            arg1: TokenSpan::from_range(t + 1..t + 2),
            arg2: TokenSpan::from_range(t + 2..t + 3),
            sense: None,
        };
        push(&mut out, spurious);
    }
    out
}

/// Replays gold connective tags for any paragraph of a known document.
pub struct GoldConnectiveTagger {
    documents: HashMap<String, Document>,
    relations: HashMap<String, Vec<Relation>>,
}

impl GoldConnectiveTagger {
    pub fn new(documents: &[Document], relations: &[Relation]) -> Self {
        let mut by_doc: HashMap<String, Vec<Relation>> = HashMap::new();
        for rel in relations {
            by_doc.entry(rel.doc_id.clone()).or_default().push(rel.clone());
        }
        GoldConnectiveTagger {
            documents: documents.iter().map(|d| (d.doc_id.clone(), d.clone())).collect(),
            relations: by_doc,
        }
    }

    fn document(&self, doc_id: &str) -> Result<&Document> {
        self.documents
            .get(doc_id)
            .ok_or_else(|| Error::Model(format!("gold oracle knows no document {doc_id}")))
    }
}

impl TokenClassifier for GoldConnectiveTagger {
    fn task(&self) -> Task {
        Task::Connective
    }

    fn model_id(&self) -> String {
        "gold-oracle-connective".into()
    }

    fn predict(&self, words: &[&str], segment: &SegmentRef) -> Result<Vec<usize>> {
        let doc = self.document(&segment.doc_id)?;
        if words.len() != segment.len() {
            return Err(Error::Model(format!(
                "segment [{}, {}) of {} expects {} words, got {}",
                segment.lo,
                segment.hi,
                segment.doc_id,
                segment.len(),
                words.len()
            )));
        }
        let paragraph = Paragraph {
            index: doc.paragraph_index(segment.lo),
            lo: segment.lo,
            hi: segment.hi,
        };
        let empty = Vec::new();
        let relations = self.relations.get(&segment.doc_id).unwrap_or(&empty);
        let tags = encode_connective_tags(doc, paragraph, relations)?;
        Ok(tags.tags.into_iter().map(ConnTag::index).collect())
    }
}

/// Replays gold argument tags for the window around any known connective,
/// keyed by the connective's first token. Unknown centers tag everything
/// `NONE`.
pub struct GoldArgumentTagger {
    by_center: HashMap<(String, usize), Relation>,
}

impl GoldArgumentTagger {
    pub fn new(relations: &[Relation]) -> Self {
        let by_center = relations
            .iter()
            .filter_map(|r| {
                r.connective
                    .first()
                    .map(|c| ((r.doc_id.clone(), c), r.clone()))
            })
            .collect();
        GoldArgumentTagger { by_center }
    }
}

impl TokenClassifier for GoldArgumentTagger {
    fn task(&self) -> Task {
        Task::Argument
    }

    fn model_id(&self) -> String {
        "gold-oracle-argument".into()
    }

    fn predict(&self, words: &[&str], segment: &SegmentRef) -> Result<Vec<usize>> {
        let center = segment.center.ok_or_else(|| {
            Error::Model("gold argument oracle needs a window segment with a center".into())
        })?;
        let key = (segment.doc_id.clone(), center);
        let Some(relation) = self.by_center.get(&key) else {
            return Ok(vec![ArgTag::None.index(); words.len()]);
        };
        let window = Window {
            doc_id: segment.doc_id.clone(),
            center,
            lo: segment.lo,
            hi: segment.hi,
        };
        let tags = encode_argument_tags(&window, relation);
        if tags.tags.len() != words.len() {
            return Err(Error::Model(format!(
                "window [{}, {}) of {} expects {} words, got {}",
                segment.lo,
                segment.hi,
                segment.doc_id,
                tags.tags.len(),
                words.len()
            )));
        }
        Ok(tags.tags.into_iter().map(ArgTag::index).collect())
    }
}
