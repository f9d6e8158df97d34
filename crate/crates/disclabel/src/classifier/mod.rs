//! Token-classification backends: a trainable transformer tagger, plus
//! deterministic baselines for pipeline tests without training.
//!
//! All backends implement [`TokenClassifier`]: one label per input word,
//! with labels read from each word's first subtoken and continuation
//! subtokens masked out of both loss and prediction.

pub mod encoder;
mod optim;
mod storage;
mod wordpiece;

pub use optim::{clip_global_norm, linear_schedule, AdamW};
pub use wordpiece::WordPiece;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::labeling::{SegmentRef, TagScheme};
use encoder::{EncoderParams, EncoderSpec};

/// Which of the two tagging sub-tasks a classifier solves; fixes the label
/// vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Connective,
    Argument,
}

impl Task {
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Task::Connective => &crate::labeling::ConnTag::LABELS,
            Task::Argument => &crate::labeling::ArgTag::LABELS,
        }
    }

    pub fn n_labels(self) -> usize {
        self.labels().len()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Connective => "connective",
            Task::Argument => "argument",
        }
    }
}

/// Training and architecture configuration for one classifier.
///
/// Defaults mirror the experimental protocol: AdamW at 5e-5 with epsilon
/// 1e-8, 3 epochs, 4 evaluation runs, subtoken budgets 400 (connective) and
/// 250 (argument). Batch size, weight decay, warmup, and clipping are not
/// pinned by that protocol; the values here are the assumed defaults and
/// are recorded in training metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub task: Task,
    /// Architecture preset; see [`encoder_spec`] for the known names.
    pub encoder_name: String,
    pub max_subtoken_length: usize,
    pub learning_rate: f64,
    pub adam_epsilon: f64,
    pub epochs: usize,
    /// Seeds averaged over when reporting scores; training itself always
    /// produces one model per seed.
    pub n_runs: usize,
    pub seed: u64,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub warmup_steps: usize,
    pub max_grad_norm: f64,
    /// Minimum whole-word frequency for the built vocabulary.
    pub min_word_freq: usize,
    pub max_vocab: usize,
    /// Optional model directory whose vocabulary and weights seed training
    /// (e.g. converted pretrained weights); architecture and task must
    /// match.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_from: Option<PathBuf>,
}

impl ClassifierConfig {
    pub fn connective() -> Self {
        ClassifierConfig {
            task: Task::Connective,
            encoder_name: "bert-base-cased".into(),
            max_subtoken_length: 400,
            learning_rate: 5e-5,
            adam_epsilon: 1e-8,
            epochs: 3,
            n_runs: 4,
            seed: 0,
            batch_size: 8,
            weight_decay: 0.0,
            warmup_steps: 0,
            max_grad_norm: 1.0,
            min_word_freq: 1,
            max_vocab: 30000,
            init_from: None,
        }
    }

    pub fn argument() -> Self {
        ClassifierConfig {
            task: Task::Argument,
            max_subtoken_length: 250,
            ..ClassifierConfig::connective()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let spec = encoder_spec(&self.encoder_name)?;
        if self.epochs == 0 {
            return Err(Error::Config("training needs at least 1 epoch".into()));
        }
        if self.n_runs == 0 {
            return Err(Error::Config("n_runs must be at least 1".into()));
        }
        if self.max_subtoken_length < 4 {
            return Err(Error::Config(
                "max_subtoken_length must leave room for [CLS], [SEP], and at least one word"
                    .into(),
            ));
        }
        if self.max_subtoken_length > spec.max_positions {
            return Err(Error::Config(format!(
                "max_subtoken_length {} exceeds the encoder position limit {}",
                self.max_subtoken_length, spec.max_positions
            )));
        }
        // The finiteness checks also reject NaN, which compares false
        // against everything.
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.learning_rate) || !positive(self.adam_epsilon) {
            return Err(Error::Config(
                "learning rate and epsilon must be positive".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.max_vocab < 8 {
            return Err(Error::Config("max_vocab is too small to hold the special tokens".into()));
        }
        Ok(())
    }

    /// Hash identifying the training configuration, independent of the
    /// seed (runs that differ only by seed share it).
    pub fn config_hash(&self) -> String {
        let mut seedless = self.clone();
        seedless.seed = 0;
        let json = serde_json::to_string(&seedless).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Architecture for a named encoder preset.
///
/// `tiny` and `mini` are for tests and CPU smoke runs; `bert-base-cased`
/// matches the base-size cased architecture (weights are still trained from
/// the provided data unless `init_from` supplies them).
pub fn encoder_spec(name: &str) -> Result<EncoderSpec> {
    let (dim, n_heads, ff_dim, n_layers) = match name {
        "tiny" => (32, 2, 64, 2),
        "mini" => (64, 4, 128, 4),
        "bert-base-cased" => (768, 12, 3072, 12),
        other => {
            return Err(Error::Config(format!(
                "unknown encoder preset {other:?} (expected tiny, mini, or bert-base-cased)"
            )))
        }
    };
    Ok(EncoderSpec {
        dim,
        n_heads,
        ff_dim,
        n_layers,
        max_positions: 512,
    })
}

/// Word-to-subtoken alignment for one word sequence (no special tokens).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentMap {
    /// All subtoken ids, in order.
    pub subtoken_ids: Vec<usize>,
    /// Per word, the index of its first subtoken in `subtoken_ids`.
    pub first_subtoken: Vec<usize>,
    /// Per subtoken, whether it is a word's first subtoken (labels attach
    /// only there).
    pub label_mask: Vec<bool>,
}

/// Subtokenizes a word sequence and records where each word starts.
pub fn align_subtokens(words: &[impl AsRef<str>], tokenizer: &WordPiece) -> Result<AlignmentMap> {
    let mut map = AlignmentMap {
        subtoken_ids: Vec::new(),
        first_subtoken: Vec::with_capacity(words.len()),
        label_mask: Vec::new(),
    };
    for word in words {
        let pieces = tokenizer.encode_word(word.as_ref());
        if pieces.is_empty() {
            return Err(Error::Model(format!(
                "tokenizer produced no subtokens for {:?}",
                word.as_ref()
            )));
        }
        map.first_subtoken.push(map.subtoken_ids.len());
        for (i, id) in pieces.into_iter().enumerate() {
            map.subtoken_ids.push(id);
            map.label_mask.push(i == 0);
        }
    }
    Ok(map)
}

/// A word sequence with one gold tag per word; the unit of training.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingInstance<T> {
    pub words: Vec<String>,
    pub tags: Vec<T>,
}

impl<T: TagScheme> TrainingInstance<T> {
    pub fn new(words: Vec<String>, tags: Vec<T>) -> Result<Self> {
        if words.len() != tags.len() {
            return Err(Error::Model(format!(
                "{} words but {} tags in a training instance",
                words.len(),
                tags.len()
            )));
        }
        Ok(TrainingInstance { words, tags })
    }
}

/// Common interface of all tagging backends.
///
/// `predict` returns one label index per input word, into the task's label
/// vocabulary, deterministically. The segment tells position-aware
/// backends where the words sit (paragraph slice or window).
pub trait TokenClassifier: Send + Sync {
    fn task(&self) -> Task;

    fn predict(&self, words: &[&str], segment: &SegmentRef) -> Result<Vec<usize>>;

    /// Stable identifier recorded in prediction provenance.
    fn model_id(&self) -> String {
        format!("{}-model", self.task().as_str())
    }

    /// Word indices where the backend starts a new hard split when the
    /// input exceeds its length budget, in ascending order, excluding 0.
    ///
    /// Tag runs must never be merged across these boundaries by decoders.
    /// Backends without a length limit return no split points.
    fn hard_split_points(&self, words: &[&str]) -> Result<Vec<usize>> {
        let _ = words;
        Ok(Vec::new())
    }
}

fn require_words(words: &[&str]) -> Result<()> {
    if words.is_empty() {
        return Err(Error::Model("predict called on an empty word sequence".into()));
    }
    Ok(())
}

/// Lexicon-driven connective tagger: longest-match scan over lowercased
/// words. Matched multiword forms tag every token `MWCONN`; matched single
/// words tag `CONN`.
pub struct BaselineConnectiveClassifier {
    /// Lowercased forms, longest first (ties alphabetical) so the scan is
    /// deterministic.
    forms: Vec<Vec<String>>,
}

impl BaselineConnectiveClassifier {
    pub fn new<I, S>(lexicon: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut forms: Vec<Vec<String>> = lexicon
            .into_iter()
            .map(|form| {
                form.as_ref()
                    .split_whitespace()
                    .map(|w| w.to_lowercase())
                    .collect::<Vec<_>>()
            })
            .filter(|f| !f.is_empty())
            .collect();
        if forms.is_empty() {
            return Err(Error::Config("connective lexicon is empty".into()));
        }
        forms.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        forms.dedup();
        Ok(BaselineConnectiveClassifier { forms })
    }
}

impl TokenClassifier for BaselineConnectiveClassifier {
    fn task(&self) -> Task {
        Task::Connective
    }

    fn model_id(&self) -> String {
        "lexicon-baseline".into()
    }

    fn predict(&self, words: &[&str], _segment: &SegmentRef) -> Result<Vec<usize>> {
        use crate::labeling::ConnTag;
        require_words(words)?;
        let lowered: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
        let mut out = vec![ConnTag::None.index(); words.len()];
        let mut i = 0;
        while i < lowered.len() {
            let matched = self
                .forms
                .iter()
                .find(|form| lowered[i..].starts_with(form.as_slice()));
            match matched {
                Some(form) if form.len() >= 2 => {
                    for slot in &mut out[i..i + form.len()] {
                        *slot = ConnTag::MwConn.index();
                    }
                    i += form.len();
                }
                Some(_) => {
                    out[i] = ConnTag::Conn.index();
                    i += 1;
                }
                None => i += 1,
            }
        }
        Ok(out)
    }
}

/// Position heuristic for argument windows: everything left of the center
/// is Arg1, everything right is Arg2, the center itself is none.
pub struct BaselineArgumentClassifier;

impl TokenClassifier for BaselineArgumentClassifier {
    fn task(&self) -> Task {
        Task::Argument
    }

    fn model_id(&self) -> String {
        "position-baseline".into()
    }

    fn predict(&self, words: &[&str], segment: &SegmentRef) -> Result<Vec<usize>> {
        use crate::labeling::ArgTag;
        require_words(words)?;
        let center = segment.center.ok_or_else(|| {
            Error::Model("argument baseline needs a window center in the segment".into())
        })?;
        if center < segment.lo || center >= segment.lo + words.len() {
            return Err(Error::Model(format!(
                "window center {center} outside segment [{}, {})",
                segment.lo,
                segment.lo + words.len()
            )));
        }
        let rel_center = center - segment.lo;
        let mut out = vec![ArgTag::None.index(); words.len()];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = if i < rel_center {
                if i == 0 { ArgTag::Arg1B } else { ArgTag::Arg1I }.index()
            } else if i > rel_center {
                if i == rel_center + 1 { ArgTag::Arg2B } else { ArgTag::Arg2I }.index()
            } else {
                ArgTag::None.index()
            };
        }
        Ok(out)
    }
}

/// A contiguous word range encoded as subtokens, within the length budget.
#[derive(Debug)]
struct EncodedChunk {
    word_lo: usize,
    word_hi: usize,
    /// Subtoken ids, no specials.
    ids: Vec<usize>,
    /// Per word in `[word_lo, word_hi)`: offset of its first subtoken in
    /// `ids`.
    first_offsets: Vec<usize>,
}

/// Packs words into chunks of at most `budget` subtokens, splitting hard at
/// word boundaries. A single word over the budget has its subtokens
/// truncated to fit; no word is ever dropped.
fn encode_chunks(words: &[&str], tokenizer: &WordPiece, budget: usize) -> Vec<EncodedChunk> {
    let mut chunks = Vec::new();
    let mut current = EncodedChunk {
        word_lo: 0,
        word_hi: 0,
        ids: Vec::new(),
        first_offsets: Vec::new(),
    };
    for (w, word) in words.iter().enumerate() {
        let mut pieces = tokenizer.encode_word(word);
        pieces.truncate(budget.max(1));
        if !current.ids.is_empty() && current.ids.len() + pieces.len() > budget {
            let done = std::mem::replace(
                &mut current,
                EncodedChunk {
                    word_lo: w,
                    word_hi: w,
                    ids: Vec::new(),
                    first_offsets: Vec::new(),
                },
            );
            chunks.push(done);
        }
        current.first_offsets.push(current.ids.len());
        current.ids.extend(pieces);
        current.word_hi = w + 1;
    }
    if !current.ids.is_empty() {
        chunks.push(current);
    }
    chunks
}

/// Everything recorded about a completed training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub task: String,
    pub encoder_name: String,
    pub seed: u64,
    pub config_hash: String,
    /// "random" or the path weights were loaded from.
    pub initialization: String,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub adam_epsilon: f64,
    pub weight_decay: f64,
    pub warmup_steps: usize,
    pub max_grad_norm: f64,
    pub dropout: f64,
    pub n_instances: usize,
    pub n_chunks: usize,
    pub vocab_size: usize,
    pub n_parameters: usize,
    /// Mean loss per labeled token, one entry per epoch.
    pub loss_curve: Vec<f64>,
    pub train_seconds: f64,
}

/// A trained transformer tagger plus its tokenizer and provenance.
#[derive(Debug)]
pub struct TrainedClassifier {
    config: ClassifierConfig,
    tokenizer: WordPiece,
    params: EncoderParams,
    metadata: TrainingMetadata,
}

impl TrainedClassifier {
    pub fn config(&self) -> &ClassifierConfig {
        &self.config
    }

    pub fn metadata(&self) -> &TrainingMetadata {
        &self.metadata
    }

    pub fn tokenizer(&self) -> &WordPiece {
        &self.tokenizer
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        storage::save_model(dir.as_ref(), &self.config, &self.tokenizer, &self.params, &self.metadata)
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let (config, tokenizer, params, metadata) = storage::load_model(dir.as_ref())?;
        Ok(TrainedClassifier {
            config,
            tokenizer,
            params,
            metadata,
        })
    }

    fn subtoken_budget(&self) -> usize {
        self.config.max_subtoken_length.saturating_sub(2).max(1)
    }
}

impl TokenClassifier for TrainedClassifier {
    fn task(&self) -> Task {
        self.config.task
    }

    fn model_id(&self) -> String {
        format!(
            "{}:{}:{}",
            self.config.encoder_name,
            self.config.task.as_str(),
            &self.metadata.config_hash[..8.min(self.metadata.config_hash.len())]
        )
    }

    fn hard_split_points(&self, words: &[&str]) -> Result<Vec<usize>> {
        require_words(words)?;
        Ok(encode_chunks(words, &self.tokenizer, self.subtoken_budget())
            .iter()
            .skip(1)
            .map(|chunk| chunk.word_lo)
            .collect())
    }

    /// One label per word: subtokenize, hard-split into chunks within the
    /// length budget, run the encoder per chunk, read logits at first
    /// subtokens, argmax with ties to the lowest label index, concatenate.
    fn predict(&self, words: &[&str], _segment: &SegmentRef) -> Result<Vec<usize>> {
        require_words(words)?;
        let mut out = Vec::with_capacity(words.len());
        for chunk in encode_chunks(words, &self.tokenizer, self.subtoken_budget()) {
            let mut ids = Vec::with_capacity(chunk.ids.len() + 2);
            ids.push(self.tokenizer.cls_id());
            ids.extend(&chunk.ids);
            ids.push(self.tokenizer.sep_id());
            let (logits, _) = encoder::forward(&self.params, &ids)?;
            for &off in &chunk.first_offsets {
                let row = logits.row(off + 1);
                let mut best = 0;
                for (i, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = i;
                    }
                }
                out.push(best);
            }
        }
        debug_assert_eq!(out.len(), words.len());
        Ok(out)
    }
}

/// Trains one tagger on the given instances.
///
/// Deterministic for a fixed config (seed included): vocabulary build,
/// initialization, shuffling, and optimization all derive from the seed.
/// Over-length instances are hard-split at word boundaries, never dropped.
pub fn train<T: TagScheme>(
    config: &ClassifierConfig,
    instances: &[TrainingInstance<T>],
) -> Result<TrainedClassifier> {
    config.validate()?;
    if T::labels() != config.task.labels() {
        return Err(Error::Config(format!(
            "config is for the {} task but instances use the {:?} scheme",
            config.task.as_str(),
            T::labels()
        )));
    }
    if instances.is_empty() {
        return Err(Error::Config("training needs at least one instance".into()));
    }

    let start = Instant::now();
    let spec = encoder_spec(&config.encoder_name)?;
    let mut rng = StdRng::seed_from_u64(config.seed);

    // Tokenizer and initial weights: fresh from the data, or carried over
    // from a prior model directory.
    let (tokenizer, mut params, initialization) = match &config.init_from {
        Some(dir) => {
            let (prior_config, tokenizer, params, _) = storage::load_model(dir)?;
            if prior_config.task != config.task {
                return Err(Error::Config(format!(
                    "init_from model solves the {} task, not {}",
                    prior_config.task.as_str(),
                    config.task.as_str()
                )));
            }
            if prior_config.encoder_name != config.encoder_name {
                return Err(Error::Config(format!(
                    "init_from model uses encoder {}, not {}",
                    prior_config.encoder_name, config.encoder_name
                )));
            }
            (tokenizer, params, format!("weights from {}", dir.display()))
        }
        None => {
            let words = instances
                .iter()
                .flat_map(|inst| inst.words.iter().map(String::as_str));
            let tokenizer = WordPiece::build(words, config.min_word_freq, config.max_vocab)?;
            let params = EncoderParams::init(
                spec,
                tokenizer.vocab_size(),
                config.task.n_labels(),
                &mut rng,
            )?;
            (tokenizer, params, "random".to_string())
        }
    };

    // Encode every instance into (ids-with-specials, per-position labels).
    let budget = config.max_subtoken_length.saturating_sub(2).max(1);
    let mut sequences: Vec<(Vec<usize>, Vec<Option<usize>>)> = Vec::new();
    for inst in instances {
        let word_refs: Vec<&str> = inst.words.iter().map(String::as_str).collect();
        for chunk in encode_chunks(&word_refs, &tokenizer, budget) {
            let mut ids = Vec::with_capacity(chunk.ids.len() + 2);
            ids.push(tokenizer.cls_id());
            ids.extend(&chunk.ids);
            ids.push(tokenizer.sep_id());
            let mut labels = vec![None; ids.len()];
            for (w, &off) in (chunk.word_lo..chunk.word_hi).zip(&chunk.first_offsets) {
                labels[off + 1] = Some(inst.tags[w].index());
            }
            sequences.push((ids, labels));
        }
    }
    let n_chunks = sequences.len();

    let n_batches = n_chunks.div_ceil(config.batch_size);
    let total_steps = (config.epochs * n_batches) as u64;
    let mut opt = AdamW::new(
        &params.tensors,
        params.decay_mask(),
        config.learning_rate,
        config.adam_epsilon,
        config.weight_decay,
    );

    let mut loss_curve = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..n_chunks).collect();
    let mut global_step = 0u64;
    for _epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut epoch_count = 0usize;
        for batch in order.chunks(config.batch_size) {
            let mut grads = params.zero_grads();
            let mut loss_sum = 0.0;
            let mut labeled = 0usize;
            for &i in batch {
                let (ids, labels) = &sequences[i];
                let (loss, count) = encoder::accumulate(&params, ids, labels, &mut grads)?;
                loss_sum += loss;
                labeled += count;
            }
            if labeled > 0 {
                let inv = 1.0 / labeled as f64;
                for g in &mut grads {
                    g.mapv_inplace(|v| v * inv);
                }
                clip_global_norm(&mut grads, config.max_grad_norm);
                let lr_scale =
                    linear_schedule(global_step, total_steps, config.warmup_steps as u64);
                opt.step(&mut params.tensors, &grads, lr_scale);
            }
            epoch_loss += loss_sum;
            epoch_count += labeled;
            global_step += 1;
        }
        loss_curve.push(if epoch_count > 0 {
            epoch_loss / epoch_count as f64
        } else {
            0.0
        });
    }

    let metadata = TrainingMetadata {
        task: config.task.as_str().to_string(),
        encoder_name: config.encoder_name.clone(),
        seed: config.seed,
        config_hash: config.config_hash(),
        initialization,
        batch_size: config.batch_size,
        epochs: config.epochs,
        learning_rate: config.learning_rate,
        adam_epsilon: config.adam_epsilon,
        weight_decay: config.weight_decay,
        warmup_steps: config.warmup_steps,
        max_grad_norm: config.max_grad_norm,
        dropout: 0.0,
        n_instances: instances.len(),
        n_chunks,
        vocab_size: tokenizer.vocab_size(),
        n_parameters: params.n_parameters(),
        loss_curve,
        train_seconds: start.elapsed().as_secs_f64(),
    };

    Ok(TrainedClassifier {
        config: config.clone(),
        tokenizer,
        params,
        metadata,
    })
}
