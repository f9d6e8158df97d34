//! Command-line interface: prepare training instances, train taggers, run
//! the two-stage pipeline, score predictions, and summarize corpora.
//!
//! Every artifact-producing subcommand writes a manifest beside its output
//! recording the exact command line, a config snapshot, SHA-256 digests of
//! every input file, the seeds used, and wall-clock time, so any artifact
//! can be traced back to the invocation that produced it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::{
    self, BaselineArgumentClassifier, BaselineConnectiveClassifier, ClassifierConfig, Task,
    TokenClassifier, TrainedClassifier, TrainingInstance,
};
use crate::corpus::io::{read_jsonl, write_jsonl};
use crate::corpus::{
    compute_span_stats, load_conll_corpus, load_documents, load_relations,
    same_paragraph_fraction, Document, Relation, SpanStats,
};
use crate::evaluation::{
    connective_error_report, filter_arg2_first, filter_discontinuous, match_relations,
    near_miss_report, score,
};
use crate::labeling::{
    argument_instances, connective_instances, ArgTag, ConnTag, TagScheme, TagSequence,
    DEFAULT_WINDOW_SIZE,
};
use crate::pipeline::{Pipeline, PipelineConfig, PredictedRelation};
use crate::{Error, Result};

/// Environment variable naming a base directory searched for model
/// directories given as relative paths.
pub const MODEL_DIR_ENV: &str = "DISCLABEL_MODEL_DIR";

/// Connective forms matched by `predict --baseline` when no lexicon file is
/// given. Multiword forms are space-separated; matching is lowercased and
/// longest-first.
pub const DEFAULT_CONNECTIVES: &[&str] = &[
    "accordingly",
    "additionally",
    "after",
    "afterward",
    "also",
    "alternatively",
    "although",
    "and",
    "as",
    "as a result",
    "as if",
    "as long as",
    "as soon as",
    "as though",
    "as well",
    "because",
    "before",
    "besides",
    "but",
    "by comparison",
    "by contrast",
    "consequently",
    "conversely",
    "earlier",
    "even if",
    "even though",
    "finally",
    "for example",
    "for instance",
    "furthermore",
    "however",
    "if",
    "in addition",
    "in contrast",
    "in fact",
    "in other words",
    "in particular",
    "in short",
    "in sum",
    "in the end",
    "in turn",
    "indeed",
    "instead",
    "later",
    "likewise",
    "meanwhile",
    "moreover",
    "nevertheless",
    "nonetheless",
    "nor",
    "now that",
    "on the contrary",
    "on the other hand",
    "once",
    "or",
    "otherwise",
    "overall",
    "plus",
    "previously",
    "rather",
    "regardless",
    "separately",
    "similarly",
    "since",
    "so",
    "so that",
    "specifically",
    "still",
    "then",
    "thereafter",
    "thereby",
    "therefore",
    "though",
    "thus",
    "ultimately",
    "unless",
    "until",
    "when",
    "whereas",
    "while",
    "yet",
];

/// One training instance as serialized by `prepare`: a token segment with
/// per-token label strings. `center` is the connective anchor and is set
/// only for argument-task windows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub doc_id: String,
    pub lo: usize,
    pub hi: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<usize>,
    pub words: Vec<String>,
    pub tags: Vec<String>,
}

impl InstanceRecord {
    fn from_sequence<T: TagScheme>(doc: &Document, sequence: &TagSequence<T>) -> Self {
        InstanceRecord {
            doc_id: sequence.segment.doc_id.clone(),
            lo: sequence.segment.lo,
            hi: sequence.segment.hi,
            center: sequence.segment.center,
            words: sequence.words(doc).iter().map(|w| w.to_string()).collect(),
            tags: sequence
                .tags
                .iter()
                .map(|t| T::labels()[t.index()].to_string())
                .collect(),
        }
    }
}

/// Reproducibility record written beside every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub version: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<u64>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

struct ManifestBuilder {
    manifest: RunManifest,
    started: Instant,
}

impl ManifestBuilder {
    fn new(command: &str) -> Self {
        ManifestBuilder {
            manifest: RunManifest {
                command: command.to_string(),
                argv: std::env::args().collect(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                config: serde_json::Value::Null,
                inputs: Vec::new(),
                seeds: Vec::new(),
                outputs: Vec::new(),
                wall_clock_seconds: 0.0,
            },
            started: Instant::now(),
        }
    }

    fn set_config<T: Serialize>(&mut self, config: &T) -> Result<()> {
        self.manifest.config = serde_json::to_value(config)
            .map_err(|e| Error::Config(format!("config snapshot: {e}")))?;
        Ok(())
    }

    fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let sha256 = Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        self.manifest.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256,
        });
        Ok(())
    }

    fn set_seeds(&mut self, seeds: &[u64]) {
        self.manifest.seeds = seeds.to_vec();
    }

    fn add_output(&mut self, path: &Path) {
        self.manifest.outputs.push(path.display().to_string());
    }

    fn write(mut self, path: &Path) -> Result<()> {
        self.manifest.wall_clock_seconds = self.started.elapsed().as_secs_f64();
        write_json(path, &self.manifest)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "disclabel",
    version,
    about = "Identify explicit discourse connectives in text and extract their arguments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode a corpus into per-token training instances.
    Prepare(PrepareArgs),
    /// Train tagging models on prepared instances, one directory per seed.
    Train(TrainArgs),
    /// Run the two-stage pipeline over documents or raw text.
    Predict(PredictArgs),
    /// Score predictions against gold relations by exact token match.
    Evaluate(EvaluateArgs),
    /// Summarize span lengths and relation shapes in a corpus.
    Stats(StatsArgs),
}

fn parse_task(value: &str) -> std::result::Result<Task, String> {
    match value {
        "connective" => Ok(Task::Connective),
        "argument" => Ok(Task::Argument),
        other => Err(format!(
            "unknown task {other:?}; expected \"connective\" or \"argument\""
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Subset {
    Arg2First,
    Discontinuous,
}

impl Subset {
    fn name(self) -> &'static str {
        match self {
            Subset::Arg2First => "arg2-first",
            Subset::Discontinuous => "discontinuous",
        }
    }

    fn apply(self, relations: &[Relation]) -> Vec<Relation> {
        match self {
            Subset::Arg2First => filter_arg2_first(relations),
            Subset::Discontinuous => filter_discontinuous(relations),
        }
    }
}

fn parse_subset(value: &str) -> std::result::Result<Subset, String> {
    match value {
        "arg2-first" => Ok(Subset::Arg2First),
        "discontinuous" => Ok(Subset::Discontinuous),
        other => Err(format!(
            "unknown subset {other:?}; expected \"arg2-first\" or \"discontinuous\""
        )),
    }
}

#[derive(Debug, Args)]
struct PrepareArgs {
    /// Task to encode instances for: "connective" or "argument".
    #[arg(long, value_parser = parse_task)]
    task: Task,
    /// Tokenized documents, one JSON object per line.
    #[arg(long)]
    docs: PathBuf,
    /// Gold relations, one JSON object per line.
    #[arg(long)]
    relations: PathBuf,
    /// Directory receiving the instance file and its manifest.
    #[arg(long)]
    out_dir: PathBuf,
    /// Token window centered on each connective (argument task only).
    #[arg(long, default_value_t = DEFAULT_WINDOW_SIZE)]
    window_size: usize,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Task to train: "connective" or "argument".
    #[arg(long, value_parser = parse_task)]
    task: Task,
    /// Instance file produced by `prepare`.
    #[arg(long)]
    instances: PathBuf,
    /// Directory receiving one model directory per seed.
    #[arg(long)]
    out_dir: PathBuf,
    /// JSON file holding a full training config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of independent runs, seeded base, base+1, ...
    #[arg(long)]
    runs: Option<usize>,
    /// Base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Encoder preset name.
    #[arg(long)]
    encoder: Option<String>,
    /// Model directory whose weights and vocabulary seed this run.
    #[arg(long)]
    init_from: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["docs", "text"])))]
struct PredictArgs {
    /// Tokenized documents to label (JSONL).
    #[arg(long)]
    docs: Option<PathBuf>,
    /// Raw UTF-8 text file; paragraphs split on blank lines.
    #[arg(long)]
    text: Option<PathBuf>,
    /// Connective model directory, or a name under DISCLABEL_MODEL_DIR.
    #[arg(long, required_unless_present = "baseline", conflicts_with = "baseline")]
    connective_model: Option<PathBuf>,
    /// Argument model directory, or a name under DISCLABEL_MODEL_DIR.
    #[arg(long, required_unless_present = "baseline", conflicts_with = "baseline")]
    argument_model: Option<PathBuf>,
    /// Use the lexicon matcher and positional argument heuristic instead of
    /// trained models.
    #[arg(long)]
    baseline: bool,
    /// Replacement lexicon for --baseline: one connective form per line.
    #[arg(long, requires = "baseline")]
    lexicon: Option<PathBuf>,
    /// Token window centered on each predicted connective.
    #[arg(long, default_value_t = DEFAULT_WINDOW_SIZE)]
    window_size: usize,
    /// Keep relations whose decoded arguments are both empty.
    #[arg(long)]
    keep_empty: bool,
    /// Output predictions file (JSONL).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Tokenized documents both relation files refer to (JSONL).
    #[arg(long)]
    docs: PathBuf,
    /// Gold relations (JSONL).
    #[arg(long)]
    gold: PathBuf,
    /// Predicted relations (JSONL, as written by `predict`).
    #[arg(long)]
    pred: PathBuf,
    /// Directory receiving report.json and any error reports.
    #[arg(long)]
    out_dir: PathBuf,
    /// Restrict scoring to one subset: "arg2-first" or "discontinuous".
    /// The filter applies to both predictions and gold.
    #[arg(long, value_parser = parse_subset)]
    subset: Option<Subset>,
    /// Also write near-miss and connective-error reports.
    #[arg(long)]
    errors: bool,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Tokenized documents (JSONL).
    #[arg(long)]
    docs: PathBuf,
    /// Gold relations (JSONL).
    #[arg(long)]
    relations: PathBuf,
    /// Span-length thresholds for the cumulative histogram.
    #[arg(long, value_delimiter = ',', default_values_t = vec![25usize, 50, 75, 100, 250])]
    thresholds: Vec<usize>,
    /// Optional JSON output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Entry point for the binary. Returns the process exit code: 0 on
/// success, 2 for command-line usage errors, and a per-category nonzero
/// code for everything else.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap routes --help/--version to stdout with code 0 and
            // usage errors to stderr with code 2.
            let _ = err.print();
            return err.exit_code();
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prepare(args) => cmd_prepare(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Stats(args) => cmd_stats(args),
    }
}

fn cmd_prepare(args: PrepareArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::new("prepare");
    manifest.add_input(&args.docs)?;
    manifest.add_input(&args.relations)?;
    manifest.set_config(&serde_json::json!({
        "task": args.task.as_str(),
        "window_size": args.window_size,
    }))?;

    let (documents, relations) = load_conll_corpus(&args.docs, &args.relations)?;
    let mut records = Vec::new();
    for doc in &documents {
        match args.task {
            Task::Connective => {
                for seq in connective_instances(doc, &relations)? {
                    records.push(InstanceRecord::from_sequence(doc, &seq));
                }
            }
            Task::Argument => {
                for seq in argument_instances(doc, &relations, args.window_size)? {
                    records.push(InstanceRecord::from_sequence(doc, &seq));
                }
            }
        }
    }

    let out = args
        .out_dir
        .join(format!("{}-instances.jsonl", args.task.as_str()));
    ensure_parent(&out)?;
    write_jsonl(&out, &records)?;

    let mut label_counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut n_tokens = 0usize;
    for record in &records {
        for tag in &record.tags {
            *label_counts.entry(tag.as_str()).or_default() += 1;
            n_tokens += 1;
        }
    }
    let distribution = label_counts
        .iter()
        .map(|(label, count)| format!("{label} {count}"))
        .collect::<Vec<_>>()
        .join(", ");
    println!(
        "{} instances over {} documents ({} tokens: {}) -> {}",
        records.len(),
        documents.len(),
        n_tokens,
        distribution,
        out.display()
    );

    manifest.add_output(&out);
    manifest.write(&args.out_dir.join(format!("{}-manifest.json", args.task.as_str())))
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => read_json::<ClassifierConfig>(path)?,
        None => match args.task {
            Task::Connective => ClassifierConfig::connective(),
            Task::Argument => ClassifierConfig::argument(),
        },
    };
    if config.task != args.task {
        return Err(Error::Config(format!(
            "--task {} does not match the config file's task {}",
            args.task.as_str(),
            config.task.as_str()
        )));
    }
    if let Some(runs) = args.runs {
        config.n_runs = runs;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(epochs) = args.epochs {
        config.epochs = epochs;
    }
    if let Some(lr) = args.learning_rate {
        config.learning_rate = lr;
    }
    if let Some(batch) = args.batch_size {
        config.batch_size = batch;
    }
    if let Some(encoder) = &args.encoder {
        config.encoder_name = encoder.clone();
    }
    if let Some(init) = &args.init_from {
        config.init_from = Some(resolve_model_dir(init)?);
    }
    config.validate()?;

    let mut manifest = ManifestBuilder::new("train");
    manifest.add_input(&args.instances)?;
    if let Some(path) = &args.config {
        manifest.add_input(path)?;
    }
    manifest.set_config(&config)?;
    let seeds: Vec<u64> = (0..config.n_runs as u64).map(|i| config.seed + i).collect();
    manifest.set_seeds(&seeds);

    let records = read_instances(&args.instances)?;
    let dirs = match args.task {
        Task::Connective => train_runs::<ConnTag>(&config, &records, &args.instances, &args.out_dir)?,
        Task::Argument => train_runs::<ArgTag>(&config, &records, &args.instances, &args.out_dir)?,
    };
    for dir in &dirs {
        manifest.add_output(dir);
    }
    manifest.write(&args.out_dir.join("manifest.json"))
}

/// Trains `config.n_runs` models on the same instances, bumping the seed by
/// one per run, and saves each under `out_dir/seed-<seed>/`.
fn train_runs<T: TagScheme>(
    config: &ClassifierConfig,
    records: &[InstanceRecord],
    source: &Path,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let instances = to_instances::<T>(records, source)?;
    let mut dirs = Vec::with_capacity(config.n_runs);
    for run in 0..config.n_runs {
        let mut run_config = config.clone();
        run_config.seed = config.seed + run as u64;
        run_config.n_runs = 1;
        let model = classifier::train::<T>(&run_config, &instances)?;
        let dir = out_dir.join(format!("seed-{}", run_config.seed));
        model.save(&dir)?;
        let meta = model.metadata();
        println!(
            "seed {}: {} parameters, final loss {:.4} after {} epochs ({:.1}s) -> {}",
            run_config.seed,
            meta.n_parameters,
            meta.loss_curve.last().copied().unwrap_or(f64::NAN),
            meta.epochs,
            meta.train_seconds,
            dir.display()
        );
        dirs.push(dir);
    }
    Ok(dirs)
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::new("predict");
    let config = PipelineConfig {
        window_size: args.window_size,
        drop_empty_arguments: !args.keep_empty,
    };

    let (connective_model, argument_model): (Box<dyn TokenClassifier>, Box<dyn TokenClassifier>) =
        if args.baseline {
            let forms = match &args.lexicon {
                Some(path) => {
                    manifest.add_input(path)?;
                    read_lexicon(path)?
                }
                None => DEFAULT_CONNECTIVES.iter().map(|s| s.to_string()).collect(),
            };
            (
                Box::new(BaselineConnectiveClassifier::new(forms)?),
                Box::new(BaselineArgumentClassifier),
            )
        } else {
            let conn = resolve_model_dir(args.connective_model.as_ref().expect("clap requires"))?;
            let arg = resolve_model_dir(args.argument_model.as_ref().expect("clap requires"))?;
            (
                Box::new(TrainedClassifier::load(&conn)?),
                Box::new(TrainedClassifier::load(&arg)?),
            )
        };
    let pipeline = Pipeline::new(connective_model.as_ref(), argument_model.as_ref(), config.clone())?;
    manifest.set_config(&serde_json::json!({
        "pipeline": &config,
        "connective_model": connective_model.model_id(),
        "argument_model": argument_model.model_id(),
        "baseline": args.baseline,
    }))?;

    let mut predictions: Vec<PredictedRelation> = Vec::new();
    let n_docs;
    if let Some(path) = &args.docs {
        manifest.add_input(path)?;
        let documents = load_documents(path)?;
        n_docs = documents.len();
        for doc in &documents {
            predictions.extend(pipeline.label_document(doc)?);
        }
    } else {
        let path = args.text.as_ref().expect("clap requires");
        manifest.add_input(path)?;
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "text".to_string());
        let (_, labeled) = pipeline.label_text(doc_id, &text)?;
        predictions = labeled;
        n_docs = 1;
    }

    ensure_parent(&args.out)?;
    write_jsonl(&args.out, &predictions)?;
    println!(
        "{} relations predicted across {} documents -> {}",
        predictions.len(),
        n_docs,
        args.out.display()
    );
    manifest.add_output(&args.out);
    manifest.write(&sibling_manifest(&args.out))
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::new("evaluate");
    manifest.add_input(&args.docs)?;
    manifest.add_input(&args.gold)?;
    manifest.add_input(&args.pred)?;
    manifest.set_config(&serde_json::json!({
        "subset": args.subset.map(Subset::name),
        "errors": args.errors,
    }))?;

    let (documents, gold) = load_conll_corpus(&args.docs, &args.gold)?;
    let predicted = load_relations(&args.pred)?;

    // Predictions must refer to known documents and stay inside them;
    // anything else means the files belong to different corpora.
    let by_id: HashMap<&str, &Document> =
        documents.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let unknown: BTreeSet<&str> = predicted
        .iter()
        .filter(|r| !by_id.contains_key(r.doc_id.as_str()))
        .map(|r| r.doc_id.as_str())
        .collect();
    if !unknown.is_empty() {
        return Err(Error::Evaluation(format!(
            "predictions reference documents missing from {}: {}",
            args.docs.display(),
            unknown.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    for rel in &predicted {
        rel.check_bounds(by_id[rel.doc_id.as_str()])?;
    }

    let (predicted, gold) = match args.subset {
        None => (predicted, gold),
        Some(subset) => {
            let kept_pred = subset.apply(&predicted);
            let kept_gold = subset.apply(&gold);
            println!(
                "subset {}: kept {}/{} predicted and {}/{} gold relations",
                subset.name(),
                kept_pred.len(),
                predicted.len(),
                kept_gold.len(),
                gold.len()
            );
            if subset == Subset::Discontinuous && !kept_gold.is_empty() {
                let mean = kept_gold.iter().map(|r| r.span_length()).sum::<usize>() as f64
                    / kept_gold.len() as f64;
                println!("mean gold extent in subset: {mean:.1} tokens");
            }
            (kept_pred, kept_gold)
        }
    };

    let result = match_relations(&predicted, &gold)?;
    let report = score(&result);
    println!("{report}");

    let report_path = args.out_dir.join("report.json");
    write_json(&report_path, &report)?;
    manifest.add_output(&report_path);

    if args.errors {
        let near = near_miss_report(&result, &predicted, &gold)?;
        let near_path = args.out_dir.join("near_misses.json");
        write_json(&near_path, &near)?;
        manifest.add_output(&near_path);
        println!(
            "near misses: {}/{} arg1 mismatches within 2 tokens ({:.1}%)",
            near.n_within_two,
            near.misses.len(),
            100.0 * near.fraction_within_two
        );

        let conn = connective_error_report(&result, &predicted, &gold, &documents)?;
        let conn_path = args.out_dir.join("connective_errors.json");
        write_json(&conn_path, &conn)?;
        manifest.add_output(&conn_path);
        let top: Vec<String> = conn
            .false_positives
            .iter()
            .take(5)
            .map(|s| format!("{} ({})", s.surface, s.count))
            .collect();
        if !top.is_empty() {
            println!("top false-positive connectives: {}", top.join(", "));
        }
    }

    manifest.write(&args.out_dir.join("manifest.json"))
}

/// Corpus summary written by `stats`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsSummary {
    pub n_documents: usize,
    pub n_relations: usize,
    pub spans: SpanStats,
    pub same_paragraph_percent: f64,
    pub arg2_first_percent: f64,
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::new("stats");
    manifest.add_input(&args.docs)?;
    manifest.add_input(&args.relations)?;
    manifest.set_config(&serde_json::json!({ "thresholds": &args.thresholds }))?;

    let (documents, relations) = load_conll_corpus(&args.docs, &args.relations)?;
    let spans = compute_span_stats(&relations, &documents, &args.thresholds)?;
    let same_paragraph = 100.0 * same_paragraph_fraction(&relations, &documents)?;
    let arg2_first = 100.0 * filter_arg2_first(&relations).len() as f64 / relations.len() as f64;

    println!(
        "{} documents, {} relations\n{spans}",
        documents.len(),
        relations.len()
    );
    println!("same-paragraph relations: {same_paragraph:.2}%");
    println!("arg2-before-arg1 relations: {arg2_first:.2}%");

    let summary = StatsSummary {
        n_documents: documents.len(),
        n_relations: relations.len(),
        spans,
        same_paragraph_percent: same_paragraph,
        arg2_first_percent: arg2_first,
    };
    if let Some(out) = &args.out {
        write_json(out, &summary)?;
        manifest.add_output(out);
        manifest.write(&sibling_manifest(out))?;
    }
    Ok(())
}

fn read_instances(path: &Path) -> Result<Vec<InstanceRecord>> {
    let mut records = Vec::new();
    read_jsonl(path, |record: InstanceRecord| {
        records.push(record);
        Ok(())
    })?;
    if records.is_empty() {
        return Err(Error::Config(format!(
            "{} holds no training instances",
            path.display()
        )));
    }
    Ok(records)
}

fn to_instances<T: TagScheme>(
    records: &[InstanceRecord],
    source: &Path,
) -> Result<Vec<TrainingInstance<T>>> {
    records
        .iter()
        .enumerate()
        .map(|(i, record)| {
            let tags = record
                .tags
                .iter()
                .map(|label| {
                    tag_from_label::<T>(label).ok_or_else(|| {
                        Error::parse(
                            source,
                            i + 1,
                            format!("unknown label {label:?}; expected one of {:?}", T::labels()),
                        )
                    })
                })
                .collect::<Result<Vec<T>>>()?;
            TrainingInstance::new(record.words.clone(), tags)
        })
        .collect()
}

fn tag_from_label<T: TagScheme>(label: &str) -> Option<T> {
    T::labels()
        .iter()
        .position(|l| *l == label)
        .and_then(T::from_index)
}

/// Resolves a model directory, retrying relative paths under the directory
/// named by `DISCLABEL_MODEL_DIR` so model collections can live outside the
/// working tree.
fn resolve_model_dir(path: &Path) -> Result<PathBuf> {
    if path.is_dir() {
        return Ok(path.to_path_buf());
    }
    if path.is_relative() {
        if let Some(base) = std::env::var_os(MODEL_DIR_ENV) {
            let candidate = Path::new(&base).join(path);
            if candidate.is_dir() {
                return Ok(candidate);
            }
        }
    }
    Err(Error::Model(format!(
        "model directory {} not found; expected a directory holding config.json, vocab.txt, \
         labels.json, weights.bin, and metadata.json (relative paths are also searched under \
         ${MODEL_DIR_ENV})",
        path.display()
    )))
}

fn read_lexicon(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(str::to_string)
        .collect())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    Ok(())
}

/// Manifest path for a command whose primary output is a single file.
fn sibling_manifest(out: &Path) -> PathBuf {
    let mut name = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    name.push_str("-manifest.json");
    out.with_file_name(name)
}
