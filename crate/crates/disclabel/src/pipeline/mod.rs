//! Two-stage labeling pipeline: find connectives per paragraph, then
//! extract both argument spans from the window around each one.
//!
//! The connective-first order is load-bearing: every predicted relation is
//! anchored on exactly one decoded connective span, so relations sharing
//! argument tokens come out as separate predictions and never need to be
//! disentangled afterwards.

use serde::{Deserialize, Serialize};

use crate::classifier::{Task, TokenClassifier};
use crate::corpus::{Document, Relation, TokenSpan};
use crate::error::{Error, Result};
use crate::labeling::{
    decode_argument_tags, decode_connective_tags, extract_window, ArgTag, ConnTag, SegmentRef,
    DEFAULT_WINDOW_SIZE,
};

/// Pipeline behavior knobs; the models themselves live on [`Pipeline`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Token count of the argument extraction window around a connective.
    pub window_size: usize,
    /// Drop predictions whose decoded arg1 or arg2 came out empty. An
    /// exact-match scorer can never credit them, but keeping them helps
    /// error analysis.
    pub drop_empty_arguments: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { window_size: DEFAULT_WINDOW_SIZE, drop_empty_arguments: true }
    }
}

/// Where a prediction came from: which paragraph anchored it, which window
/// the arguments were read from, and which models produced the tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub paragraph: usize,
    pub window_lo: usize,
    pub window_hi: usize,
    pub connective_model: String,
    pub argument_model: String,
}

/// A half-open byte range into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharSpan {
    pub begin: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.begin..self.end]
    }
}

/// Character ranges for each component, one range per contiguous token run.
/// Only attached when predicting over raw text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCharSpans {
    pub connective: Vec<CharSpan>,
    pub arg1: Vec<CharSpan>,
    pub arg2: Vec<CharSpan>,
}

impl ComponentCharSpans {
    fn of(doc: &Document, relation: &PredictedRelation) -> Self {
        let runs = |span: &TokenSpan| {
            doc.char_runs(span)
                .into_iter()
                .map(|(begin, end)| CharSpan { begin, end })
                .collect()
        };
        ComponentCharSpans {
            connective: runs(&relation.connective),
            arg1: runs(&relation.arg1),
            arg2: runs(&relation.arg2),
        }
    }
}

/// One pipeline output: the shape of a [`Relation`] plus provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedRelation {
    pub relation_id: String,
    pub doc_id: String,
    pub connective: TokenSpan,
    pub arg1: TokenSpan,
    pub arg2: TokenSpan,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_spans: Option<ComponentCharSpans>,
}

impl PredictedRelation {
    /// Strips provenance for scoring against gold annotations.
    pub fn to_relation(&self) -> Relation {
        Relation {
            relation_id: self.relation_id.clone(),
            doc_id: self.doc_id.clone(),
            connective: self.connective.clone(),
            arg1: self.arg1.clone(),
            arg2: self.arg2.clone(),
            sense: None,
        }
    }
}

/// Decodes connective spans, never letting a run cross a model's hard-split
/// boundary: each sub-slice between split points decodes independently.
fn decode_with_splits(tags: &[ConnTag], offset: usize, splits: &[usize]) -> Vec<TokenSpan> {
    let mut bounds: Vec<usize> = splits
        .iter()
        .copied()
        .filter(|&s| s > 0 && s < tags.len())
        .collect();
    bounds.sort_unstable();
    bounds.dedup();
    bounds.push(tags.len());

    let mut spans = Vec::new();
    let mut start = 0;
    for end in bounds {
        spans.extend(decode_connective_tags(&tags[start..end], offset + start));
        start = end;
    }
    spans
}

/// The two models plus config, ready to label documents.
pub struct Pipeline<'a> {
    connective_model: &'a dyn TokenClassifier,
    argument_model: &'a dyn TokenClassifier,
    config: PipelineConfig,
}

impl std::fmt::Debug for Pipeline<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline")
            .field("connective_model", &self.connective_model.model_id())
            .field("argument_model", &self.argument_model.model_id())
            .field("config", &self.config)
            .finish()
    }
}

impl<'a> Pipeline<'a> {
    pub fn new(
        connective_model: &'a dyn TokenClassifier,
        argument_model: &'a dyn TokenClassifier,
        config: PipelineConfig,
    ) -> Result<Self> {
        if connective_model.task() != Task::Connective {
            return Err(Error::Config(format!(
                "pipeline needs a connective model in first position, got a {} model",
                connective_model.task().as_str()
            )));
        }
        if argument_model.task() != Task::Argument {
            return Err(Error::Config(format!(
                "pipeline needs an argument model in second position, got a {} model",
                argument_model.task().as_str()
            )));
        }
        if config.window_size == 0 {
            return Err(Error::Config("pipeline window size must be at least 1".into()));
        }
        Ok(Pipeline { connective_model, argument_model, config })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Labels one document: per paragraph, tag and decode connectives; per
    /// connective, tag the window and decode both arguments. One predicted
    /// relation per decoded connective span (minus empty-argument drops).
    pub fn label_document(&self, doc: &Document) -> Result<Vec<PredictedRelation>> {
        let mut out = Vec::new();
        if doc.is_empty() {
            return Ok(out);
        }
        let mut counter = 0;
        for paragraph in doc.paragraphs() {
            let words = doc.words(paragraph.lo, paragraph.hi);
            let segment = SegmentRef::for_paragraph(&doc.doc_id, paragraph);
            let tags = self.predict_tags::<ConnTag>(self.connective_model, &words, &segment)?;
            let splits = self.connective_model.hard_split_points(&words)?;
            for connective in decode_with_splits(&tags, paragraph.lo, &splits) {
                if let Some(rel) = self.extract_arguments(doc, paragraph.index, connective, counter)? {
                    out.push(rel);
                    counter += 1;
                }
            }
        }
        Ok(out)
    }

    /// Tokenizes raw text, labels it, and attaches character ranges so the
    /// predictions can be read back as substrings of the input.
    pub fn label_text(
        &self,
        doc_id: impl Into<String>,
        raw_text: &str,
    ) -> Result<(Document, Vec<PredictedRelation>)> {
        let doc = Document::from_raw_text(doc_id, raw_text)?;
        let mut relations = self.label_document(&doc)?;
        for relation in &mut relations {
            relation.char_spans = Some(ComponentCharSpans::of(&doc, relation));
        }
        Ok((doc, relations))
    }

    fn predict_tags<T: crate::labeling::TagScheme>(
        &self,
        model: &dyn TokenClassifier,
        words: &[&str],
        segment: &SegmentRef,
    ) -> Result<Vec<T>> {
        let indices = model.predict(words, segment)?;
        if indices.len() != words.len() {
            return Err(Error::Model(format!(
                "{} returned {} labels for {} words",
                model.model_id(),
                indices.len(),
                words.len()
            )));
        }
        indices
            .into_iter()
            .map(|i| {
                T::from_index(i).ok_or_else(|| {
                    Error::Model(format!(
                        "{} produced label index {i}, outside its {}-label vocabulary",
                        model.model_id(),
                        T::COUNT
                    ))
                })
            })
            .collect()
    }

    fn extract_arguments(
        &self,
        doc: &Document,
        paragraph: usize,
        connective: TokenSpan,
        counter: usize,
    ) -> Result<Option<PredictedRelation>> {
        let window = extract_window(doc, &connective, self.config.window_size)?;
        let words = window.words(doc);
        let segment = SegmentRef::for_window(&window);
        let tags = self.predict_tags::<ArgTag>(self.argument_model, &words, &segment)?;
        let (mut arg1, mut arg2) = decode_argument_tags(&tags, &window);
        // The argument decoder cannot produce indices outside the window,
        // but nothing stops a model from tagging the connective's own
        // tokens; keep components disjoint by construction.
        for i in &connective {
            arg1.remove(i);
            arg2.remove(i);
        }
        if self.config.drop_empty_arguments && (arg1.is_empty() || arg2.is_empty()) {
            return Ok(None);
        }
        Ok(Some(PredictedRelation {
            relation_id: format!("{}-pred{}", doc.doc_id, counter),
            doc_id: doc.doc_id.clone(),
            connective,
            arg1,
            arg2,
            provenance: Provenance {
                paragraph,
                window_lo: window.lo,
                window_hi: window.hi,
                connective_model: self.connective_model.model_id(),
                argument_model: self.argument_model.model_id(),
            },
            char_spans: None,
        }))
    }
}
