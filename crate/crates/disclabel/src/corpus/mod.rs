//! Canonical data model for documents and discourse relations, ingestion of
//! gold corpora and raw text, paragraph segmentation, and dataset statistics.

pub(crate) mod io;
mod stats;
mod tokenize;

pub use io::{load_conll_corpus, load_documents, load_relations, save_documents, save_relations};
pub use stats::{compute_span_stats, same_paragraph_fraction, SpanStats, SpanStatsRow};
pub use tokenize::tokenize_raw;

use std::collections::BTreeSet;
use std::fmt;

use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single token with byte offsets into the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    /// Byte offset of the first byte (0-based, inclusive).
    pub char_begin: usize,
    /// Byte offset one past the last byte (exclusive).
    pub char_end: usize,
    /// Position in the document token order.
    pub doc_index: usize,
}

/// A set of document token indices naming one relation component.
///
/// Spans may be discontinuous; set semantics rule out duplicates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TokenSpan(BTreeSet<usize>);

impl TokenSpan {
    pub fn new() -> Self {
        TokenSpan(BTreeSet::new())
    }

    pub fn from_range(range: std::ops::Range<usize>) -> Self {
        range.collect()
    }

    pub fn insert(&mut self, index: usize) {
        self.0.insert(index);
    }

    pub fn remove(&mut self, index: usize) {
        self.0.remove(&index);
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.contains(&index)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// `(min, max)` over the indices, or `None` when empty.
    pub fn extent(&self) -> Option<(usize, usize)> {
        Some((self.first()?, self.last()?))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_disjoint(&self, other: &TokenSpan) -> bool {
        self.0.is_disjoint(&other.0)
    }

    /// Indices in `self` or `other` but not both.
    pub fn symmetric_difference_len(&self, other: &TokenSpan) -> usize {
        self.0.symmetric_difference(&other.0).count()
    }

    /// Keeps only indices inside `[lo, hi)`.
    pub fn restrict(&self, lo: usize, hi: usize) -> TokenSpan {
        self.iter().filter(|&i| i >= lo && i < hi).collect()
    }

    /// Splits the span into maximal runs of consecutive indices.
    pub fn contiguous_runs(&self) -> Vec<(usize, usize)> {
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for idx in self.iter() {
            match runs.last_mut() {
                Some((_, end)) if *end + 1 == idx => *end = idx,
                _ => runs.push((idx, idx)),
            }
        }
        runs
    }
}

impl FromIterator<usize> for TokenSpan {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        TokenSpan(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a TokenSpan {
    type Item = usize;
    type IntoIter = std::iter::Copied<std::collections::btree_set::Iter<'a, usize>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

impl IntoIterator for TokenSpan {
    type Item = usize;
    type IntoIter = std::collections::btree_set::IntoIter<usize>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl fmt::Display for TokenSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .contiguous_runs()
            .iter()
            .map(|&(a, b)| {
                if a == b {
                    a.to_string()
                } else {
                    format!("{a}..{b}")
                }
            })
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

// Serialized as a sorted index array so discontinuity is lossless.
impl Serialize for TokenSpan {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for TokenSpan {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let indices = Vec::<usize>::deserialize(deserializer)?;
        Ok(indices.into_iter().collect())
    }
}

/// One paragraph of a document as a half-open token index range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Paragraph {
    pub index: usize,
    pub lo: usize,
    pub hi: usize,
}

/// An ordered token sequence with paragraph boundaries; the unit of parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub tokens: Vec<Token>,
    /// doc_index of the first token of each paragraph; contains 0 for
    /// nonempty documents.
    pub paragraph_breaks: BTreeSet<usize>,
    pub source_text: String,
}

impl Document {
    /// Builds a document from pre-tokenized text, deriving paragraph breaks.
    pub fn new(doc_id: impl Into<String>, source_text: impl Into<String>, tokens: Vec<Token>) -> Result<Self> {
        let source_text = source_text.into();
        let paragraph_breaks = segment_paragraphs(&source_text, &tokens);
        let doc = Document {
            doc_id: doc_id.into(),
            tokens,
            paragraph_breaks,
            source_text,
        };
        doc.validate()?;
        Ok(doc)
    }

    /// Tokenizes raw text and derives paragraph breaks.
    pub fn from_raw_text(doc_id: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        let tokens = tokenize_raw(&text);
        Document::new(doc_id, text, tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| -> Error {
            Error::validation(format!("<document {}>", self.doc_id), msg)
        };
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.char_begin >= tok.char_end {
                return Err(fail(format!("token {i} has empty char range")));
            }
            if tok.char_end > self.source_text.len()
                || !self.source_text.is_char_boundary(tok.char_begin)
                || !self.source_text.is_char_boundary(tok.char_end)
            {
                return Err(fail(format!("token {i} offsets exceed source text")));
            }
            if tok.doc_index != i {
                return Err(fail(format!("token {i} carries doc_index {}", tok.doc_index)));
            }
            if i > 0 && self.tokens[i - 1].char_begin >= tok.char_begin {
                return Err(fail(format!("tokens {} and {i} not ordered by char_begin", i - 1)));
            }
        }
        if !self.tokens.is_empty() && !self.paragraph_breaks.contains(&0) {
            return Err(fail("paragraph_breaks missing index 0".into()));
        }
        if let Some(&max) = self.paragraph_breaks.iter().max() {
            if max >= self.tokens.len() {
                return Err(fail(format!("paragraph break {max} out of range")));
            }
        }
        Ok(())
    }

    /// Paragraphs as token ranges; partitions the token sequence.
    pub fn paragraphs(&self) -> Vec<Paragraph> {
        let breaks: Vec<usize> = self.paragraph_breaks.iter().copied().collect();
        breaks
            .iter()
            .enumerate()
            .map(|(i, &lo)| Paragraph {
                index: i,
                lo,
                hi: breaks.get(i + 1).copied().unwrap_or(self.tokens.len()),
            })
            .collect()
    }

    /// Index of the paragraph containing `doc_index`.
    pub fn paragraph_index(&self, doc_index: usize) -> usize {
        self.paragraph_breaks
            .iter()
            .take_while(|&&b| b <= doc_index)
            .count()
            .saturating_sub(1)
    }

    /// Token texts for a half-open index range.
    pub fn words(&self, lo: usize, hi: usize) -> Vec<&str> {
        self.tokens[lo..hi].iter().map(|t| t.text.as_str()).collect()
    }

    /// Half-open character ranges of the span's contiguous token runs, in
    /// order. Out-of-range indices are skipped.
    pub fn char_runs(&self, span: &TokenSpan) -> Vec<(usize, usize)> {
        span.contiguous_runs()
            .into_iter()
            .filter(|&(_, last)| last < self.tokens.len())
            .map(|(first, last)| (self.tokens[first].char_begin, self.tokens[last].char_end))
            .collect()
    }
}

/// A discourse relation: connective plus two argument spans in one document.
///
/// `sense` is carried through from annotations, never predicted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub relation_id: String,
    pub doc_id: String,
    pub connective: TokenSpan,
    pub arg1: TokenSpan,
    pub arg2: TokenSpan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sense: Option<String>,
}

impl Relation {
    /// Checks component non-emptiness and index validity against the owning
    /// document.
    pub fn check_bounds(&self, doc: &Document) -> Result<()> {
        let fail = |msg: String| Error::validation(self.relation_id.clone(), msg);
        if doc.doc_id != self.doc_id {
            return Err(fail(format!(
                "validated against document {} but belongs to {}",
                doc.doc_id, self.doc_id
            )));
        }
        for (name, span) in self.components() {
            if span.is_empty() {
                return Err(fail(format!("{name} span is empty")));
            }
            if let Some((_, max)) = span.extent() {
                if max >= doc.len() {
                    return Err(fail(format!(
                        "{name} index {max} out of range for document {} ({} tokens)",
                        doc.doc_id,
                        doc.len()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn components(&self) -> [(&'static str, &TokenSpan); 3] {
        [
            ("connective", &self.connective),
            ("arg1", &self.arg1),
            ("arg2", &self.arg2),
        ]
    }

    pub fn components_disjoint(&self) -> bool {
        self.connective.is_disjoint(&self.arg1)
            && self.connective.is_disjoint(&self.arg2)
            && self.arg1.is_disjoint(&self.arg2)
    }

    /// Full validation: bounds plus pairwise disjointness.
    pub fn validate(&self, doc: &Document) -> Result<()> {
        self.check_bounds(doc)?;
        if !self.components_disjoint() {
            return Err(Error::validation(
                self.relation_id.clone(),
                "connective/arg1/arg2 are not pairwise disjoint",
            ));
        }
        Ok(())
    }

    /// `(min, max)` over the union of all three components.
    pub fn extent(&self) -> Option<(usize, usize)> {
        let mins = [self.connective.first(), self.arg1.first(), self.arg2.first()];
        let maxs = [self.connective.last(), self.arg1.last(), self.arg2.last()];
        let min = mins.iter().flatten().min().copied()?;
        let max = maxs.iter().flatten().max().copied()?;
        Some((min, max))
    }

    /// Word count from the first to the last token of the relation,
    /// inclusive.
    pub fn span_length(&self) -> usize {
        match self.extent() {
            Some((min, max)) => max - min + 1,
            None => 0,
        }
    }
}

/// Paragraph break indices for a token sequence.
///
/// A break is placed at token `t` when the source text between the previous
/// token and `t` contains at least two newline characters (blank-line rule);
/// index 0 is always included for nonempty token lists.
pub fn segment_paragraphs(source_text: &str, tokens: &[Token]) -> BTreeSet<usize> {
    let mut breaks = BTreeSet::new();
    if tokens.is_empty() {
        return breaks;
    }
    breaks.insert(0);
    for i in 1..tokens.len() {
        let gap_start = tokens[i - 1].char_end.min(tokens[i].char_begin);
        let gap = &source_text[gap_start..tokens[i].char_begin];
        if gap.bytes().filter(|&b| b == b'\n').count() >= 2 {
            breaks.insert(i);
        }
    }
    breaks
}
