//! Tag schemes for the two sub-tasks and the conversions between relations
//! and per-token tag sequences, plus window extraction around connectives.
//!
//! Connective identification runs over paragraphs with a 3-label scheme
//! (`NONE`/`CONN`/`MWCONN`); argument extraction runs over a fixed-size
//! window centered on the connective's first token with a 5-label IOB2
//! scheme (`NONE`/`ARG1-B`/`ARG1-I`/`ARG2-B`/`ARG2-I`).

use std::fmt;

use serde::de::{Deserializer, Error as _};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Paragraph, Relation, Token, TokenSpan};
use crate::error::{Error, Result};

/// Default argument window width in words.
pub const DEFAULT_WINDOW_SIZE: usize = 100;

/// Common surface of the two tag schemes: a fixed label vocabulary with a
/// stable index order, as classifiers and serialized artifacts see it.
pub trait TagScheme: Copy + Eq + std::fmt::Debug + Send + Sync + 'static {
    const COUNT: usize;
    fn labels() -> &'static [&'static str];
    fn index(self) -> usize;
    fn from_index(index: usize) -> Option<Self>;
}

impl TagScheme for ConnTag {
    const COUNT: usize = ConnTag::COUNT;

    fn labels() -> &'static [&'static str] {
        &ConnTag::LABELS
    }

    fn index(self) -> usize {
        ConnTag::index(self)
    }

    fn from_index(index: usize) -> Option<Self> {
        ConnTag::from_index(index)
    }
}

impl TagScheme for ArgTag {
    const COUNT: usize = ArgTag::COUNT;

    fn labels() -> &'static [&'static str] {
        &ArgTag::LABELS
    }

    fn index(self) -> usize {
        ArgTag::index(self)
    }

    fn from_index(index: usize) -> Option<Self> {
        ArgTag::from_index(index)
    }
}

/// Per-token label for connective identification.
///
/// `Conn` marks a token that alone constitutes a connective; `MwConn` marks
/// a token belonging to a multi-token connective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConnTag {
    None,
    Conn,
    MwConn,
}

impl ConnTag {
    pub const COUNT: usize = 3;
    pub const LABELS: [&'static str; Self::COUNT] = ["NONE", "CONN", "MWCONN"];

    pub fn all() -> [ConnTag; Self::COUNT] {
        [ConnTag::None, ConnTag::Conn, ConnTag::MwConn]
    }

    pub fn as_label(self) -> &'static str {
        Self::LABELS[self.index()]
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::all().into_iter().find(|t| t.as_label() == label)
    }

    pub fn index(self) -> usize {
        match self {
            ConnTag::None => 0,
            ConnTag::Conn => 1,
            ConnTag::MwConn => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::all().get(index).copied()
    }
}

/// Per-token label for argument extraction (IOB2 over two span kinds).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArgTag {
    None,
    Arg1B,
    Arg1I,
    Arg2B,
    Arg2I,
}

impl ArgTag {
    pub const COUNT: usize = 5;
    pub const LABELS: [&'static str; Self::COUNT] =
        ["NONE", "ARG1-B", "ARG1-I", "ARG2-B", "ARG2-I"];

    pub fn all() -> [ArgTag; Self::COUNT] {
        [
            ArgTag::None,
            ArgTag::Arg1B,
            ArgTag::Arg1I,
            ArgTag::Arg2B,
            ArgTag::Arg2I,
        ]
    }

    pub fn as_label(self) -> &'static str {
        Self::LABELS[self.index()]
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::all().into_iter().find(|t| t.as_label() == label)
    }

    pub fn index(self) -> usize {
        match self {
            ArgTag::None => 0,
            ArgTag::Arg1B => 1,
            ArgTag::Arg1I => 2,
            ArgTag::Arg2B => 3,
            ArgTag::Arg2I => 4,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::all().get(index).copied()
    }
}

macro_rules! tag_serde {
    ($tag:ty, $what:literal) => {
        impl fmt::Display for $tag {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_label())
            }
        }

        impl Serialize for $tag {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_label())
            }
        }

        impl<'de> Deserialize<'de> for $tag {
            fn deserialize<D: Deserializer<'de>>(
                deserializer: D,
            ) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                Self::from_label(&s)
                    .ok_or_else(|| D::Error::custom(format!(concat!("unknown ", $what, " label {:?}"), s)))
            }
        }
    };
}

tag_serde!(ConnTag, "connective tag");
tag_serde!(ArgTag, "argument tag");

/// A token range extracted around a connective, in document coordinates.
///
/// `center` is the doc_index of the connective's first token; the window is
/// the half-open range `[lo, hi)` which always contains the center and is
/// clipped (never shifted) at document edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub doc_id: String,
    pub center: usize,
    pub lo: usize,
    pub hi: usize,
}

impl Window {
    pub fn len(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn contains(&self, doc_index: usize) -> bool {
        (self.lo..self.hi).contains(&doc_index)
    }

    pub fn tokens<'a>(&self, doc: &'a Document) -> &'a [Token] {
        &doc.tokens[self.lo..self.hi]
    }

    pub fn words<'a>(&self, doc: &'a Document) -> Vec<&'a str> {
        doc.words(self.lo, self.hi)
    }
}

/// Identifies the text segment a tag sequence covers: a paragraph slice for
/// the connective task (`center` absent) or a window for the argument task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRef {
    pub doc_id: String,
    pub lo: usize,
    pub hi: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<usize>,
}

impl SegmentRef {
    pub fn for_paragraph(doc_id: impl Into<String>, paragraph: Paragraph) -> Self {
        SegmentRef {
            doc_id: doc_id.into(),
            lo: paragraph.lo,
            hi: paragraph.hi,
            center: None,
        }
    }

    pub fn for_window(window: &Window) -> Self {
        SegmentRef {
            doc_id: window.doc_id.clone(),
            lo: window.lo,
            hi: window.hi,
            center: Some(window.center),
        }
    }

    pub fn len(&self) -> usize {
        self.hi.saturating_sub(self.lo)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-token labels over one segment; one tag per token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSequence<T> {
    pub segment: SegmentRef,
    pub tags: Vec<T>,
}

impl<T> TagSequence<T> {
    pub fn new(segment: SegmentRef, tags: Vec<T>) -> Result<Self> {
        if segment.len() != tags.len() {
            return Err(Error::Labeling(format!(
                "segment [{}, {}) of {} covers {} tokens but {} tags were given",
                segment.lo,
                segment.hi,
                segment.doc_id,
                segment.len(),
                tags.len()
            )));
        }
        Ok(TagSequence { segment, tags })
    }

    pub fn words<'a>(&self, doc: &'a Document) -> Vec<&'a str> {
        doc.words(self.segment.lo, self.segment.hi)
    }
}

/// Gold connective tags for one paragraph.
///
/// Each token of a single-token connective is tagged `CONN`; each token of
/// a multi-token connective `MWCONN`; everything else `NONE`. Only the
/// in-paragraph part of each connective is considered. A token claimed by
/// two connectives is an encoding conflict naming both relations.
pub fn encode_connective_tags(
    doc: &Document,
    paragraph: Paragraph,
    relations: &[Relation],
) -> Result<TagSequence<ConnTag>> {
    let lo = paragraph.lo;
    let hi = paragraph.hi.min(doc.len());
    let mut tags = vec![ConnTag::None; hi - lo];
    // Remembers which relation claimed each slot so conflicts can be named.
    let mut claimed: Vec<Option<&str>> = vec![None; hi - lo];

    for rel in relations.iter().filter(|r| r.doc_id == doc.doc_id) {
        let tag = if rel.connective.len() >= 2 {
            ConnTag::MwConn
        } else {
            ConnTag::Conn
        };
        for idx in rel.connective.iter().filter(|&i| i >= lo && i < hi) {
            let slot = idx - lo;
            if let Some(other) = claimed[slot] {
                return Err(Error::EncodingConflict {
                    token: idx,
                    relation_a: other.to_string(),
                    relation_b: rel.relation_id.clone(),
                });
            }
            claimed[slot] = Some(&rel.relation_id);
            tags[slot] = tag;
        }
    }
    TagSequence::new(SegmentRef::for_paragraph(&doc.doc_id, paragraph), tags)
}

/// Connective spans decoded from a tag sequence over a segment starting at
/// document index `offset`.
///
/// Every `CONN` token yields its own single-token span; every maximal run
/// of consecutive `MWCONN` tokens yields one span. Runs are broken by
/// `NONE`, by `CONN`, and by the segment end. Total on all inputs.
pub fn decode_connective_tags(tags: &[ConnTag], offset: usize) -> Vec<TokenSpan> {
    let mut spans: Vec<TokenSpan> = Vec::new();
    let mut run: Option<TokenSpan> = None;
    for (i, &tag) in tags.iter().enumerate() {
        let idx = offset + i;
        match tag {
            ConnTag::MwConn => run.get_or_insert_with(TokenSpan::new).insert(idx),
            other => {
                if let Some(span) = run.take() {
                    spans.push(span);
                }
                if other == ConnTag::Conn {
                    spans.push([idx].into_iter().collect());
                }
            }
        }
    }
    spans.extend(run);
    spans
}

impl TagSequence<ConnTag> {
    /// Decoded connective spans in document coordinates.
    pub fn decode(&self) -> Vec<TokenSpan> {
        decode_connective_tags(&self.tags, self.segment.lo)
    }
}

/// The token window the argument classifier sees for one connective.
///
/// The window is centered on the connective's first token: `lo` is
/// `center - window_size/2` and `hi` is `center + window_size/2`, clipped
/// to document bounds without rebalancing, and always wide enough to
/// contain the center token itself.
pub fn extract_window(doc: &Document, connective: &TokenSpan, window_size: usize) -> Result<Window> {
    if window_size == 0 {
        return Err(Error::Config("window size must be at least 1".into()));
    }
    let center = connective.first().ok_or_else(|| {
        Error::Labeling("cannot center a window on an empty connective span".into())
    })?;
    if center >= doc.len() {
        return Err(Error::Labeling(format!(
            "connective start {center} out of range for document {} ({} tokens)",
            doc.doc_id,
            doc.len()
        )));
    }
    let half = window_size / 2;
    let lo = center.saturating_sub(half);
    let hi = (center + half).max(center + 1).min(doc.len());
    Ok(Window {
        doc_id: doc.doc_id.clone(),
        center,
        lo,
        hi,
    })
}

/// Gold argument tags for one relation over its window.
///
/// For each argument, the in-window token with the smallest doc_index gets
/// the `B` tag and every other in-window argument token gets `I` (including
/// tokens of later discontinuous segments). Connective tokens and all other
/// tokens get `NONE`. Argument tokens outside the window are silently
/// dropped.
pub fn encode_argument_tags(window: &Window, relation: &Relation) -> TagSequence<ArgTag> {
    let mut tags = vec![ArgTag::None; window.len()];
    for (span, b_tag, i_tag) in [
        (&relation.arg1, ArgTag::Arg1B, ArgTag::Arg1I),
        (&relation.arg2, ArgTag::Arg2B, ArgTag::Arg2I),
    ] {
        let mut first = true;
        for idx in span.iter().filter(|&i| window.contains(i)) {
            tags[idx - window.lo] = if first { b_tag } else { i_tag };
            first = false;
        }
    }
    TagSequence {
        segment: SegmentRef::for_window(window),
        tags,
    }
}

/// Argument spans decoded from window tags, in document coordinates.
///
/// Union semantics: an argument is the set of window tokens carrying either
/// of its tags. Multiple `B` tags are tolerated and an `I` with no
/// preceding `B` still counts; empty arguments are permitted at this layer.
pub fn decode_argument_tags(tags: &[ArgTag], window: &Window) -> (TokenSpan, TokenSpan) {
    let mut arg1 = TokenSpan::new();
    let mut arg2 = TokenSpan::new();
    for (i, tag) in tags.iter().enumerate() {
        let idx = window.lo + i;
        match tag {
            ArgTag::Arg1B | ArgTag::Arg1I => arg1.insert(idx),
            ArgTag::Arg2B | ArgTag::Arg2I => arg2.insert(idx),
            ArgTag::None => {}
        }
    }
    (arg1, arg2)
}

impl TagSequence<ArgTag> {
    /// Decoded (arg1, arg2) in document coordinates.
    pub fn decode(&self) -> (TokenSpan, TokenSpan) {
        let window = Window {
            doc_id: self.segment.doc_id.clone(),
            center: self.segment.center.unwrap_or(self.segment.lo),
            lo: self.segment.lo,
            hi: self.segment.hi,
        };
        decode_argument_tags(&self.tags, &window)
    }
}

/// One connective-task training instance per paragraph of the document.
pub fn connective_instances(
    doc: &Document,
    relations: &[Relation],
) -> Result<Vec<TagSequence<ConnTag>>> {
    doc.paragraphs()
        .into_iter()
        .map(|p| encode_connective_tags(doc, p, relations))
        .collect()
}

/// One argument-task training instance per relation: the window around the
/// gold connective, tagged for that relation alone.
///
/// Relations sharing a window each get their own instance, so overlapping
/// arguments never collide inside a single tag sequence.
pub fn argument_instances(
    doc: &Document,
    relations: &[Relation],
    window_size: usize,
) -> Result<Vec<TagSequence<ArgTag>>> {
    relations
        .iter()
        .filter(|r| r.doc_id == doc.doc_id)
        .map(|rel| {
            let window = extract_window(doc, &rel.connective, window_size)?;
            Ok(encode_argument_tags(&window, rel))
        })
        .collect()
}
