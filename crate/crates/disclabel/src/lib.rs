//! Labeling of explicit discourse relations in raw text.
//!
//! The crate identifies discourse connectives ("but", "as a result", ...)
//! and recovers the exact token spans of their two arguments, then scores
//! predictions against gold annotations with exact-match precision, recall,
//! and F-score.
//!
//! The pipeline has two token-classification stages:
//!
//! 1. connective identification over each paragraph, distinguishing
//!    single-word and multiword connectives;
//! 2. argument extraction over a 100-word window centered on each detected
//!    connective, with IOB2 tags for Arg1 and Arg2.
//!
//! [`corpus`] holds the data model and ingestion, [`labeling`] the tag
//! schemes and windowing, [`classifier`] the trainable token classifiers,
//! [`pipeline`] end-to-end labeling, [`evaluation`] exact-match scoring and
//! error analyses, and [`cli`] the command-line entry points. [`synth`]
//! generates small synthetic corpora for tests and smoke training runs.

pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod labeling;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
