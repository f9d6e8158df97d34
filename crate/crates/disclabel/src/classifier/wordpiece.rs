//! Greedy longest-match subword tokenizer with `##` continuation pieces.
//!
//! Vocabularies are either loaded from a `vocab.txt` (one token per line,
//! line number = id) or built from training data: all seen characters plus
//! frequent whole words, so training text never degrades to `[UNK]`.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const PAD: &str = "[PAD]";
pub const UNK: &str = "[UNK]";
pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";

/// Words longer than this many characters map straight to `[UNK]`.
const MAX_WORD_CHARS: usize = 100;

#[derive(Debug, Clone)]
pub struct WordPiece {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    pad_id: usize,
    unk_id: usize,
    cls_id: usize,
    sep_id: usize,
}

impl WordPiece {
    /// Builds the tokenizer from an explicit token list. The four special
    /// tokens must be present; duplicate tokens are rejected.
    pub fn from_vocab(tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (id, tok) in tokens.iter().enumerate() {
            if index.insert(tok.clone(), id).is_some() {
                return Err(Error::Model(format!("duplicate vocabulary token {tok:?}")));
            }
        }
        let special = |name: &str| -> Result<usize> {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::Model(format!("vocabulary is missing the {name} token")))
        };
        Ok(WordPiece {
            pad_id: special(PAD)?,
            unk_id: special(UNK)?,
            cls_id: special(CLS)?,
            sep_id: special(SEP)?,
            tokens,
            index,
        })
    }

    /// Builds a vocabulary from training words: specials, then every seen
    /// character (word-initial and `##` continuation forms), then whole
    /// words with frequency ≥ `min_freq`, most frequent first, capped at
    /// `max_vocab` entries. Character coverage keeps training words free of
    /// `[UNK]` even when the word list is truncated.
    pub fn build<'a>(
        words: impl IntoIterator<Item = &'a str>,
        min_freq: usize,
        max_vocab: usize,
    ) -> Result<Self> {
        let mut freq: HashMap<&str, usize> = HashMap::new();
        for w in words {
            *freq.entry(w).or_default() += 1;
        }

        let mut tokens: Vec<String> = vec![
            PAD.to_string(),
            UNK.to_string(),
            CLS.to_string(),
            SEP.to_string(),
        ];
        let mut seen: HashMap<String, ()> = tokens.iter().cloned().map(|t| (t, ())).collect();
        let mut push = |tokens: &mut Vec<String>, tok: String| {
            if seen.insert(tok.clone(), ()).is_none() {
                tokens.push(tok);
            }
        };

        let mut chars: Vec<String> = Vec::new();
        for w in freq.keys() {
            for (i, c) in w.chars().enumerate() {
                chars.push(if i == 0 {
                    c.to_string()
                } else {
                    format!("##{c}")
                });
            }
        }
        chars.sort();
        chars.dedup();
        for c in chars {
            push(&mut tokens, c);
        }

        let mut by_freq: Vec<(&str, usize)> = freq
            .into_iter()
            .filter(|&(w, n)| n >= min_freq && w.chars().count() > 1)
            .collect();
        by_freq.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        for (w, _) in by_freq {
            if tokens.len() >= max_vocab {
                break;
            }
            push(&mut tokens, w.to_string());
        }

        WordPiece::from_vocab(tokens)
    }

    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    pub fn pad_id(&self) -> usize {
        self.pad_id
    }

    pub fn unk_id(&self) -> usize {
        self.unk_id
    }

    pub fn cls_id(&self) -> usize {
        self.cls_id
    }

    pub fn sep_id(&self) -> usize {
        self.sep_id
    }

    pub fn id_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    /// Subtoken ids for one word: greedy longest-match from the left, with
    /// continuation pieces carrying the `##` prefix. A word with any
    /// uncoverable remainder becomes a single `[UNK]`; output is never
    /// empty.
    pub fn encode_word(&self, word: &str) -> Vec<usize> {
        if word.is_empty() || word.chars().count() > MAX_WORD_CHARS {
            return vec![self.unk_id];
        }
        let boundaries: Vec<usize> = word
            .char_indices()
            .map(|(i, _)| i)
            .chain(std::iter::once(word.len()))
            .collect();

        let mut ids = Vec::new();
        let mut start = 0;
        while start < boundaries.len() - 1 {
            let mut matched = None;
            for end in (start + 1..boundaries.len()).rev() {
                let piece = &word[boundaries[start]..boundaries[end]];
                let id = if start == 0 {
                    self.index.get(piece)
                } else {
                    self.index.get(&format!("##{piece}"))
                };
                if let Some(&id) = id {
                    matched = Some((id, end));
                    break;
                }
            }
            match matched {
                Some((id, end)) => {
                    ids.push(id);
                    start = end;
                }
                None => return vec![self.unk_id],
            }
        }
        ids
    }

    /// Writes the vocabulary as one token per line.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.tokens.join("\n") + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        WordPiece::from_vocab(text.lines().map(str::to_string).collect())
    }
}
