//! Corpus ingestion and frequency statistics.
//!
//! Input is plain UTF-8 text, one sentence per line, whitespace-separated
//! tokens. Tokens are opaque strings: no lemmatization, no POS handling
//! (suffixes like `_nn` on some target lists are kept verbatim).

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// A tokenized corpus for one time period or domain.
///
/// Empty sentences are never stored and `token_count` always equals the sum
/// of sentence lengths; both are enforced at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    source_id: String,
    sentences: Vec<Vec<String>>,
    token_count: usize,
}

impl Corpus {
    /// Build a corpus from pre-tokenized sentences, dropping empty ones.
    pub fn from_sentences(source_id: impl Into<String>, sentences: Vec<Vec<String>>) -> Self {
        let sentences: Vec<Vec<String>> =
            sentences.into_iter().filter(|s| !s.is_empty()).collect();
        let token_count = sentences.iter().map(Vec::len).sum();
        Corpus {
            source_id: source_id.into(),
            sentences,
            token_count,
        }
    }

    /// Tokenize one-sentence-per-line text. Splits on Unicode whitespace;
    /// empty lines are dropped.
    pub fn from_text(source_id: impl Into<String>, text: &str, lowercase: bool) -> Self {
        let sentences = text
            .lines()
            .map(|line| {
                line.split_whitespace()
                    .map(|tok| {
                        if lowercase {
                            tok.to_lowercase()
                        } else {
                            tok.to_string()
                        }
                    })
                    .collect::<Vec<String>>()
            })
            .filter(|s: &Vec<String>| !s.is_empty())
            .collect();
        Corpus::from_sentences(source_id, sentences)
    }

    /// Decode raw bytes as UTF-8 and tokenize. Invalid input reports the
    /// byte offset of the first bad sequence.
    pub fn from_bytes(
        source_id: impl Into<String>,
        bytes: &[u8],
        lowercase: bool,
        origin: &Path,
    ) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Decode {
            path: origin.to_path_buf(),
            offset: e.valid_up_to(),
        })?;
        Ok(Corpus::from_text(source_id, text, lowercase))
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn sentences(&self) -> &[Vec<String>] {
        &self.sentences
    }

    pub fn token_count(&self) -> usize {
        self.token_count
    }

    pub fn is_empty(&self) -> bool {
        self.token_count == 0
    }
}

/// Load a corpus from a file: UTF-8, one sentence per line.
///
/// The file's stem becomes the corpus `source_id`.
pub fn load_corpus(path: &Path, lowercase: bool) -> Result<Corpus> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let source_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Corpus::from_bytes(source_id, &bytes, lowercase, path)
}

/// Per-corpus token counts and relative frequencies.
#[derive(Debug, Clone)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    total: u64,
}

impl FrequencyTable {
    /// Build a table from raw counts. Zero counts and an empty map are
    /// rejected.
    pub fn from_counts(counts: HashMap<String, u64>) -> Result<Self> {
        if counts.is_empty() || counts.values().any(|&c| c == 0) {
            return Err(Error::EmptyCorpus);
        }
        let total = counts.values().sum();
        Ok(FrequencyTable { counts, total })
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    /// Relative frequency count/total, or `None` for unseen words.
    pub fn rel_freq(&self, word: &str) -> Option<f64> {
        self.counts
            .get(word)
            .map(|&c| c as f64 / self.total as f64)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.counts.contains_key(word)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct words.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }

    /// Words ranked by descending count, ties broken lexicographically.
    pub fn ranked_words(&self) -> Vec<&str> {
        let mut words: Vec<(&str, u64)> = self.iter().collect();
        words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        words.into_iter().map(|(w, _)| w).collect()
    }
}

/// Count every token occurrence in the corpus.
///
/// Frequencies are computed on the full token stream, before any
/// min-count vocabulary pruning.
pub fn count_frequencies(corpus: &Corpus) -> Result<FrequencyTable> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    for sentence in corpus.sentences() {
        for token in sentence {
            *counts.entry(token.clone()).or_insert(0) += 1;
        }
    }
    let total = counts.values().sum();
    debug_assert_eq!(total, corpus.token_count() as u64);
    Ok(FrequencyTable { counts, total })
}

/// Relative-frequency ratio `rel_t1(w) / rel_t2(w)`, defined only when the
/// word occurs in both tables.
pub fn frequency_ratio(word: &str, f1: &FrequencyTable, f2: &FrequencyTable) -> Option<f64> {
    match (f1.rel_freq(word), f2.rel_freq(word)) {
        (Some(a), Some(b)) => Some(a / b),
        _ => None,
    }
}
