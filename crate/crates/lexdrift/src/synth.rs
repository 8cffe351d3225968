//! Synthetic corpus pairs with planted semantic changes.
//!
//! Vocabulary is split into topic clusters with disjoint context words, each
//! cluster carrying a fixed unigram distribution that is identical in both
//! corpora. Sentences are fixed-length windows around a center token. A
//! planted word draws its contexts from its home cluster; in the second
//! corpus a changed word draws a fraction `p` of its occurrences from a
//! designated other cluster instead. Planted occurrence counts are equal
//! across the two corpora, so relative frequency carries no signal — only
//! the context shift does.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::corpus::Corpus;
use crate::eval::GoldData;
use crate::{Error, Result};

/// Tokens per generated sentence (center word plus four context words on
/// each side).
pub const SENTENCE_LEN: usize = 9;

/// Fraction of sentences centered on planted words.
const PLANTED_SENTENCE_SHARE: f64 = 0.10;

/// Rank offset of the within-cluster unigram weight 1/(rank + offset).
/// The large offset keeps the distribution shallow, so ordinary words get
/// occurrence counts on the same scale as the planted ones and the
/// vocabulary-wide divergence spread brackets the planted noise floor.
const WEIGHT_RANK_OFFSET: f64 = 50.0;

/// Background drift only touches words below this rank fraction, keeping
/// the frequent (pivot-band) words semantically fixed.
const DRIFT_MIN_RANK_FRACTION: f64 = 0.4;

#[derive(Debug, Clone)]
pub struct SynthSpec {
    /// Total filler vocabulary size, split evenly across clusters.
    pub vocab_size: usize,
    pub tokens_per_corpus: usize,
    pub clusters: usize,
    /// Planted-change words with their mixing proportion p: the fraction
    /// of second-corpus occurrences drawn from another cluster's contexts.
    pub changed: Vec<(String, f64)>,
    /// Planted words whose contexts stay put; gold label 0, score 0.
    pub stable: Vec<String>,
    /// Fraction of filler words given a small random context drift in the
    /// second corpus. Real corpora show a broad spectrum of divergences;
    /// a non-zero value reproduces that spread so percentile calibration
    /// has something to measure. 0 keeps every filler perfectly stable.
    pub background_drift: f64,
    pub seed: u64,
}

impl SynthSpec {
    fn planted(&self) -> impl Iterator<Item = (&str, f64)> {
        self.changed
            .iter()
            .map(|(w, p)| (w.as_str(), *p))
            .chain(self.stable.iter().map(|w| (w.as_str(), 0.0)))
    }

    fn planted_count(&self) -> usize {
        self.changed.len() + self.stable.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters < 2 {
            return Err(Error::SynthSpec(
                "need at least two clusters to plant a change".into(),
            ));
        }
        if self.vocab_size < self.clusters {
            return Err(Error::SynthSpec(
                "vocab size must cover at least one word per cluster".into(),
            ));
        }
        if self.planted_count() == 0 {
            return Err(Error::SynthSpec("no planted words".into()));
        }
        if self.planted_count() > self.vocab_size {
            return Err(Error::SynthSpec(
                "more planted words than vocabulary size".into(),
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (w, p) in self.planted() {
            if w.is_empty() {
                return Err(Error::SynthSpec("empty planted word".into()));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::SynthSpec(format!(
                    "mixing proportion {p} for {w:?} outside [0, 1]"
                )));
            }
            if !seen.insert(w) {
                return Err(Error::SynthSpec(format!("duplicate planted word {w:?}")));
            }
        }
        if !(0.0..=1.0).contains(&self.background_drift) {
            return Err(Error::SynthSpec(format!(
                "background drift {} outside [0, 1]",
                self.background_drift
            )));
        }
        let per_word = self.occurrences_per_word();
        if per_word == 0 {
            return Err(Error::SynthSpec(
                "corpus too small for the planted words; raise tokens_per_corpus".into(),
            ));
        }
        Ok(())
    }

    fn sentences_per_corpus(&self) -> usize {
        self.tokens_per_corpus / SENTENCE_LEN
    }

    fn occurrences_per_word(&self) -> usize {
        let planted_sentences =
            (self.sentences_per_corpus() as f64 * PLANTED_SENTENCE_SHARE) as usize;
        planted_sentences / self.planted_count().max(1)
    }
}

/// Per-cluster unigram sampler over its filler words, weight 1/(rank+2).
struct ClusterModel {
    words: Vec<Vec<String>>, // per cluster
    cdf: Vec<f64>,           // shared shape across clusters
    /// Per cluster and word: probability that a second-corpus sentence
    /// centered on it draws contexts from the next cluster instead.
    drift: Vec<Vec<f64>>,
}

impl ClusterModel {
    fn new(spec: &SynthSpec) -> Self {
        let per_cluster = spec.vocab_size / spec.clusters;
        let words: Vec<Vec<String>> = (0..spec.clusters)
            .map(|c| {
                (0..per_cluster)
                    .map(|j| format!("c{c}w{j:04}"))
                    .collect()
            })
            .collect();
        let mut cdf = Vec::with_capacity(per_cluster);
        let mut acc = 0.0;
        for j in 0..per_cluster {
            acc += 1.0 / (j as f64 + WEIGHT_RANK_OFFSET);
            cdf.push(acc);
        }
        let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
        rng.set_stream(3);
        let drift_min_rank = (per_cluster as f64 * DRIFT_MIN_RANK_FRACTION) as usize;
        let drift = (0..spec.clusters)
            .map(|_| {
                (0..per_cluster)
                    .map(|j| {
                        if j >= drift_min_rank && rng.gen::<f64>() < spec.background_drift {
                            rng.gen::<f64>()
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        ClusterModel { words, cdf, drift }
    }

    fn draw_index(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cdf.last().expect("non-empty cluster");
        let r = rng.gen::<f64>() * total;
        self.cdf.partition_point(|&c| c <= r)
    }

    fn draw(&self, cluster: usize, rng: &mut impl Rng) -> &str {
        let j = self.draw_index(rng);
        &self.words[cluster][j]
    }

    fn sentence_around(&self, center: &str, cluster: usize, rng: &mut impl Rng) -> Vec<String> {
        let mut sentence = Vec::with_capacity(SENTENCE_LEN);
        for pos in 0..SENTENCE_LEN {
            if pos == SENTENCE_LEN / 2 {
                sentence.push(center.to_string());
            } else {
                sentence.push(self.draw(cluster, rng).to_string());
            }
        }
        sentence
    }
}

fn generate_corpus(
    spec: &SynthSpec,
    model: &ClusterModel,
    second_period: bool,
    source_id: &str,
) -> Corpus {
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    rng.set_stream(if second_period { 2 } else { 1 });

    let n_sentences = spec.sentences_per_corpus();
    let occ = spec.occurrences_per_word();
    let mut sentences: Vec<Vec<String>> = Vec::with_capacity(n_sentences);

    for (i, (word, p)) in spec.planted().enumerate() {
        let home = i % spec.clusters;
        let target = (home + 1) % spec.clusters;
        // Exactly round(p * occ) occurrences shift cluster in t2.
        let shifted = if second_period {
            (p * occ as f64).round() as usize
        } else {
            0
        };
        for o in 0..occ {
            let cluster = if o < shifted { target } else { home };
            sentences.push(model.sentence_around(word, cluster, &mut rng));
        }
    }

    let filler_sentences = n_sentences.saturating_sub(sentences.len());
    for s in 0..filler_sentences {
        let cluster = s % spec.clusters;
        let center_idx = model.draw_index(&mut rng);
        let center = model.words[cluster][center_idx].clone();
        let drift = model.drift[cluster][center_idx];
        let context_cluster = if second_period && drift > 0.0 && rng.gen::<f64>() < drift {
            (cluster + 1) % spec.clusters
        } else {
            cluster
        };
        sentences.push(model.sentence_around(&center, context_cluster, &mut rng));
    }

    // Interleave planted and filler sentences.
    for i in (1..sentences.len()).rev() {
        let j = rng.gen_range(0..=i);
        sentences.swap(i, j);
    }
    Corpus::from_sentences(source_id, sentences)
}

/// Generate the two corpora and the gold annotations for all planted words.
pub fn generate(spec: &SynthSpec) -> Result<(Corpus, Corpus, GoldData)> {
    spec.validate()?;
    let model = ClusterModel::new(spec);
    let t1 = generate_corpus(spec, &model, false, "synth-t1");
    let t2 = generate_corpus(spec, &model, true, "synth-t2");

    let mut gold = GoldData::default();
    for (word, p) in spec.planted() {
        gold.binary.insert(word.to_string(), u8::from(p > 0.0));
        gold.graded.insert(word.to_string(), p);
    }
    Ok((t1, t2, gold))
}

/// Write a corpus in the ingestion format: one sentence per line,
/// space-separated tokens.
pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for sentence in corpus.sentences() {
        writeln!(out, "{}", sentence.join(" ")).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
