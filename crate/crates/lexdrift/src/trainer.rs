//! Subword skip-gram training with negative sampling.
//!
//! For every (center, context) pair inside a per-position window drawn
//! uniformly from 1..=c, the objective maximizes
//! `log s(v_ctx . h) + sum_k log s(-v_neg . h)` where `h` is the average of
//! the center word's input row and its n-gram bucket rows. Updates apply the
//! exact gradient of that pair loss (each contributing input row receives
//! its 1/n share).
//!
//! Multiple workers update the shared matrices without locking; lost updates
//! are tolerated and results are then non-deterministic. With one worker and
//! a fixed seed, training is bit-reproducible.

use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::corpus::{count_frequencies, Corpus, FrequencyTable};
use crate::embedding::{EmbeddingSpace, SubwordTable};
use crate::subword::{bucket_indices, DEFAULT_BUCKETS};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct TrainerConfig {
    /// Embedding dimension d.
    pub dim: usize,
    /// Maximum window size c; the per-position radius is uniform in 1..=c.
    pub window: usize,
    pub epochs: usize,
    /// Negative samples per positive pair.
    pub negatives: usize,
    /// Initial learning rate, decayed linearly by processed-token fraction.
    pub learning_rate: f64,
    /// Words below this count are dropped from the training vocabulary.
    pub min_count: u64,
    /// Character n-gram length range for subword buckets.
    pub ngram_range: (usize, usize),
    /// Number of hash buckets; 0 disables subword vectors entirely.
    pub bucket_count: usize,
    /// Frequent-word subsampling threshold t: occurrences of a word with
    /// relative frequency f are discarded with probability 1 - sqrt(t/f).
    /// 0 disables subsampling.
    pub subsample: f64,
    pub workers: usize,
    pub seed: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            dim: 100,
            window: 7,
            epochs: 5,
            negatives: 5,
            learning_rate: 0.025,
            min_count: 5,
            ngram_range: (3, 6),
            bucket_count: DEFAULT_BUCKETS,
            subsample: 1e-4,
            workers: 1,
            seed: 42,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if self.negatives == 0 {
            return Err(Error::Config("negatives must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        let (lo, hi) = self.ngram_range;
        if lo == 0 || lo > hi {
            return Err(Error::Config(format!("invalid n-gram range ({lo},{hi})")));
        }
        if self.subsample < 0.0 {
            return Err(Error::Config("subsample threshold must be >= 0".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Training vocabulary: words with count >= min_count in a stable order
/// (descending count, ties lexicographic).
#[derive(Debug, Clone)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: std::collections::HashMap<String, usize>,
    total_tokens: u64,
}

impl Vocabulary {
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Total retained token occurrences (sum of vocabulary counts).
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn from_frequency_table(freq: &FrequencyTable, min_count: u64) -> Result<Self> {
        let mut entries: Vec<(&str, u64)> =
            freq.iter().filter(|&(_, c)| c >= min_count).collect();
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let words: Vec<String> = entries.iter().map(|(w, _)| (*w).to_string()).collect();
        let counts: Vec<u64> = entries.iter().map(|&(_, c)| c).collect();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let total_tokens = counts.iter().sum();
        Ok(Vocabulary {
            words,
            counts,
            index,
            total_tokens,
        })
    }
}

pub fn build_vocab(corpus: &Corpus, cfg: &TrainerConfig) -> Result<Vocabulary> {
    let freq = count_frequencies(corpus)?;
    Vocabulary::from_frequency_table(&freq, cfg.min_count)
}

/// f32 stored as atomic bits; relaxed ordering everywhere (asynchronous
/// SGD tolerates lost updates).
struct AtomicF32(AtomicU32);

impl AtomicF32 {
    fn new(v: f32) -> Self {
        AtomicF32(AtomicU32::new(v.to_bits()))
    }

    fn get(&self) -> f32 {
        f32::from_bits(self.0.load(Ordering::Relaxed))
    }

    fn set(&self, v: f32) {
        self.0.store(v.to_bits(), Ordering::Relaxed);
    }

    fn add(&self, v: f32) {
        self.set(self.get() + v);
    }
}

struct AtomicMatrix {
    rows: usize,
    dim: usize,
    data: Vec<AtomicF32>,
}

impl AtomicMatrix {
    fn zeros(rows: usize, dim: usize) -> Self {
        let data = (0..rows * dim).map(|_| AtomicF32::new(0.0)).collect();
        AtomicMatrix { rows, dim, data }
    }

    fn uniform(rows: usize, dim: usize, half_range: f32, rng: &mut impl Rng) -> Self {
        let data = (0..rows * dim)
            .map(|_| AtomicF32::new(rng.gen_range(-half_range..half_range)))
            .collect();
        AtomicMatrix { rows, dim, data }
    }

    fn row(&self, r: usize) -> &[AtomicF32] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    fn row_f32(&self, r: usize) -> Vec<f32> {
        self.row(r).iter().map(AtomicF32::get).collect()
    }
}

/// One gradient of the pair loss, grouped by touched row.
#[derive(Debug, Clone)]
pub struct PairGradients {
    /// (input row, dL/drow) — duplicated n-gram rows are merged.
    pub input: Vec<(usize, Vec<f64>)>,
    /// (output row, dL/drow) — duplicated negatives are merged.
    pub output: Vec<(usize, Vec<f64>)>,
}

/// Shared SGD state: input matrix (vocabulary rows then bucket rows),
/// output matrix, and the unigram^0.75 negative-sampling table.
pub struct TrainingState {
    vocab: Vocabulary,
    dim: usize,
    bucket_count: usize,
    ngram_range: (usize, usize),
    input: AtomicMatrix,
    output: AtomicMatrix,
    /// Cumulative count^0.75 over vocabulary order.
    neg_cdf: Vec<f64>,
    /// Per word: its own input row followed by its n-gram bucket rows.
    word_inputs: Vec<Vec<u32>>,
    processed: AtomicU64,
}

impl TrainingState {
    pub fn new(vocab: Vocabulary, cfg: &TrainerConfig) -> Self {
        let dim = cfg.dim;
        let input_rows = vocab.len() + cfg.bucket_count;
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        let half = 0.5 / dim as f32;
        let input = AtomicMatrix::uniform(input_rows, dim, half, &mut rng);
        let output = AtomicMatrix::zeros(vocab.len(), dim);

        let mut neg_cdf = Vec::with_capacity(vocab.len());
        let mut acc = 0.0f64;
        for i in 0..vocab.len() {
            acc += (vocab.count(i) as f64).powf(0.75);
            neg_cdf.push(acc);
        }

        let (n_min, n_max) = cfg.ngram_range;
        let word_inputs = vocab
            .words()
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let mut rows = vec![i as u32];
                if cfg.bucket_count > 0 {
                    rows.extend(
                        bucket_indices(w, n_min, n_max, cfg.bucket_count)
                            .into_iter()
                            .map(|b| (vocab.len() + b) as u32),
                    );
                }
                rows
            })
            .collect();

        TrainingState {
            vocab,
            dim,
            bucket_count: cfg.bucket_count,
            ngram_range: cfg.ngram_range,
            input,
            output,
            neg_cdf,
            word_inputs,
            processed: AtomicU64::new(0),
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input_rows(&self) -> usize {
        self.input.rows
    }

    /// Input rows composing word `idx`: its own row plus n-gram buckets.
    pub fn word_input_rows(&self, idx: usize) -> &[u32] {
        &self.word_inputs[idx]
    }

    pub fn input_entry(&self, row: usize, col: usize) -> f32 {
        self.input.row(row)[col].get()
    }

    pub fn set_input_entry(&self, row: usize, col: usize, value: f32) {
        self.input.row(row)[col].set(value);
    }

    pub fn output_entry(&self, row: usize, col: usize) -> f32 {
        self.output.row(row)[col].get()
    }

    pub fn set_output_entry(&self, row: usize, col: usize, value: f32) {
        self.output.row(row)[col].set(value);
    }

    /// Draw one negative proportional to count^0.75.
    #[doc(hidden)]
    pub fn sample_negative(&self, rng: &mut impl Rng) -> usize {
        let total = *self.neg_cdf.last().expect("non-empty vocabulary");
        let r = rng.gen::<f64>() * total;
        self.neg_cdf.partition_point(|&c| c <= r)
    }

    fn draw_negatives(&self, rng: &mut impl Rng, target: usize, k: usize, out: &mut Vec<usize>) {
        out.clear();
        if self.vocab.len() < 2 {
            return;
        }
        while out.len() < k {
            let idx = self.sample_negative(rng);
            if idx != target {
                out.push(idx);
            }
        }
    }

    /// Hidden vector: average of the given input rows.
    fn hidden(&self, inputs: &[u32]) -> Vec<f64> {
        let mut h = vec![0.0f64; self.dim];
        for &r in inputs {
            for (acc, slot) in h.iter_mut().zip(self.input.row(r as usize)) {
                *acc += slot.get() as f64;
            }
        }
        let inv = 1.0 / inputs.len() as f64;
        for v in &mut h {
            *v *= inv;
        }
        h
    }

    fn dot_output(&self, row: usize, h: &[f64]) -> f64 {
        self.output
            .row(row)
            .iter()
            .zip(h)
            .map(|(slot, &x)| slot.get() as f64 * x)
            .sum()
    }

    /// Negative log-likelihood of one (center, context) pair with the given
    /// negatives. `inputs` are the center's input rows.
    pub fn pair_loss(&self, inputs: &[u32], target: usize, negatives: &[usize]) -> f64 {
        let h = self.hidden(inputs);
        // -ln s(f) = softplus(-f); -ln s(-f) = softplus(f)
        let mut loss = softplus(-self.dot_output(target, &h));
        for &neg in negatives {
            loss += softplus(self.dot_output(neg, &h));
        }
        loss
    }

    /// Exact gradient of `pair_loss` with respect to every touched row.
    pub fn pair_grad(
        &self,
        inputs: &[u32],
        target: usize,
        negatives: &[usize],
    ) -> PairGradients {
        let h = self.hidden(inputs);
        let mut d_h = vec![0.0f64; self.dim];
        let mut output: Vec<(usize, Vec<f64>)> = Vec::with_capacity(1 + negatives.len());

        let mut accumulate = |row: usize, label: f64, d_h: &mut [f64]| {
            let a = sigmoid(self.dot_output(row, &h));
            let coeff = a - label; // dL/df
            for (acc, slot) in d_h.iter_mut().zip(self.output.row(row)) {
                *acc += coeff * slot.get() as f64;
            }
            let grad: Vec<f64> = h.iter().map(|&x| coeff * x).collect();
            match output.iter_mut().find(|(r, _)| *r == row) {
                Some((_, g)) => {
                    for (a, b) in g.iter_mut().zip(&grad) {
                        *a += b;
                    }
                }
                None => output.push((row, grad)),
            }
        };
        accumulate(target, 1.0, &mut d_h);
        for &neg in negatives {
            accumulate(neg, 0.0, &mut d_h);
        }

        // h is an average: each occurrence of a row gets 1/n of dL/dh.
        let inv = 1.0 / inputs.len() as f64;
        let mut input: Vec<(usize, Vec<f64>)> = Vec::with_capacity(inputs.len());
        for &r in inputs {
            let r = r as usize;
            match input.iter_mut().find(|(row, _)| *row == r) {
                Some((_, g)) => {
                    for (a, &b) in g.iter_mut().zip(&d_h) {
                        *a += b * inv;
                    }
                }
                None => input.push((r, d_h.iter().map(|&x| x * inv).collect())),
            }
        }
        PairGradients { input, output }
    }

    /// One SGD step on the pair: theta -= lr * dL/dtheta, computed from the
    /// values read at entry.
    pub fn pair_update(&self, inputs: &[u32], target: usize, negatives: &[usize], lr: f64) {
        let h = self.hidden(inputs);
        let mut d_h = vec![0.0f64; self.dim];
        let step = |row: usize, label: f64, d_h: &mut [f64]| {
            let a = sigmoid(self.dot_output(row, &h));
            let g = (label - a) * lr; // -lr * dL/df
            for (acc, slot) in d_h.iter_mut().zip(self.output.row(row)) {
                *acc += g * slot.get() as f64;
            }
            for (slot, &x) in self.output.row(row).iter().zip(&h) {
                slot.add((g * x) as f32);
            }
        };
        step(target, 1.0, &mut d_h);
        for &neg in negatives {
            step(neg, 0.0, &mut d_h);
        }
        let inv = 1.0 / inputs.len() as f64;
        for &r in inputs {
            for (slot, &g) in self.input.row(r as usize).iter().zip(&d_h) {
                slot.add((g * inv) as f32);
            }
        }
    }

    fn learning_rate(&self, cfg: &TrainerConfig) -> f64 {
        let total = (cfg.epochs as u64).max(1) * self.vocab.total_tokens() + 1;
        let done = self.processed.load(Ordering::Relaxed) as f64 / total as f64;
        cfg.learning_rate * (1.0 - done).max(1e-4)
    }

    fn run_worker(
        &self,
        sentences: &[Vec<u32>],
        cfg: &TrainerConfig,
        epoch: usize,
        worker: usize,
    ) {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        rng.set_stream(((epoch as u64 + 1) << 20) | (worker as u64 + 1));
        let total_tokens = self.vocab.total_tokens() as f64;
        let mut kept: Vec<u32> = Vec::new();
        let mut negatives: Vec<usize> = Vec::new();

        for sentence in sentences {
            // Frequent-word subsampling.
            kept.clear();
            for &word in sentence {
                if cfg.subsample > 0.0 {
                    let f = self.vocab.count(word as usize) as f64 / total_tokens;
                    let keep = (cfg.subsample / f).sqrt().min(1.0);
                    if rng.gen::<f64>() >= keep {
                        continue;
                    }
                }
                kept.push(word);
            }

            let lr = self.learning_rate(cfg);
            for pos in 0..kept.len() {
                let radius = rng.gen_range(1..=cfg.window);
                let start = pos.saturating_sub(radius);
                let stop = (pos + radius + 1).min(kept.len());
                let center = kept[pos] as usize;
                for ctx in start..stop {
                    if ctx == pos {
                        continue;
                    }
                    let target = kept[ctx] as usize;
                    self.draw_negatives(&mut rng, target, cfg.negatives, &mut negatives);
                    self.pair_update(&self.word_inputs[center], target, &negatives, lr);
                }
            }
            self.processed
                .fetch_add(sentence.len() as u64, Ordering::Relaxed);
        }
    }

    /// Compose the final space: word vectors are the hidden composition,
    /// bucket rows are exported raw for OOV lookups.
    pub fn export(&self) -> EmbeddingSpace {
        let mut vectors = Vec::with_capacity(self.vocab.len() * self.dim);
        for idx in 0..self.vocab.len() {
            let h = self.hidden(&self.word_inputs[idx]);
            vectors.extend(h.iter().map(|&x| x as f32));
        }
        let subword = if self.bucket_count > 0 {
            let mut raw = Vec::with_capacity(self.bucket_count * self.dim);
            for b in 0..self.bucket_count {
                raw.extend(self.input.row_f32(self.vocab.len() + b));
            }
            Some(
                SubwordTable::from_vectors(
                    self.ngram_range.0,
                    self.ngram_range.1,
                    self.bucket_count,
                    self.dim,
                    raw,
                )
                .expect("consistent by construction"),
            )
        } else {
            None
        };
        let space = EmbeddingSpace::from_parts(
            self.dim,
            self.vocab.words().to_vec(),
            vectors,
            None,
        )
        .expect("consistent by construction");
        match subword {
            Some(table) => space.with_subword(table).expect("dims match"),
            None => space,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Train one embedding space on the corpus.
pub fn train(corpus: &Corpus, cfg: &TrainerConfig) -> Result<EmbeddingSpace> {
    cfg.validate()?;
    let vocab = build_vocab(corpus, cfg)?;
    let state = TrainingState::new(vocab, cfg);

    // Token ids per sentence; out-of-vocabulary tokens are dropped.
    let sentences: Vec<Vec<u32>> = corpus
        .sentences()
        .iter()
        .map(|s| {
            s.iter()
                .filter_map(|t| state.vocab.index_of(t).map(|i| i as u32))
                .collect::<Vec<u32>>()
        })
        .filter(|s: &Vec<u32>| !s.is_empty())
        .collect();

    let workers = cfg.workers.min(sentences.len()).max(1);
    for epoch in 0..cfg.epochs {
        if workers == 1 {
            state.run_worker(&sentences, cfg, epoch, 0);
        } else {
            let chunk = sentences.len().div_ceil(workers);
            std::thread::scope(|scope| {
                for (w, slice) in sentences.chunks(chunk).enumerate() {
                    let state = &state;
                    scope.spawn(move || state.run_worker(slice, cfg, epoch, w));
                }
            });
        }
    }
    Ok(state.export())
}
