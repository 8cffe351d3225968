//! Pivot set selection, resampling, and the exploration set.
//!
//! Pivots are words in the top fraction of the frequency ranking of *both*
//! corpora, present in both embedding vocabularies, whose relative-frequency
//! ratio stays strictly inside the configured bounds. Profiles are built
//! against random pivot subsets; the exploration set adds frequency-changed
//! words and feeds score calibration.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::corpus::{frequency_ratio, FrequencyTable};
use crate::embedding::EmbeddingSpace;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct PivotConfig {
    /// Fraction of the frequency-ranked vocabulary counted as "frequent";
    /// the top-10%..20% band from the experiments maps to 0.10..0.20.
    pub top_fraction: f64,
    /// Strict lower bound on the t1/t2 relative-frequency ratio.
    pub ratio_low: f64,
    /// Strict upper bound on the t1/t2 relative-frequency ratio.
    pub ratio_high: f64,
    /// Number of resamples N.
    pub resamples: usize,
    /// Resample size M (capped at the pivot-set size).
    pub sample_size: usize,
    /// Minimum relative frequency (in both corpora) for a frequency-changed
    /// word to enter the exploration set.
    pub explore_floor: f64,
    /// Cap on the exploration-set size; extras beyond it are sampled.
    /// The pivot set itself is never truncated.
    pub explore_max: Option<usize>,
    /// Additionally mix this many randomly selected common-vocabulary
    /// words into the exploration set, so the calibration percentiles see
    /// the divergence spread of ordinary words rather than only pivots
    /// and frequency-changed words.
    pub explore_random: Option<usize>,
    pub seed: u64,
}

impl Default for PivotConfig {
    fn default() -> Self {
        PivotConfig {
            top_fraction: 0.15,
            ratio_low: 2.0 / 3.0,
            ratio_high: 1.5,
            resamples: 10,
            sample_size: 5000,
            explore_floor: 0.0,
            explore_max: None,
            explore_random: None,
            seed: 42,
        }
    }
}

impl PivotConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.top_fraction > 0.0 && self.top_fraction <= 1.0) {
            return Err(Error::Config("top fraction must be in (0, 1]".into()));
        }
        if !(self.ratio_low > 0.0 && self.ratio_low < 1.0 && self.ratio_high > 1.0) {
            return Err(Error::Config(
                "ratio bounds must satisfy 0 < low < 1 < high".into(),
            ));
        }
        if self.resamples == 0 {
            return Err(Error::Config("resamples must be at least 1".into()));
        }
        if self.sample_size == 0 {
            return Err(Error::Config("sample size must be at least 1".into()));
        }
        if self.explore_floor < 0.0 {
            return Err(Error::Config("explore floor must be >= 0".into()));
        }
        Ok(())
    }
}

/// The pivot set with its drawn resamples and the exploration set.
#[derive(Debug, Clone)]
pub struct PivotResamples {
    pub pivot_set: BTreeSet<String>,
    /// N word lists of size min(M, |pivot_set|); sorted, duplicate-free.
    pub resamples: Vec<Vec<String>>,
    /// Superset of `pivot_set`.
    pub explore_set: BTreeSet<String>,
}

/// Words in the top `top_fraction` of the ranking (by count descending,
/// ties lexicographic). Takes ceil(fraction * len) words, at least one.
fn top_fraction_set<'a>(freq: &'a FrequencyTable, fraction: f64) -> BTreeSet<&'a str> {
    let ranked = freq.ranked_words();
    let k = ((fraction * ranked.len() as f64).ceil() as usize)
        .clamp(1, ranked.len());
    ranked[..k].iter().copied().collect()
}

/// Select the pivot set: frequent in both corpora, in both embedding
/// vocabularies, and with a frequency ratio strictly inside the bounds.
pub fn select_pivots(
    f1: &FrequencyTable,
    f2: &FrequencyTable,
    space1: &EmbeddingSpace,
    space2: &EmbeddingSpace,
    cfg: &PivotConfig,
) -> Result<BTreeSet<String>> {
    cfg.validate()?;
    if f1.is_empty() || f2.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let top1 = top_fraction_set(f1, cfg.top_fraction);
    let top2 = top_fraction_set(f2, cfg.top_fraction);
    let pivots: BTreeSet<String> = top1
        .iter()
        .filter(|w| top2.contains(*w))
        .filter(|w| space1.contains(w) && space2.contains(w))
        .filter(|w| {
            let ratio = frequency_ratio(w, f1, f2).expect("word present in both tables");
            ratio > cfg.ratio_low && ratio < cfg.ratio_high
        })
        .map(|w| (*w).to_string())
        .collect();
    if pivots.is_empty() {
        return Err(Error::EmptyPivotSet);
    }
    Ok(pivots)
}

/// Draw N resamples of size min(M, |pivots|) without replacement. Resample
/// `i` uses an RNG stream derived from (seed, i); words inside a resample
/// are sorted.
pub fn draw_resamples(pivots: &BTreeSet<String>, cfg: &PivotConfig) -> Vec<Vec<String>> {
    let ordered: Vec<&String> = pivots.iter().collect();
    let size = cfg.sample_size.min(ordered.len());
    (0..cfg.resamples)
        .map(|i| {
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64 + 1);
            let picked = rand::seq::index::sample(&mut rng, ordered.len(), size);
            let mut words: Vec<String> =
                picked.iter().map(|idx| ordered[idx].clone()).collect();
            words.sort();
            words
        })
        .collect()
}

/// The exploration set: pivots plus frequency-changed words (ratio outside
/// `[low, high]`, relative frequency above the floor in both corpora, in
/// both vocabularies). When a cap is set, extras beyond it are sampled;
/// the result is always a superset of the pivot set.
pub fn build_explore_set(
    f1: &FrequencyTable,
    f2: &FrequencyTable,
    space1: &EmbeddingSpace,
    space2: &EmbeddingSpace,
    pivots: &BTreeSet<String>,
    cfg: &PivotConfig,
) -> BTreeSet<String> {
    let eligible = |w: &&str| -> Option<f64> {
        if !(space1.contains(w) && space2.contains(w)) {
            return None;
        }
        let r1 = f1.rel_freq(w)?;
        let r2 = f2.rel_freq(w)?;
        if r1 > cfg.explore_floor && r2 > cfg.explore_floor {
            Some(r1 / r2)
        } else {
            None
        }
    };

    let mut extras: Vec<&str> = f1
        .iter()
        .map(|(w, _)| w)
        .filter(|w| !pivots.contains(*w))
        .filter(|w| {
            eligible(w)
                .map(|ratio| ratio < cfg.ratio_low || ratio > cfg.ratio_high)
                .unwrap_or(false)
        })
        .collect();
    extras.sort();

    if let Some(max) = cfg.explore_max {
        let budget = max.saturating_sub(pivots.len());
        if extras.len() > budget {
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
            rng.set_stream(1 << 40);
            let picked = rand::seq::index::sample(&mut rng, extras.len(), budget);
            extras = picked.iter().map(|i| extras[i]).collect();
        }
    }

    let mut explore = pivots.clone();
    explore.extend(extras.into_iter().map(str::to_string));

    if let Some(n) = cfg.explore_random {
        let mut pool: Vec<&str> = f1
            .iter()
            .map(|(w, _)| w)
            .filter(|w| !explore.contains(*w))
            .filter(|w| eligible(w).is_some())
            .collect();
        pool.sort();
        if pool.len() > n {
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
            rng.set_stream(1 << 41);
            let picked = rand::seq::index::sample(&mut rng, pool.len(), n);
            pool = picked.iter().map(|i| pool[i]).collect();
        }
        explore.extend(pool.into_iter().map(str::to_string));
    }
    explore
}

/// Run selection, resampling and exploration-set construction in one step.
pub fn build_pivot_resamples(
    f1: &FrequencyTable,
    f2: &FrequencyTable,
    space1: &EmbeddingSpace,
    space2: &EmbeddingSpace,
    cfg: &PivotConfig,
) -> Result<PivotResamples> {
    let pivot_set = select_pivots(f1, f2, space1, space2, cfg)?;
    let resamples = draw_resamples(&pivot_set, cfg);
    let explore_set = build_explore_set(f1, f2, space1, space2, &pivot_set, cfg);
    Ok(PivotResamples {
        pivot_set,
        resamples,
        explore_set,
    })
}
