//! Run configuration and the flat key-value config file.
//!
//! The config file holds one `key = value` pair per line; lines whose first
//! non-blank character is `#` are comments. Keys mirror the flags of the
//! `lexdrift` binary, and command-line flags override file values.

use std::fs;
use std::path::{Path, PathBuf};

use crate::pivot::PivotConfig;
use crate::trainer::TrainerConfig;
use crate::{Error, Result};

/// Everything a pipeline run needs. Defaults follow the experiment setup:
/// d = 100, c = 7, N = 10, M = 5000, K = 5, M' = 5000, ratio band
/// (2/3, 3/2), top fraction 0.15.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corpus_t1: Option<PathBuf>,
    pub corpus_t2: Option<PathBuf>,
    pub emb_t1: Option<PathBuf>,
    pub emb_t2: Option<PathBuf>,
    pub targets: Option<PathBuf>,
    pub gold_binary: Option<PathBuf>,
    pub gold_graded: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Label used for answer file names (task1/<language>.txt).
    pub language: String,
    pub lowercase: bool,
    pub trainer: TrainerConfig,
    pub pivot: PivotConfig,
    /// Softmax temperature for profiles.
    pub phi: f64,
    /// Decision threshold h on the mean scaled divergence.
    pub threshold: f64,
    /// K: calibration resamples drawn from the exploration set.
    pub calib_resamples: usize,
    /// M': words per calibration resample.
    pub calib_size: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus_t1: None,
            corpus_t2: None,
            emb_t1: None,
            emb_t2: None,
            targets: None,
            gold_binary: None,
            gold_graded: None,
            out_dir: PathBuf::from("."),
            language: "corpus".into(),
            lowercase: false,
            trainer: TrainerConfig::default(),
            pivot: PivotConfig::default(),
            phi: 1.0,
            threshold: 0.4,
            calib_resamples: 5,
            calib_size: 5000,
            seed: 42,
            workers: 1,
        }
    }
}

impl RunConfig {
    /// Propagate the master seed and worker count into the nested configs.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.trainer.seed = seed;
        self.pivot.seed = seed;
    }

    pub fn set_workers(&mut self, workers: usize) {
        self.workers = workers;
        self.trainer.workers = workers;
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!(
                "threshold h must be in [0, 1], got {}",
                self.threshold
            )));
        }
        if !self.phi.is_finite() || self.phi < 0.0 {
            return Err(Error::Config(format!(
                "phi must be a finite non-negative number, got {}",
                self.phi
            )));
        }
        if self.calib_resamples == 0 || self.calib_size == 0 {
            return Err(Error::Config(
                "calibration resamples and size must be at least 1".into(),
            ));
        }
        self.trainer.validate()?;
        self.pivot.validate()?;
        Ok(())
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| {
        Error::Config(format!(
            "line {line}: bad value {value:?} for key {key:?}"
        ))
    })
}

fn parse_bool(key: &str, value: &str, line: usize) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!(
            "line {line}: bad boolean {value:?} for key {key:?}"
        ))),
    }
}

/// Apply `key = value` lines from `text` on top of `config`.
pub fn apply_config_text(config: &mut RunConfig, text: &str) -> Result<()> {
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {line_no}: expected key = value, got {raw:?}"))
        })?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(Error::Config(format!(
                "line {line_no}: empty value for key {key:?}"
            )));
        }
        match key {
            "corpus_t1" => config.corpus_t1 = Some(PathBuf::from(value)),
            "corpus_t2" => config.corpus_t2 = Some(PathBuf::from(value)),
            "emb_t1" => config.emb_t1 = Some(PathBuf::from(value)),
            "emb_t2" => config.emb_t2 = Some(PathBuf::from(value)),
            "targets" => config.targets = Some(PathBuf::from(value)),
            "gold_binary" => config.gold_binary = Some(PathBuf::from(value)),
            "gold_graded" => config.gold_graded = Some(PathBuf::from(value)),
            "out_dir" => config.out_dir = PathBuf::from(value),
            "language" => config.language = value.to_string(),
            "lowercase" => config.lowercase = parse_bool(key, value, line_no)?,
            "dim" => config.trainer.dim = parse_value(key, value, line_no)?,
            "window" => config.trainer.window = parse_value(key, value, line_no)?,
            "epochs" => config.trainer.epochs = parse_value(key, value, line_no)?,
            "negatives" => config.trainer.negatives = parse_value(key, value, line_no)?,
            "learning_rate" => {
                config.trainer.learning_rate = parse_value(key, value, line_no)?
            }
            "min_count" => config.trainer.min_count = parse_value(key, value, line_no)?,
            "ngram_min" => config.trainer.ngram_range.0 = parse_value(key, value, line_no)?,
            "ngram_max" => config.trainer.ngram_range.1 = parse_value(key, value, line_no)?,
            "buckets" => config.trainer.bucket_count = parse_value(key, value, line_no)?,
            "subsample" => config.trainer.subsample = parse_value(key, value, line_no)?,
            "rho" => config.pivot.top_fraction = parse_value(key, value, line_no)?,
            "ratio_low" => config.pivot.ratio_low = parse_value(key, value, line_no)?,
            "ratio_high" => config.pivot.ratio_high = parse_value(key, value, line_no)?,
            "resamples" => config.pivot.resamples = parse_value(key, value, line_no)?,
            "sample_size" => config.pivot.sample_size = parse_value(key, value, line_no)?,
            "explore_floor" => {
                config.pivot.explore_floor = parse_value(key, value, line_no)?
            }
            "explore_max" => {
                config.pivot.explore_max = Some(parse_value(key, value, line_no)?)
            }
            "explore_random" => {
                config.pivot.explore_random = Some(parse_value(key, value, line_no)?)
            }
            "calib_resamples" => config.calib_resamples = parse_value(key, value, line_no)?,
            "calib_size" => config.calib_size = parse_value(key, value, line_no)?,
            "phi" => config.phi = parse_value(key, value, line_no)?,
            "threshold" => config.threshold = parse_value(key, value, line_no)?,
            "seed" => {
                let seed = parse_value(key, value, line_no)?;
                config.set_seed(seed);
            }
            "workers" => {
                let workers = parse_value(key, value, line_no)?;
                config.set_workers(workers);
            }
            _ => {
                return Err(Error::Config(format!(
                    "line {line_no}: unknown key {key:?}"
                )))
            }
        }
    }
    Ok(())
}

/// Parse a config file into a fresh default configuration.
pub fn parse_config_text(text: &str) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    apply_config_text(&mut config, text)?;
    Ok(config)
}

pub fn load_config_file(config: &mut RunConfig, path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    apply_config_text(config, &text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
