use std::path::PathBuf;

/// Errors produced by the lexdrift library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    Decode { path: PathBuf, offset: usize },

    /// Malformed content in a structured text file (embeddings, gold
    /// data, config, ...). `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty corpus: relative frequencies are undefined")]
    EmptyCorpus,

    #[error("empty vocabulary after min-count pruning")]
    EmptyVocabulary,

    #[error("word {word:?} is out of vocabulary and the space has no subword table")]
    OutOfVocabulary { word: String },

    #[error("cosine undefined for a zero-norm vector")]
    DegenerateVector,

    #[error("vector length {got} does not match space dimension {dim}")]
    DimensionMismatch { dim: usize, got: usize },

    #[error("pivot word {word:?} did not resolve to an in-vocabulary vector")]
    UnresolvedPivot { word: String },

    #[error("pivot selection produced an empty set; increase the top fraction (rho)")]
    EmptyPivotSet,

    #[error("profiles come from different resamples ({left} vs {right}) or differ in length")]
    ProfileMismatch { left: usize, right: usize },

    #[error(
        "calibration bounds are degenerate (upper == lower = {value}); \
         this typically means the two corpora or embedding spaces are identical"
    )]
    DegenerateCalibration { value: f64 },

    #[error("prediction and gold word sets differ; missing or extra: {words:?}")]
    KeyMismatch { words: Vec<String> },

    #[error("correlation undefined: input has zero variance")]
    ZeroVariance,

    #[error("rank correlation undefined: all values tied")]
    AllTied,

    #[error("correlation needs at least 2 paired values, got {0}")]
    TooFewValues(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid synthesis spec: {0}")]
    SynthSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
