//! Unsupervised detection and ranking of lexical-semantic change between
//! two corpora.
//!
//! The pipeline trains (or loads) one embedding space per corpus, selects a
//! pivot set of frequent words whose relative frequency is stable across both
//! corpora, and describes every query word by softmax-normalized cosine
//! similarity profiles against random pivot resamples. The KL divergence
//! between a word's profiles in the two spaces, rescaled by percentile bounds
//! calibrated on an exploration set, is the change score; a threshold on the
//! mean scaled score gives the binary verdict.
//!
//! Modules follow the pipeline stages:
//!
//! * [`corpus`] — corpus ingestion and frequency statistics
//! * [`trainer`] — subword skip-gram training with negative sampling
//! * [`embedding`] — embedding spaces, cosine similarity, text-format I/O
//! * [`pivot`] — pivot set selection, resamples, exploration set
//! * [`change`] — profiles, divergences, calibration, scores, ranking
//! * [`eval`] — accuracy / Pearson / Kendall-tau scoring against gold data
//! * [`synth`] — synthetic corpus pairs with planted semantic changes
//! * [`cli`] — subcommand entry points used by the `lexdrift` binary

pub mod change;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod embedding;
mod error;
pub mod eval;
pub mod pivot;
pub mod subword;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
