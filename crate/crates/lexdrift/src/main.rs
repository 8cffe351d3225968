use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lexdrift::cli;
use lexdrift::config::{load_config_file, RunConfig};
use lexdrift::synth::SynthSpec;
use lexdrift::{Error, Result};

/// Detect and rank lexical-semantic change between two corpora.
#[derive(Parser)]
#[command(name = "lexdrift", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one embedding space per corpus and write both to disk
    Train(PipelineArgs),
    /// Score target words and write answer files plus audit artifacts
    Detect(PipelineArgs),
    /// Score target words and write a descending ranking
    Rank(PipelineArgs),
    /// Score predictions against gold data
    Evaluate(EvaluateArgs),
    /// Generate a synthetic corpus pair with planted semantic changes
    Synth(SynthArgs),
}

#[derive(Args)]
struct PipelineArgs {
    /// Config file with key = value lines; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus_t1: Option<PathBuf>,
    #[arg(long)]
    corpus_t2: Option<PathBuf>,
    /// Embedding file for t1 (output of `train`, input of `detect`/`rank`)
    #[arg(long)]
    emb_t1: Option<PathBuf>,
    /// Embedding file for t2
    #[arg(long)]
    emb_t2: Option<PathBuf>,
    /// Target words, one per line, used verbatim
    #[arg(long)]
    targets: Option<PathBuf>,
    #[arg(long)]
    gold_binary: Option<PathBuf>,
    #[arg(long)]
    gold_graded: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Label used in answer file names (task1/<language>.txt)
    #[arg(long)]
    language: Option<String>,
    #[arg(long)]
    lowercase: bool,
    /// Embedding dimension d
    #[arg(long)]
    dim: Option<usize>,
    /// Maximum context window c
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    ngram_min: Option<usize>,
    #[arg(long)]
    ngram_max: Option<usize>,
    /// Subword hash bucket count (0 disables subword vectors)
    #[arg(long)]
    buckets: Option<usize>,
    #[arg(long)]
    subsample: Option<f64>,
    /// Softmax temperature phi
    #[arg(long)]
    phi: Option<f64>,
    /// Decision threshold h on the mean scaled divergence
    #[arg(long)]
    threshold: Option<f64>,
    /// Top frequency fraction for pivot candidates
    #[arg(long)]
    rho: Option<f64>,
    /// Number of pivot resamples N
    #[arg(long)]
    resamples: Option<usize>,
    /// Pivot resample size M
    #[arg(long)]
    sample_size: Option<usize>,
    #[arg(long)]
    explore_floor: Option<f64>,
    #[arg(long)]
    explore_max: Option<usize>,
    /// Mix this many random common-vocabulary words into the exploration set
    #[arg(long)]
    explore_random: Option<usize>,
    /// Calibration resamples K
    #[arg(long)]
    calib_resamples: Option<usize>,
    /// Calibration resample size M'
    #[arg(long, alias = "calib-m2")]
    calib_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Read predictions from the config's out_dir and gold from its
    /// gold_binary / gold_graded paths
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    language: Option<String>,
    #[arg(long)]
    pred_binary: Option<PathBuf>,
    #[arg(long)]
    gold_binary: Option<PathBuf>,
    #[arg(long)]
    pred_graded: Option<PathBuf>,
    #[arg(long)]
    gold_graded: Option<PathBuf>,
    /// Prediction directory in the answer layout (task1/<lang>.txt, ...)
    #[arg(long, requires = "gold_dir")]
    pred_dir: Option<PathBuf>,
    /// Gold directory in the answer layout
    #[arg(long, requires = "pred_dir")]
    gold_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    /// Filler vocabulary size
    #[arg(long, default_value_t = 2000)]
    vocab: usize,
    /// Tokens per corpus
    #[arg(long, default_value_t = 200_000)]
    tokens: usize,
    #[arg(long, default_value_t = 4)]
    clusters: usize,
    /// Number of planted-change words (named changed00, changed01, ...)
    #[arg(long, default_value_t = 10)]
    changed: usize,
    /// Number of planted-stable words (named stable00, stable01, ...)
    #[arg(long, default_value_t = 10)]
    stable: usize,
    /// Mixing proportion p shared by all changed words
    #[arg(long, default_value_t = 1.0)]
    mix: f64,
    /// Comma-separated per-word mixing proportions; overrides --changed/--mix
    #[arg(long)]
    p_list: Option<String>,
    /// Fraction of filler words given a small random context drift in t2
    #[arg(long, default_value_t = 0.0)]
    background_drift: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn build_run_config(args: &PipelineArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        load_config_file(&mut cfg, path)?;
    }
    macro_rules! set {
        ($field:expr, $arg:expr) => {
            if let Some(v) = &$arg {
                $field = v.clone();
            }
        };
    }
    set!(cfg.corpus_t1, args.corpus_t1.clone().map(Some));
    set!(cfg.corpus_t2, args.corpus_t2.clone().map(Some));
    set!(cfg.emb_t1, args.emb_t1.clone().map(Some));
    set!(cfg.emb_t2, args.emb_t2.clone().map(Some));
    set!(cfg.targets, args.targets.clone().map(Some));
    set!(cfg.gold_binary, args.gold_binary.clone().map(Some));
    set!(cfg.gold_graded, args.gold_graded.clone().map(Some));
    set!(cfg.out_dir, args.out_dir);
    set!(cfg.language, args.language);
    if args.lowercase {
        cfg.lowercase = true;
    }
    set!(cfg.trainer.dim, args.dim);
    set!(cfg.trainer.window, args.window);
    set!(cfg.trainer.epochs, args.epochs);
    set!(cfg.trainer.negatives, args.negatives);
    set!(cfg.trainer.learning_rate, args.learning_rate);
    set!(cfg.trainer.min_count, args.min_count);
    set!(cfg.trainer.ngram_range.0, args.ngram_min);
    set!(cfg.trainer.ngram_range.1, args.ngram_max);
    set!(cfg.trainer.bucket_count, args.buckets);
    set!(cfg.trainer.subsample, args.subsample);
    set!(cfg.phi, args.phi);
    set!(cfg.threshold, args.threshold);
    set!(cfg.pivot.top_fraction, args.rho);
    set!(cfg.pivot.resamples, args.resamples);
    set!(cfg.pivot.sample_size, args.sample_size);
    set!(cfg.pivot.explore_floor, args.explore_floor);
    set!(cfg.pivot.explore_max, args.explore_max.map(Some));
    set!(cfg.pivot.explore_random, args.explore_random.map(Some));
    set!(cfg.calib_resamples, args.calib_resamples);
    set!(cfg.calib_size, args.calib_size);
    if let Some(seed) = args.seed {
        cfg.set_seed(seed);
    }
    if let Some(workers) = args.workers {
        cfg.set_workers(workers);
    }
    Ok(cfg)
}

fn evaluate_inputs(args: &EvaluateArgs) -> Result<Vec<cli::LanguageEvalInput>> {
    if let (Some(pred_dir), Some(gold_dir)) = (&args.pred_dir, &args.gold_dir) {
        return cli::evaluate_dirs(pred_dir, gold_dir);
    }
    let explicit = args.pred_binary.is_some()
        || args.gold_binary.is_some()
        || args.pred_graded.is_some()
        || args.gold_graded.is_some();
    if explicit {
        let both = |pred: &Option<PathBuf>, gold: &Option<PathBuf>, what: &str| match (pred, gold)
        {
            (Some(_), None) | (None, Some(_)) => Err(Error::Config(format!(
                "{what} needs both the prediction and the gold file"
            ))),
            _ => Ok(()),
        };
        both(&args.pred_binary, &args.gold_binary, "binary evaluation")?;
        both(&args.pred_graded, &args.gold_graded, "graded evaluation")?;
        return Ok(vec![cli::LanguageEvalInput {
            label: args.language.clone().unwrap_or_else(|| "corpus".into()),
            pred_binary: args.pred_binary.clone(),
            gold_binary: args.gold_binary.clone(),
            pred_graded: args.pred_graded.clone(),
            gold_graded: args.gold_graded.clone(),
        }]);
    }
    if let Some(path) = &args.config {
        let mut cfg = RunConfig::default();
        load_config_file(&mut cfg, path)?;
        return Ok(vec![cli::evaluate_input_from_config(&cfg)?]);
    }
    Err(Error::Config(
        "evaluate needs --pred-dir/--gold-dir, explicit file pairs, or --config".into(),
    ))
}

/// Planted-word names like `qazb` / `vamb`: the q_z_ / v_m_ letter
/// alternation makes every character n-gram contain the per-word letters,
/// so planted words share no subword buckets with each other (shared
/// buckets would let a changed word's drift bleed into stable words).
fn planted_name(kind: char, tail: char, i: usize) -> String {
    let a = (b'a' + (i / 26) as u8) as char;
    let b = (b'a' + (i % 26) as u8) as char;
    format!("{kind}{a}{tail}{b}")
}

fn synth_spec(args: &SynthArgs) -> Result<SynthSpec> {
    let changed: Vec<(String, f64)> = match &args.p_list {
        Some(list) => list
            .split(',')
            .enumerate()
            .map(|(i, p)| {
                let p: f64 = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad p-list entry {p:?}")))?;
                Ok((planted_name('q', 'z', i), p))
            })
            .collect::<Result<_>>()?,
        None => (0..args.changed)
            .map(|i| (planted_name('q', 'z', i), args.mix))
            .collect(),
    };
    let stable = (0..args.stable).map(|i| planted_name('v', 'm', i)).collect();
    Ok(SynthSpec {
        vocab_size: args.vocab,
        tokens_per_corpus: args.tokens,
        clusters: args.clusters,
        changed,
        stable,
        background_drift: args.background_drift,
        seed: args.seed,
    })
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Train(args) => {
            cli::cmd_train(&build_run_config(&args)?)?;
            Ok(0)
        }
        Command::Detect(args) => {
            let cfg = build_run_config(&args)?;
            let outcome = cli::cmd_detect(&cfg)?;
            println!(
                "scored {} targets (bounds: lower={:.6} upper={:.6})",
                outcome.run.scores.len(),
                outcome.run.bounds.lower,
                outcome.run.bounds.upper
            );
            println!("wrote {}", outcome.task1.display());
            println!("wrote {}", outcome.task2.display());
            if outcome.run.failures.is_empty() {
                Ok(0)
            } else {
                for (word, message) in &outcome.run.failures {
                    eprintln!("failed to score {word:?}: {message}");
                }
                Ok(3)
            }
        }
        Command::Rank(args) => {
            let cfg = build_run_config(&args)?;
            let (run, path) = cli::cmd_rank(&cfg)?;
            println!("wrote {}", path.display());
            if run.failures.is_empty() {
                Ok(0)
            } else {
                for (word, message) in &run.failures {
                    eprintln!("failed to score {word:?}: {message}");
                }
                Ok(3)
            }
        }
        Command::Evaluate(args) => {
            let inputs = evaluate_inputs(&args)?;
            let report = cli::evaluate_sets(&inputs)?;
            print!("{}", report.render());
            Ok(0)
        }
        Command::Synth(args) => {
            let spec = synth_spec(&args)?;
            cli::cmd_synth(&spec, &args.out_dir)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_) => 1,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
