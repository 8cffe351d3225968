//! Subcommand implementations behind the `lexdrift` binary: train the two
//! spaces, score targets and emit answer files, rank, evaluate against gold
//! data, and generate synthetic corpora.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::change::{
    calibrate_bounds, rank_words, score_word, CalibrationBounds, ChangeScore,
};
use crate::config::RunConfig;
use crate::corpus::{count_frequencies, load_corpus, Corpus};
use crate::embedding::{load_embeddings, save_embeddings, EmbeddingSpace};
use crate::eval;
use crate::pivot::{build_pivot_resamples, PivotResamples};
use crate::synth::{generate, write_corpus, SynthSpec};
use crate::trainer::train;
use crate::{Error, Result};

fn require(path: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    path.clone()
        .ok_or_else(|| Error::Config(format!("missing required path: {flag}")))
}

/// Train one embedding space per corpus and write both to the given
/// embedding paths (plus `.sub` bucket files).
pub fn cmd_train(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let corpus_t1 = require(&cfg.corpus_t1, "--corpus-t1")?;
    let corpus_t2 = require(&cfg.corpus_t2, "--corpus-t2")?;
    let emb_t1 = require(&cfg.emb_t1, "--emb-t1")?;
    let emb_t2 = require(&cfg.emb_t2, "--emb-t2")?;

    for (corpus_path, emb_path) in [(corpus_t1, emb_t1), (corpus_t2, emb_t2)] {
        let corpus = load_corpus(&corpus_path, cfg.lowercase)?;
        let space = train(&corpus, &cfg.trainer)?;
        save_embeddings(&space, &emb_path)?;
        println!(
            "trained {}: {} words, dim {} -> {}",
            corpus.source_id(),
            space.len(),
            space.dim(),
            emb_path.display()
        );
    }
    Ok(())
}

/// Everything produced by one scoring run.
pub struct ScoredRun {
    /// Successfully scored targets, in input order.
    pub scores: Vec<ChangeScore>,
    /// (word, error message) for targets that could not be scored.
    pub failures: Vec<(String, String)>,
    pub bounds: CalibrationBounds,
    pub pivots: PivotResamples,
}

fn load_space_pair(
    cfg: &RunConfig,
    corpus_t1: &Corpus,
    corpus_t2: &Corpus,
) -> Result<(EmbeddingSpace, EmbeddingSpace)> {
    match (&cfg.emb_t1, &cfg.emb_t2) {
        (Some(p1), Some(p2)) if p1.exists() && p2.exists() => {
            Ok((load_embeddings(p1)?, load_embeddings(p2)?))
        }
        (Some(p1), Some(p2)) => {
            let missing = if p1.exists() { p2 } else { p1 };
            Err(Error::Config(format!(
                "embedding file {} does not exist (omit --emb-t1/--emb-t2 to train in place)",
                missing.display()
            )))
        }
        _ => Ok((train(corpus_t1, &cfg.trainer)?, train(corpus_t2, &cfg.trainer)?)),
    }
}

/// Run the full scoring pipeline: frequencies, pivots, calibration, and
/// per-target scores.
pub fn score_targets(cfg: &RunConfig) -> Result<ScoredRun> {
    cfg.validate()?;
    let corpus_t1 = load_corpus(&require(&cfg.corpus_t1, "--corpus-t1")?, cfg.lowercase)?;
    let corpus_t2 = load_corpus(&require(&cfg.corpus_t2, "--corpus-t2")?, cfg.lowercase)?;
    let targets = eval::load_target_words(&require(&cfg.targets, "--targets")?)?;
    if targets.is_empty() {
        return Err(Error::Config("targets file lists no words".into()));
    }

    let f1 = count_frequencies(&corpus_t1)?;
    let f2 = count_frequencies(&corpus_t2)?;
    let (space_t1, space_t2) = load_space_pair(cfg, &corpus_t1, &corpus_t2)?;

    let pivots = build_pivot_resamples(&f1, &f2, &space_t1, &space_t2, &cfg.pivot)?;
    let bounds = calibrate_bounds(
        &pivots.explore_set,
        &pivots.resamples,
        &space_t1,
        &space_t2,
        cfg.phi,
        cfg.calib_resamples,
        cfg.calib_size,
        cfg.seed,
    )?;

    let outcomes: Vec<(String, Result<ChangeScore>)> = targets
        .par_iter()
        .map(|word| {
            let result = score_word(
                word,
                &pivots.resamples,
                &space_t1,
                &space_t2,
                cfg.phi,
                &bounds,
                cfg.threshold,
            );
            (word.clone(), result)
        })
        .collect();

    let mut scores = Vec::new();
    let mut failures = Vec::new();
    for (word, outcome) in outcomes {
        match outcome {
            Ok(score) => scores.push(score),
            Err(e) => failures.push((word, e.to_string())),
        }
    }
    Ok(ScoredRun {
        scores,
        failures,
        bounds,
        pivots,
    })
}

fn write_audit(run: &ScoredRun, cfg: &RunConfig, audit_dir: &Path) -> Result<()> {
    fs::create_dir_all(audit_dir).map_err(|e| Error::io(audit_dir, e))?;
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |e| Error::io(path.clone(), e)
    };

    let word_list = |name: &str, words: Vec<&String>| -> Result<()> {
        let path = audit_dir.join(name);
        let mut out = fs::File::create(&path).map_err(io_err(&path))?;
        for w in words {
            writeln!(out, "{w}").map_err(io_err(&path))?;
        }
        Ok(())
    };
    word_list("pivots.txt", run.pivots.pivot_set.iter().collect())?;
    word_list("explore.txt", run.pivots.explore_set.iter().collect())?;
    for (i, resample) in run.pivots.resamples.iter().enumerate() {
        word_list(&format!("resample_{i:02}.txt"), resample.iter().collect())?;
    }

    let path = audit_dir.join("scores.tsv");
    let mut out = fs::File::create(&path).map_err(io_err(&path))?;
    let n = cfg.pivot.resamples;
    writeln!(
        out,
        "# lower={:.9} upper={:.9} phi={} threshold={}",
        run.bounds.lower, run.bounds.upper, cfg.phi, cfg.threshold
    )
    .map_err(io_err(&path))?;
    let mut header = vec!["word".to_string(), "status".into()];
    header.extend((1..=n).map(|i| format!("lambda_{i}")));
    header.extend((1..=n).map(|i| format!("scaled_{i}")));
    header.push("mean".into());
    header.push("verdict".into());
    writeln!(out, "{}", header.join("\t")).map_err(io_err(&path))?;
    for score in &run.scores {
        let mut row = vec![score.word.clone(), "ok".into()];
        row.extend(score.raw.iter().map(|l| format!("{l:.9}")));
        row.extend(score.scaled.iter().map(|l| format!("{l:.9}")));
        row.push(format!("{:.9}", score.mean));
        row.push(if score.changed { "1" } else { "0" }.into());
        writeln!(out, "{}", row.join("\t")).map_err(io_err(&path))?;
    }
    for (word, message) in &run.failures {
        writeln!(out, "{word}\terror\t{message}").map_err(io_err(&path))?;
    }
    Ok(())
}

/// Paths of the answer files written by `cmd_detect`.
pub struct DetectOutcome {
    pub run: ScoredRun,
    pub task1: PathBuf,
    pub task2: PathBuf,
}

/// Score all targets and write the answer files
/// (`task1/<language>.txt`, `task2/<language>.txt`) plus audit artifacts.
pub fn cmd_detect(cfg: &RunConfig) -> Result<DetectOutcome> {
    let run = score_targets(cfg)?;

    let task1_dir = cfg.out_dir.join("task1");
    let task2_dir = cfg.out_dir.join("task2");
    fs::create_dir_all(&task1_dir).map_err(|e| Error::io(&task1_dir, e))?;
    fs::create_dir_all(&task2_dir).map_err(|e| Error::io(&task2_dir, e))?;

    let task1 = task1_dir.join(format!("{}.txt", cfg.language));
    let task2 = task2_dir.join(format!("{}.txt", cfg.language));
    let labels: Vec<(String, u8)> = run
        .scores
        .iter()
        .map(|s| (s.word.clone(), u8::from(s.changed)))
        .collect();
    let graded: Vec<(String, f64)> = run
        .scores
        .iter()
        .map(|s| (s.word.clone(), s.mean))
        .collect();
    eval::write_binary_labels(&task1, &labels)?;
    eval::write_graded_scores(&task2, &graded)?;
    write_audit(&run, cfg, &cfg.out_dir.join("audit"))?;

    Ok(DetectOutcome { run, task1, task2 })
}

/// Score all targets and write `ranking.tsv` (descending mean score).
pub fn cmd_rank(cfg: &RunConfig) -> Result<(ScoredRun, PathBuf)> {
    let run = score_targets(cfg)?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let path = cfg.out_dir.join("ranking.tsv");
    let ranked = rank_words(&run.scores);
    eval::write_graded_scores(&path, &ranked)?;
    Ok((run, path))
}

/// One language's prediction/gold file pairs for evaluation.
#[derive(Debug, Clone, Default)]
pub struct LanguageEvalInput {
    pub label: String,
    pub pred_binary: Option<PathBuf>,
    pub gold_binary: Option<PathBuf>,
    pub pred_graded: Option<PathBuf>,
    pub gold_graded: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct LanguageMetrics {
    pub label: String,
    pub accuracy: Option<f64>,
    pub pearson: Option<f64>,
    /// (tau_b, two-sided p-value)
    pub kendall: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub languages: Vec<LanguageMetrics>,
    /// Mean accuracy over the languages that reported one.
    pub mean_accuracy: Option<f64>,
}

impl EvalReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let pct = |v: f64| format!("{:.1}%", v * 100.0);
        for lang in &self.languages {
            out.push_str(&lang.label);
            if let Some(acc) = lang.accuracy {
                out.push_str(&format!("  accuracy={acc:.6} ({})", pct(acc)));
            }
            if let Some(r) = lang.pearson {
                out.push_str(&format!("  pearson={r:.6}"));
            }
            if let Some((tau, p)) = lang.kendall {
                out.push_str(&format!("  kendall-tau={tau:.6} p={p:.6}"));
            }
            out.push('\n');
        }
        if let Some(mean) = self.mean_accuracy {
            out.push_str(&format!("mean accuracy={mean:.6} ({})\n", pct(mean)));
        }
        out
    }
}

/// Evaluate each language's predictions against its gold files and average
/// accuracy over languages.
pub fn evaluate_sets(inputs: &[LanguageEvalInput]) -> Result<EvalReport> {
    if inputs.is_empty() {
        return Err(Error::Config("nothing to evaluate".into()));
    }
    let mut languages = Vec::with_capacity(inputs.len());
    for input in inputs {
        let accuracy = match (&input.pred_binary, &input.gold_binary) {
            (Some(pred), Some(gold)) => Some(eval::accuracy(
                &eval::load_binary_labels(pred)?,
                &eval::load_binary_labels(gold)?,
            )?),
            _ => None,
        };
        let (pearson, kendall) = match (&input.pred_graded, &input.gold_graded) {
            (Some(pred), Some(gold)) => {
                let pred = eval::load_graded_scores(pred)?;
                let gold = eval::load_graded_scores(gold)?;
                let (xs, ys) = eval::align_scores(&pred, &gold)?;
                (
                    Some(eval::pearson(&xs, &ys)?),
                    Some(eval::kendall_tau(&xs, &ys)?),
                )
            }
            _ => (None, None),
        };
        if accuracy.is_none() && pearson.is_none() {
            return Err(Error::Config(format!(
                "language {:?} has no complete prediction/gold file pair",
                input.label
            )));
        }
        languages.push(LanguageMetrics {
            label: input.label.clone(),
            accuracy,
            pearson,
            kendall,
        });
    }
    let accs: Vec<f64> = languages.iter().filter_map(|l| l.accuracy).collect();
    let mean_accuracy = if accs.is_empty() {
        None
    } else {
        Some(accs.iter().sum::<f64>() / accs.len() as f64)
    };
    Ok(EvalReport {
        languages,
        mean_accuracy,
    })
}

/// Build per-language evaluation inputs from prediction and gold directory
/// trees in the answer layout (`task1/<language>.txt`, `task2/<language>.txt`).
pub fn evaluate_dirs(pred_dir: &Path, gold_dir: &Path) -> Result<Vec<LanguageEvalInput>> {
    let mut by_label: BTreeMap<String, LanguageEvalInput> = BTreeMap::new();
    for (task, is_binary) in [("task1", true), ("task2", false)] {
        let gold_task = gold_dir.join(task);
        if !gold_task.is_dir() {
            continue;
        }
        let mut entries: Vec<PathBuf> = fs::read_dir(&gold_task)
            .map_err(|e| Error::io(&gold_task, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().map_or(false, |x| x == "txt"))
            .collect();
        entries.sort();
        for gold_path in entries {
            let label = gold_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let pred_path = pred_dir.join(task).join(format!("{label}.txt"));
            if !pred_path.exists() {
                return Err(Error::Config(format!(
                    "missing prediction file {}",
                    pred_path.display()
                )));
            }
            let entry = by_label.entry(label.clone()).or_insert_with(|| {
                LanguageEvalInput {
                    label,
                    ..LanguageEvalInput::default()
                }
            });
            if is_binary {
                entry.pred_binary = Some(pred_path);
                entry.gold_binary = Some(gold_path);
            } else {
                entry.pred_graded = Some(pred_path);
                entry.gold_graded = Some(gold_path);
            }
        }
    }
    if by_label.is_empty() {
        return Err(Error::Config(format!(
            "no task1/*.txt or task2/*.txt gold files under {}",
            gold_dir.display()
        )));
    }
    Ok(by_label.into_values().collect())
}

/// Evaluation inputs derived from a run config: predictions from its
/// out_dir answer files, gold from its gold_* paths.
pub fn evaluate_input_from_config(cfg: &RunConfig) -> Result<LanguageEvalInput> {
    if cfg.gold_binary.is_none() && cfg.gold_graded.is_none() {
        return Err(Error::Config(
            "config provides neither gold_binary nor gold_graded".into(),
        ));
    }
    let mut input = LanguageEvalInput {
        label: cfg.language.clone(),
        ..LanguageEvalInput::default()
    };
    if let Some(gold) = &cfg.gold_binary {
        input.gold_binary = Some(gold.clone());
        input.pred_binary = Some(cfg.out_dir.join("task1").join(format!("{}.txt", cfg.language)));
    }
    if let Some(gold) = &cfg.gold_graded {
        input.gold_graded = Some(gold.clone());
        input.pred_graded = Some(cfg.out_dir.join("task2").join(format!("{}.txt", cfg.language)));
    }
    Ok(input)
}

/// Generate a synthetic corpus pair with gold data and a targets file.
pub fn cmd_synth(spec: &SynthSpec, out_dir: &Path) -> Result<()> {
    let (t1, t2, gold) = generate(spec)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_corpus(&t1, &out_dir.join("corpus_t1.txt"))?;
    write_corpus(&t2, &out_dir.join("corpus_t2.txt"))?;

    let targets: Vec<String> = spec
        .changed
        .iter()
        .map(|(w, _)| w.clone())
        .chain(spec.stable.iter().cloned())
        .collect();
    let targets_path = out_dir.join("targets.txt");
    let mut out = fs::File::create(&targets_path).map_err(|e| Error::io(&targets_path, e))?;
    for w in &targets {
        writeln!(out, "{w}").map_err(|e| Error::io(&targets_path, e))?;
    }

    let binary: Vec<(String, u8)> = targets
        .iter()
        .map(|w| (w.clone(), gold.binary[w]))
        .collect();
    let graded: Vec<(String, f64)> = targets
        .iter()
        .map(|w| (w.clone(), gold.graded[w]))
        .collect();
    eval::write_binary_labels(&out_dir.join("gold_binary.txt"), &binary)?;
    eval::write_graded_scores(&out_dir.join("gold_graded.txt"), &graded)?;
    println!(
        "wrote synthetic pair ({} tokens per corpus, {} targets) to {}",
        t1.token_count(),
        targets.len(),
        out_dir.display()
    );
    Ok(())
}
