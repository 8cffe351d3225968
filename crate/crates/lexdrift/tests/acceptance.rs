//! Acceptance suite: every criterion below prints one PASS line when it
//! holds (run with `cargo test --test acceptance -- --nocapture` to see
//! them). Tolerances are pinned in the assertions.

use std::collections::BTreeMap;
use std::time::Instant;

use lexdrift::change::{
    build_profile, calibrate_bounds, kl_divergence, scale_lambda, score_word, CalibrationBounds,
    Profile,
};
use lexdrift::cli;
use lexdrift::config::RunConfig;
use lexdrift::corpus::{count_frequencies, FrequencyTable};
use lexdrift::embedding::EmbeddingSpace;
use lexdrift::eval;
use lexdrift::pivot::{build_pivot_resamples, select_pivots, PivotConfig};
use lexdrift::synth::{generate, write_corpus, SynthSpec};
use lexdrift::trainer::{build_vocab, train, TrainerConfig, TrainingState};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

fn pass(line: &str) {
    println!("[acceptance] PASS {line}");
}

fn random_space(words: usize, dim: usize, seed: u64) -> EmbeddingSpace {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let pairs: Vec<(String, Vec<f32>)> = (0..words)
        .map(|i| {
            let v: Vec<f32> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (format!("w{i:04}"), v)
        })
        .collect();
    let refs: Vec<(&str, Vec<f32>)> = pairs
        .iter()
        .map(|(w, v)| (w.as_str(), v.clone()))
        .collect();
    EmbeddingSpace::from_pairs(dim, &refs).unwrap()
}

#[test]
fn criterion_a_profile_normalization_and_positivity() {
    let space = random_space(1060, 16, 11);
    let resample: Vec<String> = (0..60).map(|i| format!("w{i:04}")).collect();
    for q in 0..1000 {
        let query = format!("w{:04}", 60 + q);
        let phi = [0.0, 0.5, 1.0, 4.0][q % 4];
        let profile = build_profile(&query, 0, &resample, &space, phi).unwrap();
        assert!(profile.probs().iter().all(|&p| p > 0.0), "query {query}");
        let sum: f64 = profile.probs().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "query {query}: sum {sum}");
    }
    pass("(a) profile normalization and positivity on 1000 random queries");
}

#[test]
fn criterion_b_kl_nonnegative_and_self_divergence_zero() {
    let mut rng = ChaCha12Rng::seed_from_u64(23);
    for _ in 0..1000 {
        let n = rng.gen_range(2..40);
        let draw = |rng: &mut ChaCha12Rng| -> Profile {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.001..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            Profile::from_probs(0, raw.into_iter().map(|x| x / sum).collect()).unwrap()
        };
        let p = draw(&mut rng);
        let q = draw(&mut rng);
        assert!(kl_divergence(&p, &q).unwrap() >= 0.0);
        let self_kl = kl_divergence(&p, &p).unwrap();
        assert!(self_kl.abs() <= 1e-12, "KL(p,p) = {self_kl}");
    }
    pass("(b) KL non-negativity and KL(p,p)=0 within 1e-12");
}

#[test]
fn criterion_c_identical_spaces_give_zero_mean_for_every_target() {
    let space = random_space(80, 12, 31);
    let resamples: Vec<Vec<String>> = (0..4)
        .map(|i| (0..30).map(|j| format!("w{:04}", (i * 7 + j) % 80)).collect())
        .collect();
    let bounds = CalibrationBounds::new(0.0, 1.0, 1, 1).unwrap();
    for q in 0..80 {
        let word = format!("w{q:04}");
        let score = score_word(&word, &resamples, &space, &space, 1.3, &bounds, 0.1).unwrap();
        assert_eq!(score.mean, 0.0, "target {word}");
        assert!(score.raw.iter().all(|&l| l == 0.0));
        assert!(!score.changed);
    }
    pass("(c) identical spaces give mean scaled divergence 0 for every target");
}

#[test]
fn criterion_d_scale_lambda_endpoints_clamps_monotonicity() {
    let bounds = CalibrationBounds::new(0.25, 1.25, 5, 100).unwrap();
    assert_eq!(scale_lambda(0.25, &bounds), 0.0);
    assert_eq!(scale_lambda(1.25, &bounds), 1.0);
    assert_eq!(scale_lambda(-3.0, &bounds), 0.0);
    assert_eq!(scale_lambda(0.0, &bounds), 0.0);
    assert_eq!(scale_lambda(7.0, &bounds), 1.0);
    assert!((scale_lambda(0.75, &bounds) - 0.5).abs() < 1e-12);
    let mut prev = -1.0;
    for i in 0..=400 {
        let s = scale_lambda(i as f64 * 0.005, &bounds);
        assert!(s >= prev, "not monotone at {i}");
        assert!((0.0..=1.0).contains(&s));
        prev = s;
    }
    pass("(d) scale_lambda endpoint, clamp, and monotonicity checks");
}

#[test]
fn criterion_e_pivot_filter_boundary_exclusions() {
    // Totals of 16 make the relative frequencies exact binary fractions,
    // so the ratios are exactly 3/2 and 2/3.
    let table = |pairs: &[(&str, u64)]| -> FrequencyTable {
        FrequencyTable::from_counts(
            pairs.iter().map(|&(w, c)| (w.to_string(), c)).collect(),
        )
        .unwrap()
    };
    let f1 = table(&[("hi", 3), ("lo", 2), ("keep", 5), ("also", 6)]);
    let f2 = table(&[("hi", 2), ("lo", 3), ("keep", 5), ("also", 6)]);
    let words: Vec<(&str, Vec<f32>)> = [("hi", 1.0f32), ("lo", 2.0), ("keep", 3.0), ("also", 4.0)]
        .iter()
        .map(|&(w, x)| (w, vec![x, 1.0]))
        .collect();
    let space = EmbeddingSpace::from_pairs(2, &words).unwrap();
    let cfg = PivotConfig {
        top_fraction: 1.0,
        ..PivotConfig::default()
    };
    let pivots = select_pivots(&f1, &f2, &space, &space, &cfg).unwrap();
    assert!(!pivots.contains("hi"), "ratio exactly 3/2 must be excluded");
    assert!(!pivots.contains("lo"), "ratio exactly 2/3 must be excluded");
    assert!(pivots.contains("keep") && pivots.contains("also"));
    pass("(e) pivot filter excludes ratios exactly 3/2 and 2/3");
}

#[test]
fn criterion_f_kendall_fast_path_equals_pair_count_oracle_exhaustively() {
    fn all_lists(n: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(3usize.pow(n as u32));
        let mut digits = vec![0usize; n];
        'outer: loop {
            out.push(digits.iter().map(|&d| d as f64 + 1.0).collect());
            for d in digits.iter_mut() {
                *d += 1;
                if *d < 3 {
                    continue 'outer;
                }
                *d = 0;
            }
            return out;
        }
    }

    for n in 2..=8usize {
        let lists = all_lists(n);
        lists.par_iter().for_each(|x| {
            for y in &lists {
                let oracle = eval::kendall_tau_pair_count_oracle(x, y);
                let fast = eval::kendall_tau(x, y).ok().map(|(t, _)| t);
                match (oracle, fast) {
                    (None, None) => {}
                    (Some(a), Some(b)) => {
                        assert!((a - b).abs() < 1e-12, "{x:?} vs {y:?}: {a} != {b}")
                    }
                    other => panic!("{x:?} vs {y:?}: disagree on definedness {other:?}"),
                }
            }
        });
    }
    pass("(f) Kendall tau fast path equals the O(n^2) oracle for all n <= 8 over {1,2,3}");
}

#[test]
fn criterion_g_pair_loss_gradient_matches_finite_differences() {
    let corpus = lexdrift::corpus::Corpus::from_text(
        "toy",
        "red green blue red green\nblue red green blue red\none two three one two\n",
        false,
    );
    let cfg = TrainerConfig {
        dim: 8,
        window: 2,
        epochs: 1,
        negatives: 2,
        learning_rate: 0.05,
        min_count: 1,
        ngram_range: (3, 6),
        bucket_count: 17,
        subsample: 0.0,
        workers: 1,
        seed: 41,
    };
    let state = TrainingState::new(build_vocab(&corpus, &cfg).unwrap(), &cfg);
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    for row in 0..state.vocab().len() {
        for col in 0..state.dim() {
            state.set_output_entry(row, col, rng.gen_range(-0.4..0.4));
        }
    }
    let inputs = state.word_input_rows(0).to_vec();
    let (target, negatives) = (1usize, vec![2usize, 3, 2]);
    let grads = state.pair_grad(&inputs, target, &negatives);
    let eps = 1e-4f32;

    let mut checked = 0usize;
    let mut check = |get: &dyn Fn() -> f32,
                     set: &dyn Fn(f32),
                     analytic: f64,
                     what: String| {
        let orig = get();
        set(orig + eps);
        let (hi_x, hi) = (get(), state.pair_loss(&inputs, target, &negatives));
        set(orig - eps);
        let (lo_x, lo) = (get(), state.pair_loss(&inputs, target, &negatives));
        set(orig);
        let fd = (hi - lo) / (hi_x - lo_x) as f64;
        let rel = (analytic - fd).abs() / fd.abs().max(1e-8);
        assert!(rel < 1e-4, "{what}: analytic {analytic} vs fd {fd} (rel {rel})");
        checked += 1;
    };
    for (row, grad) in &grads.input {
        for col in 0..8 {
            check(
                &|| state.input_entry(*row, col),
                &|v| state.set_input_entry(*row, col, v),
                grad[col],
                format!("input row {row} col {col}"),
            );
        }
    }
    for (row, grad) in &grads.output {
        for col in 0..8 {
            check(
                &|| state.output_entry(*row, col),
                &|v| state.set_output_entry(*row, col, v),
                grad[col],
                format!("output row {row} col {col}"),
            );
        }
    }
    assert!(checked >= 8 * (grads.input.len() + grads.output.len()));
    pass("(g) pair-loss gradient matches central finite differences (rel err < 1e-4, d=8)");
}

// --- synthetic end-to-end criteria ------------------------------------

/// Planted-word names are pairwise subword-disjoint (see cli synth notes).
fn changed_name(i: usize) -> String {
    let c = (b'a' + i as u8) as char;
    format!("q{c}z{c}")
}

fn stable_name(i: usize) -> String {
    let c = (b'a' + i as u8) as char;
    format!("v{c}m{c}")
}

fn desk_trainer(seed: u64) -> TrainerConfig {
    TrainerConfig {
        dim: 50,
        window: 7,
        epochs: 5,
        negatives: 5,
        learning_rate: 0.025,
        min_count: 5,
        ngram_range: (3, 6),
        bucket_count: 20_000,
        subsample: 0.0,
        workers: 1,
        seed,
    }
}

fn desk_pivot(seed: u64) -> PivotConfig {
    PivotConfig {
        top_fraction: 0.10,
        resamples: 10,
        sample_size: 500,
        explore_random: Some(2000),
        seed,
        ..PivotConfig::default()
    }
}

struct DeskRun {
    /// (word, gold p, mean scaled divergence), in planted order
    scored: Vec<(String, f64, f64)>,
}

fn run_desk_pipeline(spec: &SynthSpec) -> DeskRun {
    let (c1, c2, gold) = generate(spec).unwrap();
    let f1 = count_frequencies(&c1).unwrap();
    let f2 = count_frequencies(&c2).unwrap();
    let s1 = train(&c1, &desk_trainer(spec.seed + 100)).unwrap();
    let s2 = train(&c2, &desk_trainer(spec.seed + 200)).unwrap();
    let pivots = build_pivot_resamples(&f1, &f2, &s1, &s2, &desk_pivot(spec.seed)).unwrap();
    let bounds = calibrate_bounds(
        &pivots.explore_set,
        &pivots.resamples,
        &s1,
        &s2,
        1.0,
        5,
        500,
        spec.seed,
    )
    .unwrap();
    let scored = spec
        .changed
        .iter()
        .map(|(w, p)| (w.clone(), *p))
        .chain(spec.stable.iter().map(|w| (w.clone(), 0.0)))
        .map(|(w, p)| {
            let s = score_word(&w, &pivots.resamples, &s1, &s2, 1.0, &bounds, 0.5).unwrap();
            assert_eq!(gold.graded[&w], p);
            (w, p, s.mean)
        })
        .collect();
    DeskRun { scored }
}

fn binary_spec(seed: u64) -> SynthSpec {
    SynthSpec {
        vocab_size: 2000,
        tokens_per_corpus: 200_000,
        clusters: 4,
        changed: (0..10).map(|i| (changed_name(i), 1.0)).collect(),
        stable: (0..10).map(stable_name).collect(),
        background_drift: 0.3,
        seed,
    }
}

fn accuracy_at(scored: &[(String, f64, f64)], h: f64) -> f64 {
    let hits = scored
        .iter()
        .filter(|(_, p, mean)| (*mean > h) == (*p > 0.0))
        .count();
    hits as f64 / scored.len() as f64
}

#[test]
fn criterion_binary_detection_on_planted_changes() {
    let started = Instant::now();

    // Calibrate h on a disjoint validation world, then apply to the test
    // world.
    let validation = run_desk_pipeline(&binary_spec(1001));
    let grid: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
    let best_acc = grid
        .iter()
        .map(|&h| accuracy_at(&validation.scored, h))
        .fold(0.0, f64::max);
    let best_band: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&h| accuracy_at(&validation.scored, h) == best_acc)
        .collect();
    let h = best_band[best_band.len() / 2]; // middle of the best band

    let test = run_desk_pipeline(&binary_spec(2002));
    let accuracy = accuracy_at(&test.scored, h);
    let elapsed = started.elapsed();
    assert!(
        accuracy >= 0.8,
        "binary accuracy {accuracy} below 0.8 at h={h} (validation acc {best_acc})"
    );
    assert!(
        elapsed.as_secs() < 600,
        "end-to-end run took {elapsed:?}, budget is 10 minutes"
    );
    pass(&format!(
        "synthetic binary detection: accuracy {accuracy:.3} >= 0.8 at h={h:.2} ({elapsed:.0?})"
    ));
}

#[test]
fn criterion_graded_ranking_tracks_planted_proportions() {
    let spec = SynthSpec {
        vocab_size: 2000,
        tokens_per_corpus: 200_000,
        clusters: 4,
        changed: [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .enumerate()
            .flat_map(|(level, &p)| (0..3).map(move |j| (changed_name(level * 3 + j), p)))
            .collect(),
        stable: vec![],
        background_drift: 0.3,
        seed: 3003,
    };
    let run = run_desk_pipeline(&spec);
    let means: Vec<f64> = run.scored.iter().map(|(_, _, m)| *m).collect();
    let ps: Vec<f64> = run.scored.iter().map(|(_, p, _)| *p).collect();
    let (tau, p_value) = eval::kendall_tau(&means, &ps).unwrap();
    assert!(tau >= 0.5, "kendall tau {tau} below 0.5");
    assert!(p_value < 0.05, "p-value {p_value} not significant");
    pass(&format!(
        "synthetic graded ranking: tau {tau:.3} >= 0.5, p {p_value:.4} < 0.05"
    ));
}

// --- determinism -------------------------------------------------------

fn small_detect_config(dir: &std::path::Path, out: &str) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.corpus_t1 = Some(dir.join("corpus_t1.txt"));
    cfg.corpus_t2 = Some(dir.join("corpus_t2.txt"));
    cfg.targets = Some(dir.join("targets.txt"));
    cfg.out_dir = dir.join(out);
    cfg.language = "synth".into();
    cfg.trainer = TrainerConfig {
        dim: 12,
        window: 3,
        epochs: 2,
        negatives: 3,
        learning_rate: 0.05,
        min_count: 3,
        ngram_range: (3, 6),
        bucket_count: 800,
        subsample: 0.0,
        workers: 1,
        seed: 42,
    };
    cfg.pivot = PivotConfig {
        top_fraction: 0.2,
        resamples: 3,
        sample_size: 40,
        explore_random: Some(200),
        seed: 42,
        ..PivotConfig::default()
    };
    cfg.calib_resamples = 2;
    cfg.calib_size = 60;
    cfg.threshold = 0.5;
    cfg
}

fn write_small_world(dir: &std::path::Path) {
    let spec = SynthSpec {
        vocab_size: 240,
        tokens_per_corpus: 27_000,
        clusters: 2,
        changed: vec![(changed_name(0), 1.0), (changed_name(1), 1.0)],
        stable: vec![stable_name(0), stable_name(1)],
        background_drift: 0.2,
        seed: 77,
    };
    let (c1, c2, gold) = generate(&spec).unwrap();
    write_corpus(&c1, &dir.join("corpus_t1.txt")).unwrap();
    write_corpus(&c2, &dir.join("corpus_t2.txt")).unwrap();
    let targets: Vec<String> = gold.binary.keys().cloned().collect();
    std::fs::write(dir.join("targets.txt"), targets.join("\n") + "\n").unwrap();
    let rows: Vec<(String, u8)> = gold
        .binary
        .iter()
        .map(|(w, &l)| (w.clone(), l))
        .collect();
    eval::write_binary_labels(&dir.join("gold_binary.txt"), &rows).unwrap();
    let graded: Vec<(String, f64)> = gold
        .graded
        .iter()
        .map(|(w, &s)| (w.clone(), s))
        .collect();
    eval::write_graded_scores(&dir.join("gold_graded.txt"), &graded).unwrap();
}

#[test]
fn criterion_detect_is_byte_deterministic_with_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    write_small_world(dir.path());

    let run = |out: &str| -> (Vec<u8>, Vec<u8>) {
        let cfg = small_detect_config(dir.path(), out);
        let outcome = cli::cmd_detect(&cfg).unwrap();
        assert!(outcome.run.failures.is_empty());
        (
            std::fs::read(outcome.task1).unwrap(),
            std::fs::read(outcome.task2).unwrap(),
        )
    };
    let (a1, a2) = run("out_a");
    let (b1, b2) = run("out_b");
    assert_eq!(a1, b1, "task1 answer files differ between runs");
    assert_eq!(a2, b2, "task2 answer files differ between runs");
    assert!(!a1.is_empty() && !a2.is_empty());
    pass("detect with a fixed seed and one training worker is byte-identical across runs");
}

// --- metric fixtures ----------------------------------------------------

#[test]
fn criterion_metric_fixtures_reproduce_hand_computed_values() {
    // accuracy: exact
    let gold: BTreeMap<String, u8> = (0..40).map(|i| (format!("w{i:02}"), 1u8)).collect();
    assert_eq!(eval::accuracy(&gold, &gold).unwrap(), 1.0);
    let flipped: BTreeMap<String, u8> = gold.iter().map(|(w, &l)| (w.clone(), 1 - l)).collect();
    assert_eq!(eval::accuracy(&flipped, &gold).unwrap(), 0.0);
    let mut pred = gold.clone();
    for w in ["w01", "w11", "w21"] {
        pred.insert(w.into(), 0);
    }
    assert_eq!(eval::accuracy(&pred, &gold).unwrap(), 0.925);

    // pearson: within 1e-9
    let x = [1.0, 2.0, 3.0, 4.0];
    let lin: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
    assert!((eval::pearson(&x, &lin).unwrap() - 1.0).abs() < 1e-9);
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    assert!((eval::pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-9);
    assert!((eval::pearson(&x, &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-9);

    // kendall tau: within 1e-9 of the pair-count oracle values
    let (tau, _) = eval::kendall_tau(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    assert!((tau - 1.0).abs() < 1e-9);
    let (tau, _) = eval::kendall_tau(&[1.0, 2.0, 3.0, 4.0, 5.0], &[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
    assert!((tau + 1.0).abs() < 1e-9);
    let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
    let ys = [2.0, 1.0, 4.0, 3.0, 5.0];
    let oracle = eval::kendall_tau_pair_count_oracle(&xs, &ys).unwrap();
    let (tau, _) = eval::kendall_tau(&xs, &ys).unwrap();
    assert!((tau - oracle).abs() < 1e-9);
    assert!((tau - 0.6).abs() < 1e-9);

    pass("metric fixtures: accuracy exact, correlations within 1e-9");
}

#[test]
fn criterion_evaluate_reproduces_published_average_accuracy() {
    // Four per-language prediction/gold pairs built to score exactly
    // 70.3 / 75.0 / 77.4 / 60.0 percent; their mean must report as 70.7%.
    let dir = tempfile::tempdir().unwrap();
    let langs = [
        ("english", 703usize),
        ("german", 750),
        ("swedish", 774),
        ("latin", 600),
    ];
    let mut inputs = Vec::new();
    for (lang, correct) in langs {
        let gold: Vec<(String, u8)> = (0..1000).map(|i| (format!("w{i:04}"), 1u8)).collect();
        let pred: Vec<(String, u8)> = (0..1000)
            .map(|i| (format!("w{i:04}"), u8::from(i < correct)))
            .collect();
        let gold_path = dir.path().join(format!("{lang}_gold.txt"));
        let pred_path = dir.path().join(format!("{lang}_pred.txt"));
        eval::write_binary_labels(&gold_path, &gold).unwrap();
        eval::write_binary_labels(&pred_path, &pred).unwrap();
        inputs.push(cli::LanguageEvalInput {
            label: lang.to_string(),
            pred_binary: Some(pred_path),
            gold_binary: Some(gold_path),
            pred_graded: None,
            gold_graded: None,
        });
    }
    let report = cli::evaluate_sets(&inputs).unwrap();
    let accs: Vec<f64> = report.languages.iter().map(|l| l.accuracy.unwrap()).collect();
    for (got, want) in accs.iter().zip([0.703, 0.750, 0.774, 0.600]) {
        assert!((got - want).abs() < 1e-12);
    }
    let mean = report.mean_accuracy.unwrap();
    assert!((mean - 0.70675).abs() < 1e-9, "mean accuracy {mean}");
    let rendered = report.render();
    assert!(
        rendered.contains("70.7%"),
        "expected 70.7% in report:\n{rendered}"
    );
    pass("evaluate reproduces the published four-language average accuracy 70.7");
}

// --- reproduction path ---------------------------------------------------

#[test]
fn criterion_documented_pipeline_runs_end_to_end() {
    // train -> detect (loading the trained files) -> evaluate, exactly as
    // the README describes for real corpora, exercised at desk scale.
    let dir = tempfile::tempdir().unwrap();
    write_small_world(dir.path());

    let mut cfg = small_detect_config(dir.path(), "answers");
    cfg.emb_t1 = Some(dir.path().join("t1.vec"));
    cfg.emb_t2 = Some(dir.path().join("t2.vec"));
    cli::cmd_train(&cfg).unwrap();
    assert!(dir.path().join("t1.vec").exists());
    assert!(dir.path().join("t1.vec.sub").exists());

    let outcome = cli::cmd_detect(&cfg).unwrap();
    assert!(outcome.run.failures.is_empty());
    assert_eq!(outcome.run.scores.len(), 4);

    cfg.gold_binary = Some(dir.path().join("gold_binary.txt"));
    cfg.gold_graded = Some(dir.path().join("gold_graded.txt"));
    let input = cli::evaluate_input_from_config(&cfg).unwrap();
    let report = cli::evaluate_sets(&[input]).unwrap();
    let accuracy = report.languages[0].accuracy.unwrap();
    assert!((0.0..=1.0).contains(&accuracy));
    assert!(report.languages[0].pearson.is_some());
    pass(&format!(
        "train -> detect -> evaluate pipeline runs end-to-end (desk accuracy {accuracy:.2})"
    ));
}
