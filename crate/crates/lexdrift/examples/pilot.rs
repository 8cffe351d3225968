use std::time::Instant;

use lexdrift::change::{calibrate_bounds, score_word};
use lexdrift::corpus::count_frequencies;
use lexdrift::eval::kendall_tau;
use lexdrift::pivot::{build_pivot_resamples, PivotConfig};
use lexdrift::synth::{generate, SynthSpec};
use lexdrift::trainer::{train, TrainerConfig};

fn trainer_cfg(seed: u64) -> TrainerConfig {
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

fn run_pair(spec: &SynthSpec, label: &str) {
    let t0 = Instant::now();
    let (c1, c2, gold) = generate(spec).unwrap();
    println!("[{label}] generated {} + {} tokens in {:?}", c1.token_count(), c2.token_count(), t0.elapsed());
    let f1 = count_frequencies(&c1).unwrap();
    let f2 = count_frequencies(&c2).unwrap();

    let t = Instant::now();
    let s1 = train(&c1, &trainer_cfg(spec.seed + 100)).unwrap();
    println!("[{label}] trained t1 ({} words) in {:?}", s1.len(), t.elapsed());
    let t = Instant::now();
    let s2 = train(&c2, &trainer_cfg(spec.seed + 200)).unwrap();
    println!("[{label}] trained t2 ({} words) in {:?}", s2.len(), t.elapsed());

    let pivot_cfg = PivotConfig {
        top_fraction: 0.10,
        resamples: 10,
        sample_size: 500,
        explore_random: Some(2000),
        seed: spec.seed,
        ..PivotConfig::default()
    };
    let t = Instant::now();
    let pr = build_pivot_resamples(&f1, &f2, &s1, &s2, &pivot_cfg).unwrap();
    println!("[{label}] pivots {} explore {} in {:?}", pr.pivot_set.len(), pr.explore_set.len(), t.elapsed());

    let t = Instant::now();
    let bounds = calibrate_bounds(&pr.explore_set, &pr.resamples, &s1, &s2, 1.0, 5, 500, spec.seed).unwrap();
    println!("[{label}] bounds lower={:.4} upper={:.4} in {:?}", bounds.lower, bounds.upper, t.elapsed());

    let mut words: Vec<(&str, f64)> = spec.changed.iter().map(|(w, p)| (w.as_str(), *p)).collect();
    words.extend(spec.stable.iter().map(|w| (w.as_str(), 0.0)));
    let mut scores = Vec::new();
    for (w, p) in &words {
        let s = score_word(w, &pr.resamples, &s1, &s2, 1.0, &bounds, 0.4).unwrap();
        println!("[{label}] {w} p={p} raw_mean={:.4} mean={:.4}", s.raw.iter().sum::<f64>()/s.raw.len() as f64, s.mean);
        scores.push((s.mean, *p, gold.binary[*w]));
    }
    // best threshold
    let mut best = (0.0f64, 0.0f64);
    for i in 0..=100 {
        let h = i as f64 / 100.0;
        let acc = scores.iter().filter(|(m, _, g)| u8::from(*m > h) == *g).count() as f64 / scores.len() as f64;
        if acc > best.1 { best = (h, acc); }
    }
    println!("[{label}] best h={:.2} acc={:.3}", best.0, best.1);
    let xs: Vec<f64> = scores.iter().map(|s| s.0).collect();
    let ps: Vec<f64> = scores.iter().map(|s| s.1).collect();
    if ps.iter().any(|&p| p != ps[0]) {
        if let Ok((tau, pv)) = kendall_tau(&xs, &ps) {
            println!("[{label}] tau={tau:.3} p={pv:.4}");
        }
    }
}

fn main() {
    let total = Instant::now();
    let binary_spec = |seed: u64| SynthSpec {
        vocab_size: 2000,
        tokens_per_corpus: 200_000,
        clusters: 4,
        changed: (0..10).map(|i| (format!("q{c}z{c}", c = (b'a' + i as u8) as char), 1.0)).collect(),
        stable: (0..10).map(|i| format!("v{c}m{c}", c = (b'a' + i as u8) as char)).collect(),
        background_drift: 0.3,
        seed,
    };
    run_pair(&binary_spec(1001), "val");
    run_pair(&binary_spec(2002), "test");

    let graded = SynthSpec {
        vocab_size: 2000,
        tokens_per_corpus: 200_000,
        clusters: 4,
        changed: [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| {
                (0..3).map(move |j| {
                    let a = (b'a' + (i * 3 + j) as u8) as char;
                    (format!("q{a}z{a}"), p)
                })
            })
            .collect(),
        stable: vec![],
        background_drift: 0.3,
        seed: 3003,
    };
    run_pair(&graded, "graded");
    println!("total {:?}", total.elapsed());
}
