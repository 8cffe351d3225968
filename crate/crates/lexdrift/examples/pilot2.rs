use lexdrift::change::raw_lambdas;
use lexdrift::corpus::count_frequencies;
use lexdrift::pivot::{build_pivot_resamples, PivotConfig};
use lexdrift::synth::{generate, SynthSpec};
use lexdrift::trainer::{train, TrainerConfig};
use rayon::prelude::*;

fn main() {
    let spec = SynthSpec {
        vocab_size: 2000,
        tokens_per_corpus: 200_000,
        clusters: 4,
        changed: (0..10).map(|i| (format!("q{}z{}", (b'a' + i as u8) as char, (b'a' + i as u8) as char), 1.0)).collect(),
        stable: (0..10).map(|i| format!("v{}m{}", (b'a' + i as u8) as char, (b'a' + i as u8) as char)).collect(),
        background_drift: 0.3,
        seed: 2002,
    };
    let (c1, c2, _) = generate(&spec).unwrap();
    let f1 = count_frequencies(&c1).unwrap();
    let f2 = count_frequencies(&c2).unwrap();
    let tcfg = TrainerConfig {
        dim: 50, window: 7, epochs: 5, negatives: 5, learning_rate: 0.025,
        min_count: 5, ngram_range: (3, 6), bucket_count: 20_000,
        subsample: 0.0, workers: 1, seed: 2102,
    };
    let s1 = train(&c1, &tcfg).unwrap();
    let s2 = train(&c2, &tcfg).unwrap();
    let pcfg = PivotConfig {
        top_fraction: 0.10, resamples: 10, sample_size: 500,
        explore_random: Some(5000), seed: 2002, ..PivotConfig::default()
    };
    let pr = build_pivot_resamples(&f1, &f2, &s1, &s2, &pcfg).unwrap();
    println!("pivots {} explore {}", pr.pivot_set.len(), pr.explore_set.len());

    // mean lambda for every common word, by count bucket
    let common: Vec<&String> = s1.words().iter().filter(|w| s2.contains(w)).collect();
    let mut scored: Vec<(String, u64, f64)> = common
        .par_iter()
        .map(|w| {
            let l = raw_lambdas(w, &pr.resamples, &s1, &s2, 1.0).unwrap();
            (w.to_string(), f1.count(w), l.iter().sum::<f64>() / l.len() as f64)
        })
        .collect();
    scored.sort_by(|a, b| a.2.total_cmp(&b.2));
    let n = scored.len();
    println!("n={n}");
    for pct in [1, 10, 25, 50, 75, 90, 95, 99] {
        let idx = (pct * n / 100).min(n - 1);
        println!("p{pct:02}: lambda={:.6}", scored[idx].2);
    }
    // lambda by count decile
    let mut by_count = scored.clone();
    by_count.sort_by_key(|x| x.1);
    for chunk in 0..10 {
        let lo = chunk * n / 10;
        let hi = ((chunk + 1) * n / 10).min(n);
        let slice = &by_count[lo..hi];
        let mean_l: f64 = slice.iter().map(|x| x.2).sum::<f64>() / slice.len() as f64;
        println!(
            "count {}..{}: mean lambda {:.6}",
            slice.first().unwrap().1,
            slice.last().unwrap().1,
            mean_l
        );
    }
    // where do planted words sit?
    for w in ["vama", "vfmf", "qaza"] {
        if let Some((_, c, l)) = scored.iter().find(|x| x.0 == w) {
            let rank = scored.iter().position(|x| x.0 == w).unwrap();
            println!("{w}: count={c} lambda={l:.6} rank={rank}/{n}");
        }
    }
}
