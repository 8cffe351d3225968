use lexdrift::cli;
use lexdrift::config::RunConfig;
use lexdrift::eval;
use lexdrift::pivot::PivotConfig;
use lexdrift::synth::{generate, write_corpus, SynthSpec};
use lexdrift::trainer::TrainerConfig;

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec {
        vocab_size: 240,
        tokens_per_corpus: 27_000,
        clusters: 2,
        changed: vec![("qaza".into(), 1.0), ("qbzb".into(), 1.0)],
        stable: vec!["vama".into(), "vbmb".into()],
        background_drift: 0.2,
        seed: 77,
    };
    let (c1, c2, gold) = generate(&spec).unwrap();
    write_corpus(&c1, &dir.path().join("corpus_t1.txt")).unwrap();
    write_corpus(&c2, &dir.path().join("corpus_t2.txt")).unwrap();
    let targets: Vec<String> = gold.binary.keys().cloned().collect();
    std::fs::write(dir.path().join("targets.txt"), targets.join("\n") + "\n").unwrap();

    for (epochs, dim) in [(2, 12), (3, 16), (4, 16), (5, 20)] {
        let mut cfg = RunConfig::default();
        cfg.corpus_t1 = Some(dir.path().join("corpus_t1.txt"));
        cfg.corpus_t2 = Some(dir.path().join("corpus_t2.txt"));
        cfg.targets = Some(dir.path().join("targets.txt"));
        cfg.out_dir = dir.path().join(format!("out{epochs}_{dim}"));
        cfg.trainer = TrainerConfig {
            dim, window: 3, epochs, negatives: 3, learning_rate: 0.05,
            min_count: 3, ngram_range: (3, 6), bucket_count: 800,
            subsample: 0.0, workers: 1, seed: 42,
        };
        cfg.pivot = PivotConfig {
            top_fraction: 0.2, resamples: 3, sample_size: 40,
            explore_random: Some(200), seed: 42, ..PivotConfig::default()
        };
        cfg.calib_resamples = 2;
        cfg.calib_size = 60;
        cfg.threshold = 0.5;
        let outcome = cli::cmd_detect(&cfg).unwrap();
        let labels = eval::load_binary_labels(&outcome.task1).unwrap();
        let acc = eval::accuracy(&labels, &gold.binary).unwrap();
        print!("epochs={epochs} dim={dim} acc={acc} means:");
        for s in &outcome.run.scores {
            print!(" {}={:.3}", s.word, s.mean);
        }
        println!(" bounds=({:.5},{:.5})", outcome.run.bounds.lower, outcome.run.bounds.upper);
    }
}
