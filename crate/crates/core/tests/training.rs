use std::fmt::Write as _;
use std::path::Path;

use embkit_core::corpus::count_file;
use embkit_core::embeddings::{cosine, Arch, Loss, Mode, ModelConfig};
use embkit_core::eval::{eval_analogy, AnalogyOptions, AnalogyTestSet, Category, Lookup, Question, Section};
use embkit_core::trainer::{train, Trained};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_config() -> ModelConfig {
    ModelConfig {
        dim: 20,
        window: 4,
        epochs: 5,
        mode: Mode::Word2vec,
        min_count: 1,
        neg_table_size: 100_000,
        ..ModelConfig::default()
    }
}

fn write_corpus(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("corpus.txt");
    std::fs::write(&p, text).unwrap();
    p
}

fn run(text: &str, config: &ModelConfig, seed: u64, workers: usize) -> Trained {
    let dir = tempfile::tempdir().unwrap();
    let path = write_corpus(dir.path(), text);
    let vocab = count_file(&path, config.min_count).unwrap();
    train(&path, vocab, config, seed, workers).unwrap()
}

#[test]
fn two_word_loss_decreases() {
    let line = "a b ".repeat(50);
    let text: String = (0..100).map(|_| format!("{line}\n")).collect();
    let config = ModelConfig {
        epochs: 10,
        sample: 1.0,
        ..small_config()
    };
    let t = run(&text, &config, 1, 1);
    let l = &t.report.epoch_losses;
    assert_eq!(l.len(), 10);
    assert!(l[9] < l[0], "{l:?}");
}

#[test]
fn epochs_must_be_positive() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_corpus(dir.path(), "a b a b\n");
    let vocab = count_file(&path, 1).unwrap();
    let config = ModelConfig {
        epochs: 0,
        ..small_config()
    };
    assert!(train(&path, vocab.clone(), &config, 0, 1).is_err());
    assert!(train(&path, vocab.clone(), &small_config(), 0, 0).is_err());
    assert!(train(&dir.path().join("missing"), vocab, &small_config(), 0, 1).is_err());
}

fn cluster_corpus(seed: u64) -> (String, Vec<Vec<String>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clusters: Vec<Vec<String>> = (0..4)
        .map(|c| (0..8).map(|i| format!("c{c}w{i}")).collect())
        .collect();
    let mut text = String::new();
    for _ in 0..2000 {
        let c = &clusters[rng.random_range(0..4)];
        let words: Vec<&str> = (0..10).map(|_| c.choose(&mut rng).unwrap().as_str()).collect();
        writeln!(text, "{}", words.join(" ")).unwrap();
    }
    (text, clusters)
}

#[test]
fn clusters_separate() {
    let (text, clusters) = cluster_corpus(5);
    for (arch, loss) in [
        (Arch::Skipgram, Loss::NegativeSampling),
        (Arch::Cbow, Loss::HierarchicalSoftmax),
    ] {
        let config = ModelConfig {
            arch,
            loss,
            sample: 1.0,
            ..small_config()
        };
        let model = run(&text, &config, 11, 1).model;
        let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0, 0.0, 0);
        let all: Vec<(usize, &String)> = clusters
            .iter()
            .enumerate()
            .flat_map(|(c, ws)| ws.iter().map(move |w| (c, w)))
            .collect();
        for (i, (ca, a)) in all.iter().enumerate() {
            for (cb, b) in &all[i + 1..] {
                let s = cosine(&model.word_vector(a).unwrap(), &model.word_vector(b).unwrap()).unwrap();
                if ca == cb {
                    intra += s;
                    ni += 1;
                } else {
                    inter += s;
                    nx += 1;
                }
            }
        }
        let (intra, inter) = (intra / ni as f64, inter / nx as f64);
        assert!(intra > inter + 0.2, "{arch:?}: intra {intra} inter {inter}");
    }
}

#[test]
fn single_worker_is_bit_deterministic() {
    let (text, _) = cluster_corpus(2);
    let config = ModelConfig {
        mode: Mode::Subword,
        buckets: 5000,
        epochs: 2,
        ..small_config()
    };
    let a = run(&text, &config, 42, 1).model;
    let b = run(&text, &config, 42, 1).model;
    assert_eq!(a.input().as_slice(), b.input().as_slice());
    assert_eq!(a.output().as_slice(), b.output().as_slice());
    let c = run(&text, &config, 43, 1).model;
    assert_ne!(a.input().as_slice(), c.input().as_slice());
}

#[test]
fn multiple_workers_train_finite_models() {
    let (text, _) = cluster_corpus(3);
    let t = run(&text, &small_config(), 1, 4);
    assert!(t.model.input().is_finite());
    assert_eq!(t.report.epoch_losses.len(), 5);
    assert_eq!(t.report.tokens_processed, 5 * 20_000);
}

#[test]
fn subsampling_threshold_controls_updates() {
    // one very frequent word among rare ones
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut text = String::new();
    for _ in 0..500 {
        let mut words = vec!["the"; 18];
        words.push(["x", "y"][rng.random_range(0..2)]);
        writeln!(text, "{}", words.join(" ")).unwrap();
    }
    let updates = |sample: f64| {
        let config = ModelConfig {
            sample,
            epochs: 1,
            window: 1,
            ..small_config()
        };
        run(&text, &config, 4, 1).report.updates
    };
    // window 1 over full lines of 19 tokens: 2 * 18 context pairs per line
    assert_eq!(updates(1.0), 500 * 36);
    let tiny = updates(1e-12);
    assert!(tiny < 50, "{tiny} updates survived near-zero threshold");
}

const STEMS: [&str; 20] = [
    "bal", "cor", "dun", "fem", "gil", "hok", "jir", "kem", "lup", "mov", "nar", "pes",
    "quil", "ros", "sut", "tav", "vek", "wom", "yab", "zor",
];

/// Template corpus where each country and its capital share a topic word,
/// capitals appear in city contexts and countries in nation contexts.
fn planted_corpus(seed: u64, lines: usize) -> (String, Vec<(String, String)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(String, String)> = STEMS
        .iter()
        .map(|s| (format!("{s}land"), format!("{s}ville")))
        .collect();
    let fillers = ["and", "then", "also", "very", "often", "some", "many", "there"];
    let mut text = String::new();
    for _ in 0..lines {
        let i = rng.random_range(0..pairs.len());
        let (country, capital) = &pairs[i];
        let topic = format!("topic{i}");
        let f = fillers.choose(&mut rng).unwrap();
        let line = match rng.random_range(0..4) {
            0 => format!("{capital} is the capital city of {country} {f} {topic}"),
            1 => format!("the city {capital} has streets {topic} and a mayor {f}"),
            2 => format!("the nation {country} has people {topic} and a flag {f}"),
            _ => format!("{topic} {f} {country} government {topic} {capital} downtown"),
        };
        writeln!(text, "{line}").unwrap();
    }
    (text, pairs)
}

fn planted_questions(pairs: &[(String, String)]) -> AnalogyTestSet {
    let mut questions = Vec::new();
    for (i, a) in pairs.iter().enumerate() {
        for (j, c) in pairs.iter().enumerate() {
            if i != j {
                questions.push(Question {
                    words: [a.0.clone(), a.1.clone(), c.0.clone(), c.1.clone()],
                    line: questions.len() + 1,
                });
            }
        }
    }
    AnalogyTestSet {
        sections: vec![Section {
            name: "capital-world".into(),
            category: Category::Semantic,
            questions,
        }],
    }
}

#[test]
fn planted_analogies_beat_chance() {
    let (text, pairs) = planted_corpus(7, 6000);
    let config = ModelConfig {
        epochs: 5,
        ..small_config()
    };
    let model = run(&text, &config, 3, 1).model;
    let vectors = model.word_vectors();
    let report = eval_analogy(
        Lookup::new(&vectors),
        &planted_questions(&pairs),
        AnalogyOptions::default(),
    );
    let acc = report.accuracy.unwrap();
    let chance = 1.0 / vectors.len() as f64;
    assert!(acc > chance, "accuracy {acc} vs chance {chance}");
}
