use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use embkit_core::seed::derive;
use embkit_ner::{
    build_embedding_layer, encode_sentences, evaluate_tagger, hyperparam_search, load_conll,
    load_gmb_csv, load_tagger, prepare, run_protocol, save_tagger, split_dataset, train_tagger,
    write_trial_log, EmbeddingSource, OptimizerKind, SearchSpace, TaggedSentence, TaggerConfig,
    TaskData,
};

use crate::embeddings_input::load;
use crate::manifest::RunManifest;
use crate::{GlobalOpts, UsageError};

#[derive(Subcommand, Debug)]
pub enum NerCommand {
    /// Train and score `--runs` taggers on a 70:15:15 split.
    Train(TrainArgs),
    /// Random search over optimizer, layers and heads.
    Search(SearchArgs),
    /// Score a saved tagger on a labelled file.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
pub enum Format {
    Conll,
    GmbCsv,
}

#[derive(Args, Debug, Serialize)]
pub struct DataArgs {
    /// Labelled corpus.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "conll")]
    pub format: Format,
    /// Seed for the 70:15:15 shuffle [default: --seed].
    #[arg(long)]
    pub split_seed: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
pub struct ModelArgs {
    /// Pretrained vectors (.vec or .bin, frozen) or `default` for a
    /// trainable random table.
    #[arg(long, default_value = "default")]
    pub embeddings: String,
    #[arg(long, default_value_t = 6)]
    pub layers: usize,
    #[arg(long, default_value_t = 2)]
    pub heads: usize,
    #[arg(long, default_value = "adam")]
    pub optimizer: OptimizerKind,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    /// Model width [default: the pretrained dimension, else 300].
    #[arg(long)]
    pub model_dim: Option<usize>,
    #[arg(long, default_value_t = 1200)]
    pub ff_dim: usize,
    #[arg(long, default_value_t = 0.1)]
    pub dropout: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 128)]
    pub max_len: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 45)]
    pub budget: usize,
    /// Epochs per trial (reduced-cost proxy).
    #[arg(long, default_value_t = 3)]
    pub proxy_epochs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    /// Checkpoint file, or a `ner train` output directory.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "conll")]
    pub format: Format,
}

fn load_sentences(path: &Path, format: Format) -> Result<Vec<TaggedSentence>> {
    let s = match format {
        Format::Conll => load_conll(path)?,
        Format::GmbCsv => load_gmb_csv(path)?,
    };
    log::info!("{}: {} sentences", path.display(), s.len());
    Ok(s)
}

struct Prepared {
    data: TaskData,
    pretrained: Option<embkit_core::embeddings::WordVectors>,
    config: TaggerConfig,
}

fn prepare_all(d: &DataArgs, m: &ModelArgs) -> Result<Prepared> {
    let sentences = load_sentences(&d.data, d.format)?;
    let splits = split_dataset(sentences, d.split_seed.unwrap_or(m.seed))?;
    log::info!(
        "split: {} train, {} dev, {} test",
        splits.train.len(),
        splits.dev.len(),
        splits.test.len()
    );
    let data = prepare(&splits);
    let pretrained = if m.embeddings == "default" {
        None
    } else {
        Some(load(Path::new(&m.embeddings), false)?.vectors)
    };
    let model_dim = match (&pretrained, m.model_dim) {
        (Some(v), Some(d)) if v.dim() != d => {
            return Err(UsageError(format!(
                "--model-dim {d} differs from the pretrained dimension {}",
                v.dim()
            ))
            .into())
        }
        (Some(v), _) => v.dim(),
        (None, d) => d.unwrap_or(300),
    };
    let config = TaggerConfig {
        layers: m.layers,
        heads: m.heads,
        model_dim,
        ff_dim: m.ff_dim,
        dropout: m.dropout,
        optimizer: m.optimizer,
        lr: m.lr,
        batch_size: m.batch_size,
        epochs: m.epochs,
        max_len: m.max_len,
        seed: m.seed,
    };
    config.validate()?;
    Ok(Prepared {
        data,
        pretrained,
        config,
    })
}

impl Prepared {
    fn embedding(&self, seed: u64) -> embkit_ner::Result<embkit_ner::EmbeddingLayer> {
        let source = match &self.pretrained {
            Some(v) => EmbeddingSource::Pretrained(v),
            None => EmbeddingSource::DefaultRandom,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, "embedding", 0));
        build_embedding_layer(&self.data.vocab, source, self.config.model_dim, &mut rng)
    }
}

fn inputs<'a>(d: &'a DataArgs, m: &'a ModelArgs) -> Vec<&'a Path> {
    let mut v = vec![d.data.as_path()];
    if m.embeddings != "default" {
        v.push(Path::new(&m.embeddings));
    }
    v
}

pub fn run(cmd: NerCommand, opts: &GlobalOpts) -> Result<()> {
    match cmd {
        NerCommand::Train(a) => train(a, opts),
        NerCommand::Search(a) => search(a, opts),
        NerCommand::Eval(a) => eval(a, opts),
    }
}

fn train(args: TrainArgs, opts: &GlobalOpts) -> Result<()> {
    if args.runs == 0 {
        return Err(UsageError("--runs must be at least 1".into()).into());
    }
    std::fs::create_dir_all(&args.out).with_context(|| args.out.display().to_string())?;
    let seeds: Vec<u64> = (0..args.runs as u64).map(|i| derive(args.model.seed, "run", i)).collect();
    let manifest = RunManifest::begin(
        opts.manifest_path(args.out.join("manifest.json")),
        "ner train",
        &args,
        serde_json::json!({ "seed": args.model.seed, "split_seed": args.data.split_seed.unwrap_or(args.model.seed), "runs": seeds }),
        &inputs(&args.data, &args.model),
    )?;
    let runs_path = args.out.join("runs.json");
    let best_path = args.out.join("model.bin");
    let mut outputs = vec![runs_path.clone(), best_path.clone()];
    outputs.extend((0..args.runs).map(|i| args.out.join(format!("run-{i}.bin"))));

    let outcome = (|| -> Result<()> {
        let p = prepare_all(&args.data, &args.model)?;
        let mut best_dev = f64::NEG_INFINITY;
        let report = run_protocol(
            &p.config,
            &p.data,
            &seeds,
            |seed| p.embedding(seed),
            |run, trained| {
                let path = args.out.join(format!("run-{run}.bin"));
                save_tagger(&path, &trained.model, &p.data.vocab, &p.data.labels)?;
                let dev = evaluate_tagger(&trained.model, &p.data.dev)?;
                if dev.f1 > best_dev {
                    best_dev = dev.f1;
                    std::fs::copy(&path, &best_path).map_err(|e| embkit_ner::Error::Io {
                        path: best_path.clone(),
                        source: e,
                    })?;
                }
                Ok(())
            },
        )?;
        report.write_json(&runs_path)?;
        if opts.json {
            println!("{}", serde_json::to_string_pretty(&report)?);
        } else {
            for r in &report.runs {
                match (&r.test, &r.error) {
                    (Some(t), _) => println!("run {} (seed {}): test {}", r.run + 1, r.seed, t),
                    (None, e) => println!("run {} failed: {}", r.run + 1, e.as_deref().unwrap_or("?")),
                }
            }
            if let (Some(d), Some(t)) = (&report.mean_dev, &report.mean_test) {
                println!("mean dev:  {d}");
                println!("mean test: {t}");
            }
            println!("per-run metrics: {}", runs_path.display());
        }
        if report.mean_test.is_none() {
            anyhow::bail!(embkit_ner::Error::Data("every run failed".into()));
        }
        if report.partial {
            log::warn!("some runs failed; means cover the successful runs only");
        }
        Ok(())
    })();
    manifest.finish(&outcome, &outputs)?;
    outcome
}

fn search(args: SearchArgs, opts: &GlobalOpts) -> Result<()> {
    if args.proxy_epochs == 0 {
        return Err(UsageError("--proxy-epochs must be at least 1".into()).into());
    }
    std::fs::create_dir_all(&args.out).with_context(|| args.out.display().to_string())?;
    let manifest = RunManifest::begin(
        opts.manifest_path(args.out.join("manifest.json")),
        "ner search",
        &args,
        serde_json::json!({ "seed": args.model.seed }),
        &inputs(&args.data, &args.model),
    )?;
    let log_path = args.out.join("trials.tsv");
    let result_path = args.out.join("search.json");
    let outcome = (|| -> Result<()> {
        let p = prepare_all(&args.data, &args.model)?;
        let space = SearchSpace::standard(p.config.model_dim);
        let result = hyperparam_search(&space, args.budget, args.model.seed, |c| {
            let cfg = TaggerConfig {
                layers: c.layers,
                heads: c.heads,
                optimizer: c.optimizer,
                epochs: args.proxy_epochs,
                ..p.config.clone()
            };
            let trained = train_tagger(&cfg, &p.data.train, &p.data.dev, p.embedding(cfg.seed)?, p.data.labels.len())?;
            Ok(evaluate_tagger(&trained.model, &p.data.dev)?.f1)
        })?;
        let f = File::create(&log_path).with_context(|| log_path.display().to_string())?;
        write_trial_log(BufWriter::new(f), &result.trials)?;
        std::fs::write(&result_path, serde_json::to_string_pretty(&result)? + "\n")?;
        if opts.json {
            println!("{}", serde_json::to_string_pretty(&result)?);
        } else {
            println!(
                "best: {} layers, {} heads, {} (dev F1 {:.4}) after {} trials",
                result.best.layers,
                result.best.heads,
                result.best.optimizer,
                result.best_f1,
                result.trials.len()
            );
            println!("trial log: {}", log_path.display());
        }
        Ok(())
    })();
    manifest.finish(&outcome, &[log_path, result_path])?;
    outcome
}

fn eval(args: EvalArgs, opts: &GlobalOpts) -> Result<()> {
    let model_path = if args.model.is_dir() {
        args.model.join("model.bin")
    } else {
        args.model.clone()
    };
    let manifest = RunManifest::begin(
        opts.manifest_path(PathBuf::from("embkit-ner-eval.manifest.json")),
        "ner eval",
        &args,
        serde_json::Value::Null,
        &[&model_path, &args.data],
    )?;
    let outcome = (|| -> Result<()> {
        let saved = load_tagger(&model_path)?;
        let sentences = load_sentences(&args.data, args.format)?;
        let examples = encode_sentences(&saved.vocab, &saved.labels, &sentences);
        let m = evaluate_tagger(&saved.model, &examples)?;
        if opts.json {
            println!("{}", serde_json::to_string_pretty(&m)?);
        } else {
            println!("{m}");
        }
        Ok(())
    })();
    manifest.finish(&outcome, &[])?;
    outcome
}
