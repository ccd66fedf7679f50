use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;

use embkit_core::corpus::count_file;
use embkit_core::embeddings::{save_checkpoint, save_text, Arch, Loss, Mode, ModelConfig};
use embkit_core::trainer::train;

use crate::manifest::RunManifest;
use crate::{GlobalOpts, UsageError};

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    /// Training corpus, one sentence per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Output prefix: writes PREFIX.vec, PREFIX.bin and PREFIX.manifest.json.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 300)]
    pub dim: usize,
    /// Context window size.
    #[arg(long, default_value_t = 4)]
    pub ws: usize,
    /// sg or cbow.
    #[arg(long, default_value = "sg")]
    pub model: Arch,
    /// ns (negative sampling) or hs (hierarchical softmax).
    #[arg(long, default_value = "ns")]
    pub loss: Loss,
    #[arg(long, default_value_t = 10)]
    pub epoch: usize,
    /// Minimum n-gram length [default: 3].
    #[arg(long)]
    pub minn: Option<usize>,
    /// Maximum n-gram length [default: 6].
    #[arg(long)]
    pub maxn: Option<usize>,
    /// Number of n-gram hash buckets [default: 2000000].
    #[arg(long)]
    pub bucket: Option<usize>,
    /// word2vec or subword.
    #[arg(long, default_value = "subword")]
    pub mode: Mode,
    /// Negatives per target.
    #[arg(long, default_value_t = 5)]
    pub neg: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long = "minCount", default_value_t = 5)]
    pub min_count: u64,
    /// Subsampling threshold.
    #[arg(short = 't', long = "sample", default_value_t = 1e-4)]
    pub sample: f64,
    /// Worker threads; output is reproducible only with 1.
    #[arg(long, default_value_t = default_threads())]
    pub thread: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use exact sigmoid/log instead of lookup tables.
    #[arg(long = "exactSigmoid")]
    pub exact_sigmoid: bool,
    /// Also write the vocabulary as PREFIX.vocab.tsv.
    #[arg(long = "saveVocab")]
    pub save_vocab: bool,
}

impl TrainArgs {
    pub fn config(&self) -> Result<ModelConfig> {
        if self.mode == Mode::Word2vec {
            let set: Vec<&str> = [
                ("minn", self.minn.is_some()),
                ("maxn", self.maxn.is_some()),
                ("bucket", self.bucket.is_some()),
            ]
            .iter()
            .filter(|p| p.1)
            .map(|p| p.0)
            .collect();
            if !set.is_empty() {
                return Err(UsageError(format!(
                    "-mode word2vec has no character n-grams; remove -{}",
                    set.join(", -")
                ))
                .into());
            }
        }
        let d = ModelConfig::default();
        let config = ModelConfig {
            dim: self.dim,
            window: self.ws,
            arch: self.model,
            loss: self.loss,
            epochs: self.epoch,
            minn: self.minn.unwrap_or(d.minn),
            maxn: self.maxn.unwrap_or(d.maxn),
            mode: self.mode,
            negatives: self.neg,
            lr0: self.lr,
            buckets: self.bucket.unwrap_or(d.buckets),
            min_count: self.min_count,
            sample: self.sample,
            exact_sigmoid: self.exact_sigmoid,
            ..d
        };
        config.validate()?;
        Ok(config)
    }
}

fn with_suffix(prefix: &std::path::Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    config: &'a ModelConfig,
    label: String,
    vocabulary: usize,
    corpus_tokens: u64,
    report: &'a embkit_core::trainer::TrainReport,
    vectors: PathBuf,
    checkpoint: PathBuf,
}

pub fn run(args: TrainArgs, opts: &GlobalOpts) -> Result<()> {
    let config = args.config()?;
    if args.thread == 0 {
        return Err(UsageError("-thread must be at least 1".into()).into());
    }
    let vec_path = with_suffix(&args.output, ".vec");
    let bin_path = with_suffix(&args.output, ".bin");
    let vocab_path = with_suffix(&args.output, ".vocab.tsv");
    let manifest = RunManifest::begin(
        opts.manifest_path(with_suffix(&args.output, ".manifest.json")),
        "train",
        &args,
        serde_json::json!({ "seed": args.seed }),
        &[&args.input],
    )?;

    let outcome = (|| -> Result<()> {
        let vocab = count_file(&args.input, config.min_count)?;
        log::info!(
            "vocabulary: {} words, {} tokens",
            vocab.len(),
            vocab.total_tokens()
        );
        if args.save_vocab {
            let f = File::create(&vocab_path).with_context(|| vocab_path.display().to_string())?;
            vocab.write_tsv(BufWriter::new(f))?;
        }
        let (words, tokens) = (vocab.len(), vocab.total_tokens());
        let trained = train(&args.input, vocab, &config, args.seed, args.thread)?;
        save_text(&trained.model, &vec_path)?;
        save_checkpoint(&trained.model, &bin_path)?;
        let summary = TrainSummary {
            config: &config,
            label: config.label(),
            vocabulary: words,
            corpus_tokens: tokens,
            report: &trained.report,
            vectors: vec_path.clone(),
            checkpoint: bin_path.clone(),
        };
        if opts.json {
            println!("{}", serde_json::to_string_pretty(&summary)?);
        } else {
            println!(
                "trained {} ({} words) in {:.1}s; final epoch loss {:.4}",
                config,
                words,
                trained.report.seconds,
                trained.report.epoch_losses.last().copied().unwrap_or(f64::NAN)
            );
            println!("vectors: {}", vec_path.display());
            println!("checkpoint: {}", bin_path.display());
        }
        Ok(())
    })();
    let mut outputs = vec![vec_path, bin_path];
    if args.save_vocab {
        outputs.push(vocab_path);
    }
    manifest.finish(&outcome, &outputs)?;
    outcome
}
