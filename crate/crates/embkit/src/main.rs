use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod embeddings_input;
mod eval;
mod manifest;
mod ner;
mod stats;
mod train;

/// Error raised for contradictory or invalid command-line settings.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "embkit", version, about = "Train and evaluate word embeddings")]
pub struct Cli {
    /// Print reports as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Where to write the run manifest (default: next to the outputs).
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    /// Only log warnings and errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train skipgram/CBoW embeddings (reference-style single-dash flags).
    Train(train::TrainArgs),
    /// Score an analogy test set with 3CosAdd.
    EvalAnalogy(eval::AnalogyArgs),
    /// Correlate cosine similarity with human word-pair scores.
    EvalWordsim(eval::WordsimArgs),
    /// Check an analogy file's section counts against a published reference.
    ValidateSet(eval::ValidateArgs),
    /// Nearest neighbours of a word.
    Nn(eval::NnArgs),
    /// Named-entity tagging with a Transformer encoder.
    #[command(subcommand)]
    Ner(ner::NerCommand),
    /// Significance testing.
    #[command(subcommand)]
    Stats(stats::StatsCommand),
}

/// Rewrites reference-style `-flag` arguments to `--flag`. Single letters
/// (`-h`, `-V`) and negative numbers are left alone.
fn normalize_args(args: impl Iterator<Item = String>) -> Vec<String> {
    args.enumerate()
        .map(|(i, a)| {
            let bytes = a.as_bytes();
            let long_single =
                i > 0 && bytes.len() > 2 && bytes[0] == b'-' && bytes[1].is_ascii_alphabetic();
            if long_single {
                format!("-{a}")
            } else {
                a
            }
        })
        .collect()
}

fn category(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<embkit_core::Error>() {
            return e.category();
        }
        if let Some(e) = cause.downcast_ref::<embkit_ner::Error>() {
            return e.category();
        }
        if cause.downcast_ref::<UsageError>().is_some() {
            return "config";
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io";
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return "parse";
        }
    }
    "runtime"
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let opts = GlobalOpts {
        json: cli.json,
        manifest: cli.manifest,
    };
    match cli.command {
        Command::Train(a) => train::run(a, &opts),
        Command::EvalAnalogy(a) => eval::analogy(a, &opts),
        Command::EvalWordsim(a) => eval::wordsim(a, &opts),
        Command::ValidateSet(a) => eval::validate(a, &opts),
        Command::Nn(a) => eval::nn(a, &opts),
        Command::Ner(c) => ner::run(c, &opts),
        Command::Stats(c) => stats::run(c, &opts),
    }
}

pub struct GlobalOpts {
    pub json: bool,
    pub manifest: Option<PathBuf>,
}

impl GlobalOpts {
    /// Explicit `--manifest`, else `default`.
    pub fn manifest_path(&self, default: PathBuf) -> PathBuf {
        self.manifest.clone().unwrap_or(default)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(normalize_args(std::env::args())) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(
        env_logger::Env::default().default_filter_or(if cli.quiet { "warn" } else { "info" }),
    )
    .format_timestamp(None)
    .format_target(false)
    .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let cat = category(&e);
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {cat}: {msg}");
            ExitCode::from(if cat == "config" { 2 } else { 1 })
        }
    }
}
