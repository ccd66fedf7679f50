use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use embkit_core::eval::{
    eval_analogy, eval_wordpairs, read_analogy, read_wordpairs, validate_set, AnalogyOptions,
    ExpectedCounts, Lookup, GOOGLE_ENGLISH, SWEDISH,
};

use crate::embeddings_input::load;
use crate::manifest::RunManifest;
use crate::GlobalOpts;

fn cwd_manifest(name: &str) -> PathBuf {
    PathBuf::from(format!("embkit-{name}.manifest.json"))
}

#[derive(Args, Debug, Serialize)]
pub struct AnalogyArgs {
    /// Text vectors (.vec) or a binary checkpoint (.bin).
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Analogy file with `: section` headers.
    #[arg(long)]
    pub questions: PathBuf,
    /// Only the most frequent N words are used.
    #[arg(long, default_value_t = 300_000)]
    pub restrict_vocab: usize,
    /// Compare words case-sensitively.
    #[arg(long)]
    pub no_case_fold: bool,
    /// Build vectors for out-of-vocabulary query words from their n-grams
    /// (needs a subword checkpoint).
    #[arg(long)]
    pub compose_oov: bool,
}

pub fn analogy(args: AnalogyArgs, opts: &GlobalOpts) -> Result<()> {
    let manifest = RunManifest::begin(
        opts.manifest_path(cwd_manifest("eval-analogy")),
        "eval-analogy",
        &args,
        serde_json::Value::Null,
        &[&args.embeddings, &args.questions],
    )?;
    let outcome = (|| -> Result<()> {
        let set = read_analogy(&args.questions)?;
        let emb = load(&args.embeddings, args.compose_oov)?;
        let mut lookup = Lookup::new(&emb.vectors);
        if let Some(model) = emb.model.as_ref().filter(|_| args.compose_oov) {
            lookup = lookup.with_composer(model);
        }
        let options = AnalogyOptions {
            restrict_vocab: args.restrict_vocab,
            case_fold: !args.no_case_fold,
        };
        let report = eval_analogy(lookup, &set, options);
        if opts.json {
            println!("{}", serde_json::to_string_pretty(&report)?);
        } else {
            print!("{report}");
        }
        Ok(())
    })();
    manifest.finish(&outcome, &[])?;
    outcome
}

#[derive(Args, Debug, Serialize)]
pub struct WordsimArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    /// `word1,word2,score` file (CSV or TSV, optional header).
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub compose_oov: bool,
}

pub fn wordsim(args: WordsimArgs, opts: &GlobalOpts) -> Result<()> {
    let manifest = RunManifest::begin(
        opts.manifest_path(cwd_manifest("eval-wordsim")),
        "eval-wordsim",
        &args,
        serde_json::Value::Null,
        &[&args.embeddings, &args.pairs],
    )?;
    let outcome = (|| -> Result<()> {
        let set = read_wordpairs(&args.pairs)?;
        let emb = load(&args.embeddings, args.compose_oov)?;
        let mut lookup = Lookup::new(&emb.vectors);
        if let Some(model) = emb.model.as_ref().filter(|_| args.compose_oov) {
            lookup = lookup.with_composer(model);
        }
        let report = eval_wordpairs(lookup, &set)?;
        if opts.json {
            println!("{}", serde_json::to_string_pretty(&report)?);
        } else {
            println!(
                "pearson {:.4}  spearman {:.4}  pairs used {}/{}  oov {:.1}%",
                report.pearson,
                report.spearman,
                report.used,
                report.total,
                100.0 * report.oov_fraction
            );
        }
        Ok(())
    })();
    manifest.finish(&outcome, &[])?;
    outcome
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
pub enum Reference {
    Swedish,
    Google,
}

#[derive(Args, Debug, Serialize)]
pub struct ValidateArgs {
    /// Analogy test file.
    pub file: PathBuf,
    #[arg(long, value_enum, default_value = "swedish")]
    pub reference: Reference,
}

pub fn validate(args: ValidateArgs, opts: &GlobalOpts) -> Result<()> {
    let manifest = RunManifest::begin(
        opts.manifest_path(cwd_manifest("validate-set")),
        "validate-set",
        &args,
        serde_json::Value::Null,
        &[&args.file],
    )?;
    let outcome = (|| -> Result<()> {
        let set = read_analogy(&args.file)?;
        let expected: &ExpectedCounts = match args.reference {
            Reference::Swedish => &SWEDISH,
            Reference::Google => &GOOGLE_ENGLISH,
        };
        let report = validate_set(&set, expected);
        if opts.json {
            println!("{}", serde_json::to_string_pretty(&report)?);
        } else {
            print!("{report}");
        }
        if !report.passed() {
            bail!(embkit_core::Error::InsufficientData(format!(
                "{} discrepancies against the {} reference",
                report.discrepancies.len(),
                report.reference
            )));
        }
        Ok(())
    })();
    manifest.finish(&outcome, &[])?;
    outcome
}

#[derive(Args, Debug, Serialize)]
pub struct NnArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub word: String,
    #[arg(long, short, default_value_t = 10)]
    pub k: usize,
}

pub fn nn(args: NnArgs, opts: &GlobalOpts) -> Result<()> {
    let manifest = RunManifest::begin(
        opts.manifest_path(cwd_manifest("nn")),
        "nn",
        &args,
        serde_json::Value::Null,
        &[&args.embeddings],
    )?;
    let outcome = (|| -> Result<()> {
        let emb = load(&args.embeddings, false)?;
        let neighbors = match &emb.model {
            Some(m) => embkit_core::embeddings::nearest_neighbors(m, &args.word, args.k)?,
            None => emb.vectors.most_similar(&args.word, args.k)?,
        };
        if opts.json {
            println!("{}", serde_json::to_string_pretty(&neighbors)?);
        } else {
            for n in &neighbors {
                println!("{}\t{:.4}", n.word, n.score);
            }
        }
        Ok(())
    })();
    manifest.finish(&outcome, &[])?;
    outcome
}
