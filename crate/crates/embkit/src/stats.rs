use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::{Args, Subcommand};
use serde::Serialize;

use embkit_core::stats::{bootstrap_ci_diff, read_values, BootstrapResult, DEFAULT_ALPHA, DEFAULT_RESAMPLES};
use embkit_ner::ProtocolReport;

use crate::manifest::RunManifest;
use crate::GlobalOpts;

#[derive(Subcommand, Debug)]
pub enum StatsCommand {
    /// Percentile bootstrap CI for mean(a) - mean(b).
    Bootstrap(BootstrapArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct BootstrapArgs {
    /// One value per line, or a `runs.json` from `ner train`.
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    pub resamples: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Metric taken from runs.json inputs.
    #[arg(long, default_value = "test.f1")]
    pub metric: String,
}

fn values(path: &Path, metric: &str) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| embkit_core::Error::Io {
        path: path.to_owned(),
        source: e,
    })?;
    if text.trim_start().starts_with('{') {
        Ok(ProtocolReport::read_json(path)?.values(metric)?)
    } else {
        Ok(read_values(path)?)
    }
}

#[derive(Serialize)]
struct Output<'a> {
    #[serde(flatten)]
    result: &'a BootstrapResult,
    interpretation: &'static str,
    n_a: usize,
    n_b: usize,
}

pub fn run(cmd: StatsCommand, opts: &GlobalOpts) -> Result<()> {
    let StatsCommand::Bootstrap(args) = cmd;
    let manifest = RunManifest::begin(
        opts.manifest_path(PathBuf::from("embkit-stats-bootstrap.manifest.json")),
        "stats bootstrap",
        &args,
        serde_json::json!({ "seed": args.seed }),
        &[&args.a, &args.b],
    )?;
    let outcome = (|| -> Result<()> {
        let a = values(&args.a, &args.metric)?;
        let b = values(&args.b, &args.metric)?;
        let r = bootstrap_ci_diff(&a, &b, args.resamples, args.alpha, args.seed)?;
        let out = Output {
            result: &r,
            interpretation: r.interpretation(),
            n_a: a.len(),
            n_b: b.len(),
        };
        if opts.json {
            println!("{}", serde_json::to_string_pretty(&out)?);
        } else {
            println!("{r}");
        }
        Ok(())
    })();
    manifest.finish(&outcome, &[])?;
    outcome
}
