use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingLayer;
use crate::model::TaggerConfig;
use crate::train::{evaluate_tagger, train_tagger, Metrics, TaskData, TrainedTagger};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub dev: Option<Metrics>,
    pub test: Option<Metrics>,
    pub dev_losses: Vec<f64>,
    pub best_epoch: Option<usize>,
    pub error: Option<String>,
}

/// Contents of `runs.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub config: TaggerConfig,
    pub runs: Vec<RunRecord>,
    pub mean_dev: Option<Metrics>,
    pub mean_test: Option<Metrics>,
    /// Set when at least one run failed; means cover successful runs only.
    pub partial: bool,
}

impl ProtocolReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Data(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
    }

    /// Per-run values of `metric`, written `split.score` with split `dev` or
    /// `test` and score `f1`, `precision`, `recall` or `accuracy`.
    pub fn values(&self, metric: &str) -> Result<Vec<f64>> {
        let (split, score) = metric
            .split_once('.')
            .ok_or_else(|| Error::Config(format!("metric {metric:?} is not of the form split.score")))?;
        let pick: fn(&Metrics) -> f64 = match score {
            "f1" => |m| m.f1,
            "precision" => |m| m.precision,
            "recall" => |m| m.recall,
            "accuracy" => |m| m.accuracy,
            _ => return Err(Error::Config(format!("unknown score {score:?}"))),
        };
        let values = self
            .runs
            .iter()
            .filter_map(|r| match split {
                "dev" => Some(r.dev.as_ref()),
                "test" => Some(r.test.as_ref()),
                _ => None,
            })
            .flatten()
            .map(pick)
            .collect::<Vec<_>>();
        if !matches!(split, "dev" | "test") {
            return Err(Error::Config(format!("unknown split {split:?}")));
        }
        Ok(values)
    }
}

/// Trains one model per seed on the fixed splits and scores it on dev and
/// test. A failing run is recorded and the remaining runs continue;
/// `on_run` sees every successfully trained model.
pub fn run_protocol<E, S>(
    config: &TaggerConfig,
    data: &TaskData,
    seeds: &[u64],
    mut make_embedding: E,
    mut on_run: S,
) -> Result<ProtocolReport>
where
    E: FnMut(u64) -> Result<EmbeddingLayer>,
    S: FnMut(usize, &TrainedTagger) -> Result<()>,
{
    if seeds.is_empty() {
        return Err(Error::Config("at least one run is required".into()));
    }
    let mut runs = Vec::with_capacity(seeds.len());
    for (run, &seed) in seeds.iter().enumerate() {
        let cfg = TaggerConfig {
            seed,
            ..config.clone()
        };
        let outcome = (|| -> Result<RunRecord> {
            let embedding = make_embedding(seed)?;
            let trained = train_tagger(&cfg, &data.train, &data.dev, embedding, data.labels.len())?;
            let dev = evaluate_tagger(&trained.model, &data.dev)?;
            let test = evaluate_tagger(&trained.model, &data.test)?;
            on_run(run, &trained)?;
            log::info!("run {} (seed {seed}): test {test}", run + 1);
            Ok(RunRecord {
                run,
                seed,
                dev: Some(dev),
                test: Some(test),
                dev_losses: trained.dev_losses,
                best_epoch: Some(trained.best_epoch),
                error: None,
            })
        })();
        runs.push(outcome.unwrap_or_else(|e| {
            log::error!("run {} (seed {seed}) failed: {e}", run + 1);
            RunRecord {
                run,
                seed,
                dev: None,
                test: None,
                dev_losses: Vec::new(),
                best_epoch: None,
                error: Some(e.to_string()),
            }
        }));
    }
    let dev: Vec<Metrics> = runs.iter().filter_map(|r| r.dev).collect();
    let test: Vec<Metrics> = runs.iter().filter_map(|r| r.test).collect();
    Ok(ProtocolReport {
        config: config.clone(),
        partial: dev.len() < runs.len(),
        mean_dev: Metrics::mean(&dev),
        mean_test: Metrics::mean(&test),
        runs,
    })
}
