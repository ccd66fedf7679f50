use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use embkit_core::seed::derive;

use crate::model::OptimizerKind;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Candidate {
    pub optimizer: OptimizerKind,
    pub layers: usize,
    pub heads: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchSpace {
    pub optimizers: Vec<OptimizerKind>,
    pub layers: Vec<usize>,
    pub heads: Vec<usize>,
}

impl SearchSpace {
    /// Adam or RMSProp, 6 to 12 layers, 2 to 6 heads (those dividing
    /// `model_dim`).
    pub fn standard(model_dim: usize) -> Self {
        SearchSpace {
            optimizers: vec![OptimizerKind::Adam, OptimizerKind::RmsProp],
            layers: (6..=12).collect(),
            heads: (2..=6).filter(|&h| model_dim.is_multiple_of(h)).collect(),
        }
    }

    pub fn points(&self) -> Vec<Candidate> {
        let mut out = Vec::new();
        for &optimizer in &self.optimizers {
            for &layers in &self.layers {
                for &heads in &self.heads {
                    out.push(Candidate { optimizer, layers, heads });
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.optimizers.len() * self.layers.len() * self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, c: &Candidate) -> bool {
        self.optimizers.contains(&c.optimizer)
            && self.layers.contains(&c.layers)
            && self.heads.contains(&c.heads)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trial {
    pub index: usize,
    pub candidate: Candidate,
    /// Dev F1, or `None` when the trial failed.
    pub dev_f1: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub best: Candidate,
    pub best_f1: f64,
    pub trials: Vec<Trial>,
}

/// Random search without replacement: the first `budget` points of a seeded
/// shuffle of the space are scored by `evaluate` (dev F1). A budget larger
/// than the space covers the whole space. Ties go to the earlier trial.
pub fn hyperparam_search<F>(
    space: &SearchSpace,
    budget: usize,
    seed: u64,
    mut evaluate: F,
) -> Result<SearchResult>
where
    F: FnMut(&Candidate) -> Result<f64>,
{
    if budget == 0 {
        return Err(Error::Config("search budget must be at least 1".into()));
    }
    if space.is_empty() {
        return Err(Error::Config("empty search space".into()));
    }
    let mut points = space.points();
    points.shuffle(&mut ChaCha8Rng::seed_from_u64(derive(seed, "search", 0)));
    points.truncate(budget);

    let mut trials = Vec::with_capacity(points.len());
    let mut best: Option<(f64, Candidate)> = None;
    for (index, candidate) in points.into_iter().enumerate() {
        let outcome = evaluate(&candidate);
        let trial = match outcome {
            Ok(f1) => {
                log::info!(
                    "trial {:>2}: {} layers, {} heads, {}: dev F1 {:.4}",
                    index + 1,
                    candidate.layers,
                    candidate.heads,
                    candidate.optimizer,
                    f1
                );
                if best.is_none_or(|(b, _)| f1 > b) {
                    best = Some((f1, candidate));
                }
                Trial { index, candidate, dev_f1: Some(f1), error: None }
            }
            Err(e) => {
                log::warn!("trial {} failed: {e}", index + 1);
                Trial { index, candidate, dev_f1: None, error: Some(e.to_string()) }
            }
        };
        trials.push(trial);
    }
    let (best_f1, best) = best.ok_or_else(|| Error::Data("every search trial failed".into()))?;
    Ok(SearchResult { best, best_f1, trials })
}

/// Tab-separated trial log with a header row.
pub fn write_trial_log<W: Write>(mut out: W, trials: &[Trial]) -> std::io::Result<()> {
    writeln!(out, "trial\toptimizer\tlayers\theads\tdev_f1\terror")?;
    for t in trials {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            t.index + 1,
            t.candidate.optimizer,
            t.candidate.layers,
            t.candidate.heads,
            t.dev_f1.map_or("NA".to_owned(), |f| format!("{f:.6}")),
            t.error.as_deref().unwrap_or("")
        )?;
    }
    Ok(())
}
