use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use embkit_core::seed::derive;

use crate::data::{Splits, TaggedSentence};
use crate::embedding::EmbeddingLayer;
use crate::model::{Example, TaggerConfig, TaggerModel};
use crate::optim::Optimizer;
use crate::vocab::{LabelSet, TokenVocab, IGNORE};
use crate::{Error, Result};

/// Encoded splits with the vocabulary and label set they were encoded with.
#[derive(Clone, Debug)]
pub struct TaskData {
    pub vocab: TokenVocab,
    pub labels: LabelSet,
    pub train: Vec<Example>,
    pub dev: Vec<Example>,
    pub test: Vec<Example>,
}

pub fn encode_sentences(
    vocab: &TokenVocab,
    labels: &LabelSet,
    sentences: &[TaggedSentence],
) -> Vec<Example> {
    let mut unseen = 0;
    let out = sentences
        .iter()
        .map(|s| {
            let (targets, u) = labels.encode(&s.labels);
            unseen += u;
            Example {
                ids: vocab.encode(&s.tokens),
                targets,
            }
        })
        .collect();
    if unseen > 0 {
        log::warn!("{unseen} tokens carry labels unseen in training; scored as O");
    }
    out
}

/// Vocabulary from the tokens of every split, labels from the training split.
pub fn prepare(splits: &Splits) -> TaskData {
    let vocab = TokenVocab::from_sentences(splits.train.iter().chain(&splits.dev).chain(&splits.test));
    let labels = LabelSet::from_sentences(&splits.train);
    TaskData {
        train: encode_sentences(&vocab, &labels, &splits.train),
        dev: encode_sentences(&vocab, &labels, &splits.dev),
        test: encode_sentences(&vocab, &labels, &splits.test),
        vocab,
        labels,
    }
}

/// Token-level micro scores over tokens whose true or predicted label is
/// not `O` (id 0), plus plain token accuracy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub tokens: usize,
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if tp == 0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics {
            precision,
            recall,
            f1,
            accuracy: 0.0,
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            tokens: 0,
        }
    }

    /// Scores predicted label ids against gold ids (`IGNORE` skipped).
    pub fn score(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let (mut tp, mut fp, mut fn_, mut correct, mut tokens) = (0, 0, 0, 0, 0);
        for (gold, pred) in pairs {
            if gold == IGNORE {
                continue;
            }
            tokens += 1;
            if gold == pred {
                correct += 1;
                if gold != 0 {
                    tp += 1;
                }
                continue;
            }
            if pred != 0 {
                fp += 1;
            }
            if gold != 0 {
                fn_ += 1;
            }
        }
        let mut m = Metrics::from_counts(tp, fp, fn_);
        m.tokens = tokens;
        m.accuracy = if tokens == 0 { 0.0 } else { correct as f64 / tokens as f64 };
        m
    }

    /// Arithmetic mean of each score; counts are summed.
    pub fn mean(all: &[Metrics]) -> Option<Metrics> {
        if all.is_empty() {
            return None;
        }
        let n = all.len() as f64;
        let avg = |f: fn(&Metrics) -> f64| all.iter().map(f).sum::<f64>() / n;
        Some(Metrics {
            precision: avg(|m| m.precision),
            recall: avg(|m| m.recall),
            f1: avg(|m| m.f1),
            accuracy: avg(|m| m.accuracy),
            true_positives: all.iter().map(|m| m.true_positives).sum(),
            false_positives: all.iter().map(|m| m.false_positives).sum(),
            false_negatives: all.iter().map(|m| m.false_negatives).sum(),
            tokens: all.iter().map(|m| m.tokens).sum(),
        })
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "F1 {:.4}  precision {:.4}  recall {:.4}  accuracy {:.4}",
            self.f1, self.precision, self.recall, self.accuracy
        )
    }
}

pub fn evaluate_tagger(model: &TaggerModel, data: &[Example]) -> Result<Metrics> {
    if data.is_empty() {
        return Err(Error::Data("nothing to evaluate".into()));
    }
    use rayon::prelude::*;
    let predictions: Vec<Vec<usize>> = data.par_iter().map(|ex| model.predict(&ex.ids)).collect();
    Ok(Metrics::score(
        data.iter()
            .zip(&predictions)
            .flat_map(|(ex, p)| ex.targets.iter().copied().zip(p.iter().copied())),
    ))
}

pub struct TrainedTagger {
    /// Parameters from the epoch with the lowest dev loss.
    pub model: TaggerModel,
    pub dev_losses: Vec<f64>,
    pub train_losses: Vec<f64>,
    /// Zero-based epoch of the returned checkpoint.
    pub best_epoch: usize,
}

impl TrainedTagger {
    pub fn best_dev_loss(&self) -> f64 {
        self.dev_losses[self.best_epoch]
    }
}

/// Trains for exactly `config.epochs` epochs. After each epoch the dev loss
/// is computed and the checkpoint replaced only on strict improvement.
pub fn train_tagger(
    config: &TaggerConfig,
    train: &[Example],
    dev: &[Example],
    embedding: EmbeddingLayer,
    num_labels: usize,
) -> Result<TrainedTagger> {
    config.validate()?;
    if train.is_empty() || dev.is_empty() {
        return Err(Error::Data("train and dev splits must be non-empty".into()));
    }
    let mut init = ChaCha8Rng::seed_from_u64(derive(config.seed, "tagger-init", 0));
    let mut model = TaggerModel::new(config.clone(), embedding, num_labels, &mut init)?;
    let mut optimizer = Optimizer::new(config.optimizer, config.lr);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best: Option<(f64, usize, TaggerModel)> = None;
    let (mut dev_losses, mut train_losses) = (Vec::new(), Vec::new());

    for epoch in 0..config.epochs {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive(config.seed, "shuffle", epoch as u64)));
        let (mut sum, mut batches) = (0.0, 0);
        for batch in order.chunks(config.batch_size) {
            let examples: Vec<Example> = batch.iter().map(|&i| train[i].clone()).collect();
            let dropout_seed = derive(config.seed, "dropout", optimizer.steps());
            let (loss, grads) = model.loss_and_gradients(&examples, Some(dropout_seed));
            if !loss.is_finite() {
                return Err(Error::Diverged(format!(
                    "non-finite training loss at epoch {} step {}",
                    epoch + 1,
                    optimizer.steps()
                )));
            }
            optimizer.step(&mut model, &grads);
            sum += loss;
            batches += 1;
        }
        if !model.weights.is_finite() {
            return Err(Error::Diverged(format!("non-finite parameters after epoch {}", epoch + 1)));
        }
        let dev_loss = model.loss(dev);
        if !dev_loss.is_finite() {
            return Err(Error::Diverged(format!("non-finite dev loss at epoch {}", epoch + 1)));
        }
        train_losses.push(sum / batches as f64);
        dev_losses.push(dev_loss);
        let improved = best.as_ref().is_none_or(|(b, _, _)| dev_loss < *b);
        log::info!(
            "epoch {:>3}  train loss {:.4}  dev loss {:.4}{}",
            epoch + 1,
            sum / batches as f64,
            dev_loss,
            if improved { "  (saved)" } else { "" }
        );
        if improved {
            best = Some((dev_loss, epoch, model.clone()));
        }
    }
    let (_, best_epoch, model) = best.expect("at least one epoch");
    Ok(TrainedTagger {
        model,
        dev_losses,
        train_losses,
        best_epoch,
    })
}
