//! Stochastic gradient descent over a text corpus.
//!
//! Workers stream disjoint byte ranges of the corpus file (newline-aligned,
//! one line = one training sentence) and update the shared input and output
//! matrices without locks. Only a single worker is bit-reproducible.

mod context;
mod schedule;
mod sigmoid;
mod update;

use std::fs::File;
use std::io::{BufRead, BufReader, Seek, SeekFrom};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use context::{compose_hidden, for_each_context, make_contexts};
pub use schedule::lr_schedule;
pub use sigmoid::Sigmoid;
pub use update::{hs_probability, hs_update, ns_update, ns_update_with, Update, MAX_REDRAWS};

use crate::corpus::{
    tokenize_str, HuffmanCoding, NegativeTable, SubsampleParams, Vocabulary,
};
use crate::embeddings::{Arch, EmbeddingModel, Loss, ModelConfig, SharedMatrix};
use crate::{seed, Error, Result};

const NEGATIVE_POWER: f64 = 0.75;

/// Progress of one worker.
#[derive(Clone, Debug, Default)]
pub struct TrainState {
    pub tokens_processed: u64,
    pub lr_current: f64,
    pub loss_running: f64,
    updates: u64,
}

impl TrainState {
    fn observe_loss(&mut self, loss: f64) {
        self.updates += 1;
        self.loss_running += (loss - self.loss_running) / self.updates as f64;
    }
}

/// Summary of a finished training run.
#[derive(Clone, Debug, Serialize)]
pub struct TrainReport {
    /// Mean per-target loss in each epoch.
    pub epoch_losses: Vec<f64>,
    pub tokens_processed: u64,
    pub updates: u64,
    pub seconds: f64,
}

pub struct Trained {
    pub model: EmbeddingModel,
    pub report: TrainReport,
}

enum Objective {
    Negative(NegativeTable),
    Hierarchical(HuffmanCoding),
}

struct Shared<'a> {
    config: &'a ModelConfig,
    model: &'a EmbeddingModel,
    vocab: &'a Vocabulary,
    keep: Vec<f64>,
    objective: Objective,
    sigmoid: Sigmoid,
    input: SharedMatrix,
    output: SharedMatrix,
    processed: AtomicU64,
    planned: f64,
}

/// Trains a model on `corpus` for exactly `config.epochs` passes.
///
/// `vocab` must have been built from the same corpus. Input rows start
/// uniform in `[-1/dim, 1/dim]` and output rows at zero; all randomness
/// derives from `seed`.
pub fn train(
    corpus: &Path,
    vocab: Vocabulary,
    config: &ModelConfig,
    seed_value: u64,
    workers: usize,
) -> Result<Trained> {
    config.validate()?;
    if workers == 0 {
        return Err(Error::Config("at least one worker is required".into()));
    }
    let file_len = std::fs::metadata(corpus)
        .map_err(|e| Error::io(corpus, e))?
        .len();
    let objective = match config.loss {
        Loss::NegativeSampling => Objective::Negative(NegativeTable::from_counts(
            &vocab.counts(),
            NEGATIVE_POWER,
            config.neg_table_size,
        )?),
        Loss::HierarchicalSoftmax => {
            Objective::Hierarchical(HuffmanCoding::from_counts(&vocab.counts())?)
        }
    };
    let keep = vocab.keep_probabilities(SubsampleParams::new(config.sample)?);
    let mut init_rng = ChaCha8Rng::seed_from_u64(seed::derive(seed_value, "init", 0));
    let mut model = EmbeddingModel::init(vocab, config.clone(), &mut init_rng)?;
    let (input, output) = model.take_matrices();

    let started = Instant::now();
    let shared = Shared {
        config,
        model: &model,
        vocab: model.vocab(),
        keep,
        objective,
        sigmoid: Sigmoid::new(config.exact_sigmoid),
        input: input.into(),
        output: output.into(),
        processed: AtomicU64::new(0),
        planned: (config.epochs as u64 * model.vocab().total_tokens()) as f64,
    };

    let results: Vec<Result<Vec<(f64, u64)>>> = if workers == 1 {
        vec![run_worker(&shared, corpus, 0, file_len, 0, seed_value, started)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let start = file_len * w as u64 / workers as u64;
                    let end = file_len * (w as u64 + 1) / workers as u64;
                    let shared = &shared;
                    s.spawn(move || run_worker(shared, corpus, start, end, w, seed_value, started))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .collect()
        })
    };

    let mut per_epoch = vec![(0.0, 0u64); config.epochs];
    for r in results {
        for (acc, (sum, n)) in per_epoch.iter_mut().zip(r?) {
            acc.0 += sum;
            acc.1 += n;
        }
    }
    let Shared {
        input,
        output,
        processed,
        ..
    } = shared;
    let (input, output) = (input.into_matrix(), output.into_matrix());
    if !input.is_finite() || !output.is_finite() {
        return Err(Error::Domain("training diverged: non-finite parameters".into()));
    }
    model.replace_matrices(input, output);
    let report = TrainReport {
        epoch_losses: per_epoch
            .iter()
            .map(|&(s, n)| if n == 0 { 0.0 } else { s / n as f64 })
            .collect(),
        tokens_processed: processed.into_inner(),
        updates: per_epoch.iter().map(|p| p.1).sum(),
        seconds: started.elapsed().as_secs_f64(),
    };
    log::info!(
        "trained {} in {:.1}s, final epoch loss {:.4}",
        config,
        report.seconds,
        report.epoch_losses.last().copied().unwrap_or(0.0)
    );
    Ok(Trained { model, report })
}

/// Opens `path` positioned at the first line starting at or after `start`.
fn open_shard(path: &Path, start: u64) -> Result<(BufReader<File>, u64)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::with_capacity(1 << 20, file);
    if start == 0 {
        return Ok((reader, 0));
    }
    reader
        .seek(SeekFrom::Start(start - 1))
        .map_err(|e| Error::io(path, e))?;
    let mut skipped = Vec::new();
    let n = reader
        .read_until(b'\n', &mut skipped)
        .map_err(|e| Error::io(path, e))?;
    Ok((reader, start - 1 + n as u64))
}

fn run_worker(
    shared: &Shared<'_>,
    path: &Path,
    start: u64,
    end: u64,
    worker: usize,
    seed_value: u64,
    started: Instant,
) -> Result<Vec<(f64, u64)>> {
    let config = shared.config;
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed_value, "trainer", worker as u64));
    let mut neg_rng =
        ChaCha8Rng::seed_from_u64(seed::derive(seed_value, "negatives", worker as u64));
    let mut losses = vec![(0.0, 0u64); config.epochs];
    let mut state = TrainState {
        lr_current: config.lr0,
        ..TrainState::default()
    };
    let mut hidden = vec![0.0; config.dim];
    let mut line = Vec::new();
    let mut ids: Vec<u32> = Vec::new();
    let mut last_log = Instant::now();

    for epoch_loss in losses.iter_mut() {
        let (mut reader, mut pos) = open_shard(path, start)?;
        while pos < end {
            line.clear();
            let n = reader
                .read_until(b'\n', &mut line)
                .map_err(|e| Error::io(path, e))?;
            if n == 0 {
                break;
            }
            let text = std::str::from_utf8(&line).map_err(|e| Error::Decode {
                offset: pos as usize + e.valid_up_to(),
            })?;
            pos += n as u64;

            ids.clear();
            let mut seen = 0u64;
            for tok in tokenize_str(text) {
                if let Some(id) = shared.vocab.id(&tok) {
                    seen += 1;
                    if rng.random::<f64>() < shared.keep[id] {
                        ids.push(id as u32);
                    }
                }
            }
            let done = shared.processed.fetch_add(seen, Ordering::Relaxed) + seen;
            state.tokens_processed += seen;
            state.lr_current = lr_schedule(config.lr0, done as f64 / shared.planned);
            let lr = state.lr_current;

            for_each_context(&ids, config.window, &mut rng, |center, ctx| {
                let center_rows = shared.model.word_rows(center as usize);
                match config.arch {
                    Arch::Skipgram => {
                        for &target in ctx {
                            compose_hidden(&shared.input, &[center_rows], &mut hidden);
                            let u = output_update(shared, &hidden, target as usize, lr, &mut neg_rng);
                            apply_input(&shared.input, &[center_rows], &u.grad, lr);
                            epoch_loss.0 += u.loss;
                            epoch_loss.1 += 1;
                            state.observe_loss(u.loss);
                        }
                    }
                    Arch::Cbow => {
                        let words: Vec<&[u32]> =
                            ctx.iter().map(|&w| shared.model.word_rows(w as usize)).collect();
                        if compose_hidden(&shared.input, &words, &mut hidden) {
                            let u = output_update(shared, &hidden, center as usize, lr, &mut neg_rng);
                            apply_input(&shared.input, &words, &u.grad, lr);
                            epoch_loss.0 += u.loss;
                            epoch_loss.1 += 1;
                            state.observe_loss(u.loss);
                        }
                    }
                }
            });

            if worker == 0 && last_log.elapsed().as_secs_f64() >= 1.0 {
                last_log = Instant::now();
                let secs = started.elapsed().as_secs_f64().max(1e-9);
                log::info!(
                    "progress {:5.1}%  tokens/sec {:.0}  lr {:.6}  loss {:.4}",
                    100.0 * (done as f64 / shared.planned).min(1.0),
                    done as f64 / secs,
                    lr,
                    state.loss_running
                );
            }
        }
    }
    Ok(losses)
}

fn output_update(
    shared: &Shared<'_>,
    hidden: &[f64],
    target: usize,
    lr: f64,
    rng: &mut ChaCha8Rng,
) -> Update {
    match &shared.objective {
        Objective::Negative(table) => ns_update(
            hidden,
            target,
            table,
            shared.config.negatives,
            lr,
            &shared.output,
            &shared.sigmoid,
            rng,
        ),
        Objective::Hierarchical(coding) => {
            hs_update(hidden, target, coding, lr, &shared.output, &shared.sigmoid)
        }
    }
}

/// Every input row that fed the hidden vector moves by `-lr * grad`.
fn apply_input(input: &SharedMatrix, words: &[&[u32]], grad: &[f64], lr: f64) {
    for rows in words {
        for &r in rows.iter() {
            input.add_to_row(r as usize, grad, -lr);
        }
    }
}
