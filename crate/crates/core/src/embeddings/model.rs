use rand::Rng;
use rayon::prelude::*;

use super::config::{Loss, Mode, ModelConfig};
use super::matrix::Matrix;
use super::subword::SubwordIndex;
use super::vectors::{Neighbor, WordVectors};
use crate::corpus::Vocabulary;
use crate::{Error, Result};

/// Trained (or training) embedding model.
///
/// Input rows `0..V` are word vectors; in subword mode rows `V..V+buckets`
/// hold the hashed n-gram vectors. The output matrix has one row per word
/// for negative sampling, or one per Huffman internal node (`V-1`) for
/// hierarchical softmax.
#[derive(Clone, Debug)]
pub struct EmbeddingModel {
    config: ModelConfig,
    vocab: Vocabulary,
    subwords: Option<SubwordIndex>,
    parts: Vec<Vec<u32>>,
    input: Matrix,
    output: Matrix,
}

fn output_rows(config: &ModelConfig, vocab_len: usize) -> usize {
    match config.loss {
        Loss::NegativeSampling => vocab_len,
        Loss::HierarchicalSoftmax => vocab_len.saturating_sub(1),
    }
}

impl EmbeddingModel {
    /// Fresh model: input rows uniform in `[-1/dim, 1/dim]`, output rows zero.
    pub fn init<R: Rng + ?Sized>(vocab: Vocabulary, config: ModelConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let rows = vocab.len() + Self::bucket_rows(&config);
        let input = Matrix::uniform(rows, config.dim, 1.0 / config.dim as f64, rng);
        let output = Matrix::zeros(output_rows(&config, vocab.len()), config.dim);
        Self::from_parts(vocab, config, input, output)
    }

    fn bucket_rows(config: &ModelConfig) -> usize {
        match config.mode {
            Mode::Subword => config.buckets,
            Mode::Word2vec => 0,
        }
    }

    /// Assembles a model from existing matrices, checking their shapes.
    pub fn from_parts(
        vocab: Vocabulary,
        config: ModelConfig,
        input: Matrix,
        output: Matrix,
    ) -> Result<Self> {
        config.validate()?;
        let v = vocab.len();
        let want_in = v + Self::bucket_rows(&config);
        let want_out = output_rows(&config, v);
        for (name, m, rows) in [("input", &input, want_in), ("output", &output, want_out)] {
            if m.rows() != rows || m.cols() != config.dim {
                return Err(Error::Config(format!(
                    "{name} matrix is {}x{}, expected {rows}x{}",
                    m.rows(),
                    m.cols(),
                    config.dim
                )));
            }
        }
        if !input.is_finite() || !output.is_finite() {
            return Err(Error::Domain("model contains non-finite parameters".into()));
        }
        let subwords = (config.mode == Mode::Subword).then_some(SubwordIndex {
            minn: config.minn,
            maxn: config.maxn,
            buckets: config.buckets,
        });
        let parts = (0..v)
            .map(|id| {
                let mut rows = vec![id as u32];
                if let Some(sw) = &subwords {
                    rows.extend(
                        sw.buckets_of(vocab.surface(id))
                            .into_iter()
                            .map(|b| (v + b) as u32),
                    );
                }
                rows
            })
            .collect();
        Ok(EmbeddingModel {
            config,
            vocab,
            subwords,
            parts,
            input,
            output,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn subword_index(&self) -> Option<&SubwordIndex> {
        self.subwords.as_ref()
    }

    pub fn input(&self) -> &Matrix {
        &self.input
    }

    pub fn output(&self) -> &Matrix {
        &self.output
    }

    pub fn input_mut(&mut self) -> &mut Matrix {
        &mut self.input
    }

    pub(crate) fn replace_matrices(&mut self, input: Matrix, output: Matrix) {
        self.input = input;
        self.output = output;
    }

    pub(crate) fn take_matrices(&mut self) -> (Matrix, Matrix) {
        (
            std::mem::replace(&mut self.input, Matrix::zeros(0, 0)),
            std::mem::replace(&mut self.output, Matrix::zeros(0, 0)),
        )
    }

    /// Input rows whose mean represents in-vocabulary word `id`: its own row
    /// first, then its n-gram buckets.
    pub fn word_rows(&self, id: usize) -> &[u32] {
        &self.parts[id]
    }

    /// Input rows for any word; OOV words use n-gram rows only.
    pub fn rows_for(&self, word: &str) -> Result<Vec<u32>> {
        if let Some(id) = self.vocab.id(word) {
            return Ok(self.parts[id].clone());
        }
        let sw = self
            .subwords
            .as_ref()
            .ok_or_else(|| Error::OutOfVocabulary(word.to_owned()))?;
        let v = self.vocab.len();
        let rows: Vec<u32> = sw
            .buckets_of(word)
            .into_iter()
            .map(|b| (v + b) as u32)
            .collect();
        if rows.is_empty() {
            return Err(Error::NoRepresentation(word.to_owned()));
        }
        Ok(rows)
    }

    fn mean_of_rows(&self, rows: &[u32]) -> Vec<f64> {
        let mut out = vec![0.0; self.config.dim];
        for &r in rows {
            for (o, x) in out.iter_mut().zip(self.input.row(r as usize)) {
                *o += x;
            }
        }
        let inv = 1.0 / rows.len() as f64;
        out.iter_mut().for_each(|x| *x *= inv);
        out
    }

    /// Vector for `word`: mean of its own row and n-gram rows (subword
    /// mode), or its row alone (word2vec mode).
    pub fn word_vector(&self, word: &str) -> Result<Vec<f64>> {
        Ok(self.mean_of_rows(&self.rows_for(word)?))
    }

    pub fn vocab_vector(&self, id: usize) -> Vec<f64> {
        self.mean_of_rows(&self.parts[id])
    }

    /// Composed vectors of every vocabulary word, in id order.
    pub fn word_vectors(&self) -> WordVectors {
        let dim = self.config.dim;
        let mut data = vec![0.0; self.vocab.len() * dim];
        data.par_chunks_mut(dim)
            .enumerate()
            .for_each(|(id, row)| row.copy_from_slice(&self.vocab_vector(id)));
        let words = self.vocab.entries().iter().map(|e| e.surface.clone()).collect();
        WordVectors::new(words, dim, data).expect("shape is consistent")
    }
}

pub fn word_vector(model: &EmbeddingModel, word: &str) -> Result<Vec<f64>> {
    model.word_vector(word)
}

/// Top-`k` vocabulary words by cosine to `word`'s vector, excluding `word`.
pub fn nearest_neighbors(model: &EmbeddingModel, word: &str, k: usize) -> Result<Vec<Neighbor>> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let query = model.word_vector(word)?;
    let table = model.word_vectors();
    let exclude: Vec<usize> = model.vocab().id(word).into_iter().collect();
    table.nearest(&query, k, table.len(), &exclude)
}
