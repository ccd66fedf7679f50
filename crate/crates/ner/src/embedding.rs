use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use embkit_core::embeddings::WordVectors;

use crate::vocab::TokenVocab;
use crate::{Error, Result};

/// Where the tagger's input embeddings come from.
#[derive(Clone, Copy)]
pub enum EmbeddingSource<'a> {
    /// Standard-normal rows, updated during training.
    DefaultRandom,
    /// Rows copied from pretrained vectors and frozen; words missing from
    /// the vectors get a zero row.
    Pretrained(&'a WordVectors),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingLayer {
    pub table: Array2<f64>,
    pub frozen: bool,
    /// Task-vocabulary words (excluding padding and unknown) that were found
    /// in the pretrained vectors.
    pub covered: usize,
}

impl EmbeddingLayer {
    pub fn dim(&self) -> usize {
        self.table.ncols()
    }

    pub fn rows(&self) -> usize {
        self.table.nrows()
    }
}

pub fn build_embedding_layer<R: Rng + ?Sized>(
    vocab: &TokenVocab,
    source: EmbeddingSource<'_>,
    dim: usize,
    rng: &mut R,
) -> Result<EmbeddingLayer> {
    match source {
        EmbeddingSource::DefaultRandom => Ok(EmbeddingLayer {
            table: Array2::from_shape_simple_fn((vocab.len(), dim), || rng.sample(StandardNormal)),
            frozen: false,
            covered: 0,
        }),
        EmbeddingSource::Pretrained(vectors) => {
            if vectors.dim() != dim {
                return Err(Error::Config(format!(
                    "pretrained vectors have dimension {}, model expects {dim}",
                    vectors.dim()
                )));
            }
            let mut table = Array2::zeros((vocab.len(), dim));
            let mut covered = 0;
            for (id, word) in vocab.words().iter().enumerate().skip(2) {
                if let Some(v) = vectors.get(word) {
                    table.row_mut(id).assign(&ndarray::ArrayView1::from(v));
                    covered += 1;
                }
            }
            log::info!(
                "pretrained embeddings cover {covered} of {} task words",
                vocab.len() - 2
            );
            Ok(EmbeddingLayer {
                table,
                frozen: true,
                covered,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TaggedSentence;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pretrained_rows_are_copied_and_oov_zero() {
        let s = TaggedSentence::new(vec!["Hund".into(), "katt".into()], vec!["O".into(), "O".into()])
            .unwrap();
        let vocab = TokenVocab::from_sentences([&s]);
        let wv = WordVectors::new(vec!["hund".into(), "häst".into()], 2, vec![0.5, -1.25, 3.0, 4.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let layer = build_embedding_layer(&vocab, EmbeddingSource::Pretrained(&wv), 2, &mut rng).unwrap();
        assert!(layer.frozen);
        assert_eq!(layer.covered, 1);
        assert_eq!(layer.table.row(vocab.id("hund")).to_vec(), vec![0.5, -1.25]);
        assert_eq!(layer.table.row(vocab.id("katt")).to_vec(), vec![0.0, 0.0]);
        assert!(build_embedding_layer(&vocab, EmbeddingSource::Pretrained(&wv), 3, &mut rng).is_err());
        let d = build_embedding_layer(&vocab, EmbeddingSource::DefaultRandom, 4, &mut rng).unwrap();
        assert!(!d.frozen);
        assert_eq!(d.table.dim(), (4, 4));
    }
}
