#![allow(dead_code)]

use embkit_ner::{
    build_embedding_layer, EmbeddingLayer, EmbeddingSource, OptimizerKind, TaggedSentence,
    TaggerConfig, TokenVocab,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sentences over a small lexicon: first names are B-per and a following
/// surname I-per, place names B-geo, everything else O.
pub fn toy_sentences(n: usize, seed: u64) -> Vec<TaggedSentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = ["anna", "erik", "lena", "olof"];
    let last = ["berg", "lund", "holm"];
    let places = ["umeå", "malmö", "kiruna", "visby"];
    let filler = ["och", "i", "det", "var", "en", "som", "till", "med", "har", "bor"];
    (0..n)
        .map(|_| {
            let len = rng.random_range(3..10);
            let (mut tokens, mut labels) = (Vec::new(), Vec::new());
            while tokens.len() < len {
                match rng.random_range(0..6) {
                    0 => {
                        tokens.push(first.choose(&mut rng).unwrap().to_string());
                        labels.push("B-per".to_string());
                        if rng.random_bool(0.5) {
                            tokens.push(last.choose(&mut rng).unwrap().to_string());
                            labels.push("I-per".to_string());
                        }
                    }
                    1 => {
                        tokens.push(places.choose(&mut rng).unwrap().to_string());
                        labels.push("B-geo".to_string());
                    }
                    _ => {
                        tokens.push(filler.choose(&mut rng).unwrap().to_string());
                        labels.push("O".to_string());
                    }
                }
            }
            TaggedSentence::new(tokens, labels).unwrap()
        })
        .collect()
}

pub fn tiny_config() -> TaggerConfig {
    TaggerConfig {
        layers: 2,
        heads: 2,
        model_dim: 16,
        ff_dim: 32,
        dropout: 0.0,
        optimizer: OptimizerKind::Adam,
        lr: 1e-3,
        batch_size: 8,
        epochs: 20,
        max_len: 32,
        seed: 1,
    }
}

pub fn random_embedding(vocab: &TokenVocab, dim: usize, seed: u64) -> EmbeddingLayer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    build_embedding_layer(vocab, EmbeddingSource::DefaultRandom, dim, &mut rng).unwrap()
}

/// A frozen table with small random rows, standing in for pretrained vectors.
pub fn frozen_embedding(vocab: &TokenVocab, dim: usize, seed: u64) -> EmbeddingLayer {
    let mut layer = random_embedding(vocab, dim, seed);
    layer.table.mapv_inplace(|x| 0.3 * x);
    layer.frozen = true;
    layer
}
