//! Intrinsic evaluation: analogy test sets (parsing, structural validation,
//! 3CosAdd scoring) and word-pair similarity correlation.

mod analogy;
mod correlation;
mod validate;
mod wordpairs;

pub use analogy::{
    eval_analogy, parse_analogy, read_analogy, solve_analogy, AnalogyOptions, AnalogyReport,
    AnalogyTestSet, Category, Outcome, Question, Section, SectionScore, Tally,
};
pub use correlation::{average_ranks, pearson, spearman};
pub use validate::{
    validate_set, validate_swedish, ExpectedCounts, SectionCheck, ValidationReport,
    GOOGLE_ENGLISH, SWEDISH,
};
pub use wordpairs::{
    eval_wordpairs, parse_wordpairs, read_wordpairs, WordPair, WordPairReport, WordPairSet,
};

use crate::embeddings::{EmbeddingModel, WordVectors};

/// Lookup used by the evaluators: a frozen vector table plus, optionally, a
/// model that can compose vectors for out-of-vocabulary query words.
#[derive(Clone, Copy)]
pub struct Lookup<'a> {
    pub vectors: &'a WordVectors,
    pub composer: Option<&'a EmbeddingModel>,
}

impl<'a> Lookup<'a> {
    pub fn new(vectors: &'a WordVectors) -> Self {
        Lookup {
            vectors,
            composer: None,
        }
    }

    pub fn with_composer(mut self, model: &'a EmbeddingModel) -> Self {
        self.composer = Some(model);
        self
    }

    fn compose(&self, word: &str) -> Option<Vec<f64>> {
        self.composer.and_then(|m| m.word_vector(word).ok())
    }
}
