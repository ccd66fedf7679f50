//! Embedding model representation: parameter matrices, the character n-gram
//! subword index, word-vector composition, similarity queries and
//! serialization.

mod config;
mod io;
mod matrix;
mod model;
mod subword;
pub(crate) mod vectors;

pub use config::{Arch, Loss, ModelConfig, Mode};
pub use io::{load_checkpoint, load_text, read_text, save_checkpoint, save_text, write_text};
pub use matrix::{Matrix, SharedMatrix};
pub use model::{nearest_neighbors, word_vector, EmbeddingModel};
pub use subword::{extract_ngrams, ngram_count, ngram_hash, SubwordIndex};
pub use vectors::{cosine, Neighbor, WordVectors};
