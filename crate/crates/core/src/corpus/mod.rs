//! Text preprocessing, vocabulary construction and the derived tables that
//! training consumes: Huffman coding for hierarchical softmax, the unigram
//! table for negative sampling, and frequent-word subsampling.
//!
//! Everything here is built once, single-threaded, and is read-only
//! afterwards.

mod huffman;
mod negative;
mod subsample;
mod tokenize;
mod vocab;

pub use huffman::{build_huffman, HuffmanCoding};
pub use negative::{build_negative_table, NegativeTable, DEFAULT_NEGATIVE_TABLE_SIZE};
pub use subsample::{keep_probability, SubsampleParams};
pub use tokenize::{preprocess, tokenize_str};
pub use vocab::{build_vocab, count_file, VocabEntry, Vocabulary, DEFAULT_MIN_COUNT};
