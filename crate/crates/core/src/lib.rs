//! Word-level and character n-gram embedding training, vector queries and
//! intrinsic evaluation (analogies, word-pair correlation), plus bootstrap
//! confidence intervals for comparing runs.

pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod seed;
pub mod stats;
pub mod trainer;

pub use error::{Error, Result};
