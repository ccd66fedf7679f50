//! Named-entity tagging with a Transformer encoder over fixed or trainable
//! word embeddings: corpus loading, training with best-dev checkpointing,
//! token-level scoring, random hyper-parameter search and the multi-run
//! protocol.

pub mod data;
pub mod embedding;
pub mod error;
pub mod model;
pub mod optim;
pub mod persist;
pub mod protocol;
pub mod search;
pub mod train;
pub mod vocab;

pub use data::{
    load_conll, load_gmb_csv, parse_conll, parse_gmb_csv, split_dataset, split_sizes, Splits,
    TaggedSentence,
};
pub use embedding::{build_embedding_layer, EmbeddingLayer, EmbeddingSource};
pub use error::{Error, Result};
pub use model::{Batch, Example, Gradients, OptimizerKind, TaggerConfig, TaggerModel, Weights};
pub use optim::Optimizer;
pub use persist::{load_tagger, save_tagger, SavedTagger};
pub use protocol::{run_protocol, ProtocolReport, RunRecord};
pub use search::{hyperparam_search, write_trial_log, Candidate, SearchResult, SearchSpace, Trial};
pub use train::{encode_sentences, evaluate_tagger, prepare, train_tagger, Metrics, TaskData, TrainedTagger};
pub use vocab::{LabelSet, TokenVocab, IGNORE, PAD, UNK};
