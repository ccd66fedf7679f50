use std::fs::File;
use std::io::Read;
use std::path::Path;

use anyhow::{Context, Result};
use embkit_core::embeddings::{load_checkpoint, load_text, EmbeddingModel, WordVectors};

use crate::UsageError;

const CHECKPOINT_MAGIC: &[u8; 8] = b"EMBKITCK";

/// Vectors from either a text `.vec` file or a binary checkpoint; the
/// checkpoint also keeps the model for composing out-of-vocabulary words.
pub struct LoadedEmbeddings {
    pub vectors: WordVectors,
    pub model: Option<EmbeddingModel>,
}

pub fn is_checkpoint(path: &Path) -> Result<bool> {
    let mut head = [0u8; 8];
    let mut f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let n = f.read(&mut head)?;
    Ok(n == 8 && &head == CHECKPOINT_MAGIC)
}

pub fn load(path: &Path, need_model: bool) -> Result<LoadedEmbeddings> {
    if is_checkpoint(path)? {
        let model = load_checkpoint(path)?;
        Ok(LoadedEmbeddings {
            vectors: model.word_vectors(),
            model: Some(model),
        })
    } else if need_model {
        Err(UsageError(format!(
            "{} is a text vector file; composing OOV words needs a binary checkpoint",
            path.display()
        ))
        .into())
    } else {
        Ok(LoadedEmbeddings {
            vectors: load_text(path)?,
            model: None,
        })
    }
}
