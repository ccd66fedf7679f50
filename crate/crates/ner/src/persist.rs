//! Tagger checkpoint: `EMBKITNR`, u32 version, u64 length + JSON header
//! (config, vocabulary, labels, embedding flags), then the embedding table
//! and every weight tensor as little-endian f64 in [`Weights::tensors`]
//! order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingLayer;
use crate::model::{LayerParams, TaggerConfig, TaggerModel, Weights};
use crate::vocab::{LabelSet, TokenVocab};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"EMBKITNR";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    config: TaggerConfig,
    vocab: TokenVocab,
    labels: LabelSet,
    frozen: bool,
    covered: usize,
}

pub struct SavedTagger {
    pub model: TaggerModel,
    pub vocab: TokenVocab,
    pub labels: LabelSet,
}

fn write_f64s<W: Write>(w: &mut W, xs: &[f64]) -> std::io::Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn save_tagger(path: &Path, model: &TaggerModel, vocab: &TokenVocab, labels: &LabelSet) -> Result<()> {
    let header = Header {
        config: model.config.clone(),
        vocab: vocab.clone(),
        labels: labels.clone(),
        frozen: model.embedding.frozen,
        covered: model.embedding.covered,
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&(json.len() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&json).map_err(io)?;
    write_f64s(&mut w, model.embedding.table.as_slice().expect("standard layout")).map_err(io)?;
    for (_, t) in model.weights.tensors() {
        write_f64s(&mut w, t).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> std::io::Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn load_tagger(path: &Path) -> Result<SavedTagger> {
    let corrupt = |e: std::io::Error| Error::Checkpoint(format!("{}: {e}", path.display()));
    let mut r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(corrupt)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!("{} is not a tagger checkpoint", path.display())));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word).map_err(corrupt)?;
    if u32::from_le_bytes(word) != VERSION {
        return Err(Error::Checkpoint("unsupported checkpoint version".into()));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len).map_err(corrupt)?;
    let mut json = vec![0u8; u64::from_le_bytes(len) as usize];
    r.read_exact(&mut json).map_err(corrupt)?;
    let mut header: Header =
        serde_json::from_slice(&json).map_err(|e| Error::Checkpoint(e.to_string()))?;
    header.vocab.reindex();
    header.labels.reindex();
    header.config.validate()?;

    let cfg = &header.config;
    let (d, ff, l) = (cfg.model_dim, cfg.ff_dim, header.labels.len());
    let table = Array2::from_shape_vec((header.vocab.len(), d), read_f64s(&mut r, header.vocab.len() * d).map_err(corrupt)?)
        .expect("sized read");
    let mut m = |rows: usize, cols: usize| -> Result<Array2<f64>> {
        Ok(Array2::from_shape_vec((rows, cols), read_f64s(&mut r, rows * cols).map_err(corrupt)?).expect("sized read"))
    };
    let mut layers = Vec::with_capacity(cfg.layers);
    for _ in 0..cfg.layers {
        // field order matches LAYER_TENSORS
        let v = |a: Array2<f64>| Array1::from(a.into_raw_vec_and_offset().0);
        layers.push(LayerParams {
            wq: m(d, d)?,
            wk: m(d, d)?,
            wv: m(d, d)?,
            wo: m(d, d)?,
            bq: v(m(1, d)?),
            bk: v(m(1, d)?),
            bv: v(m(1, d)?),
            bo: v(m(1, d)?),
            ln1_g: v(m(1, d)?),
            ln1_b: v(m(1, d)?),
            w1: m(d, ff)?,
            b1: v(m(1, ff)?),
            w2: m(ff, d)?,
            b2: v(m(1, d)?),
            ln2_g: v(m(1, d)?),
            ln2_b: v(m(1, d)?),
        });
    }
    let wc = m(d, l)?;
    let bc = Array1::from(m(1, l)?.into_raw_vec_and_offset().0);
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(corrupt)?;
    if !rest.is_empty() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", rest.len())));
    }
    let embedding = EmbeddingLayer {
        table,
        frozen: header.frozen,
        covered: header.covered,
    };
    let model = TaggerModel::from_parts(header.config, embedding, Weights { layers, wc, bc })?;
    Ok(SavedTagger {
        model,
        vocab: header.vocab,
        labels: header.labels,
    })
}
