//! Text (`.vec`) and binary checkpoint formats.
//!
//! The text format is a `V dim` header followed by one line per word: the
//! surface form and `dim` space-separated values with 9 significant digits.
//!
//! The checkpoint layout (all integers little-endian):
//!
//! ```text
//! magic   8 bytes  "EMBKITCK"
//! version u32      1
//! meta    u64 length + JSON {config, vocab}
//! input   u64 rows, u64 cols, rows*cols f64
//! output  u64 rows, u64 cols, rows*cols f64
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::matrix::Matrix;
use super::model::EmbeddingModel;
use super::vectors::WordVectors;
use crate::corpus::Vocabulary;
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"EMBKITCK";
const VERSION: u32 = 1;

/// Writes composed word vectors in the text format.
pub fn write_text<W: Write>(vectors: &WordVectors, out: W) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{} {}", vectors.len(), vectors.dim())?;
    for id in 0..vectors.len() {
        out.write_all(vectors.word(id).as_bytes())?;
        for x in vectors.vector(id) {
            write!(out, " {x:.8e}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_text(model: &EmbeddingModel, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_text(&model.word_vectors(), file).map_err(|e| Error::io(path, e))
}

/// Reads the text format; the `V dim` header is optional.
pub fn read_text<R: Read>(input: R, path: &Path) -> Result<WordVectors> {
    let reader = BufReader::new(input);
    let mut words = Vec::new();
    let mut data = Vec::new();
    let mut dim: Option<usize> = None;
    let mut declared_rows: Option<usize> = None;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(' ').filter(|f| !f.is_empty()).collect();
        if lineno == 1 && fields.len() == 2 {
            if let (Ok(v), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                declared_rows = Some(v);
                dim = Some(d);
                continue;
            }
        }
        if fields.len() < 2 {
            return Err(Error::parse(path, lineno, "expected a word followed by values"));
        }
        let d = *dim.get_or_insert(fields.len() - 1);
        if fields.len() - 1 != d {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {d} values, found {}", fields.len() - 1),
            ));
        }
        for f in &fields[1..] {
            let x: f64 = f
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad number {f:?}")))?;
            data.push(x);
        }
        words.push(fields[0].to_owned());
    }
    if let Some(v) = declared_rows {
        if v != words.len() {
            return Err(Error::parse(
                path,
                1,
                format!("header declares {v} words, file has {}", words.len()),
            ));
        }
    }
    WordVectors::new(words, dim.unwrap_or(0), data)
}

pub fn load_text(path: &Path) -> Result<WordVectors> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_text(file, path)
}

#[derive(Serialize, Deserialize)]
struct Meta {
    config: ModelConfig,
    vocab: Vocabulary,
}

fn write_matrix<W: Write>(out: &mut W, m: &Matrix) -> std::io::Result<()> {
    out.write_all(&(m.rows() as u64).to_le_bytes())?;
    out.write_all(&(m.cols() as u64).to_le_bytes())?;
    for x in m.as_slice() {
        out.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_matrix<R: Read>(r: &mut R) -> std::io::Result<Matrix> {
    let rows = read_u64(r)? as usize;
    let cols = read_u64(r)? as usize;
    let mut data = Vec::with_capacity(rows * cols);
    let mut b = [0u8; 8];
    for _ in 0..rows * cols {
        r.read_exact(&mut b)?;
        data.push(f64::from_le_bytes(b));
    }
    Ok(Matrix::from_vec(rows, cols, data))
}

pub fn save_checkpoint(model: &EmbeddingModel, path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    let meta = serde_json::to_vec(&Meta {
        config: model.config().clone(),
        vocab: model.vocab().clone(),
    })
    .map_err(|e| Error::Checkpoint(e.to_string()))?;
    out.write_all(MAGIC).map_err(io)?;
    out.write_all(&VERSION.to_le_bytes()).map_err(io)?;
    out.write_all(&(meta.len() as u64).to_le_bytes()).map_err(io)?;
    out.write_all(&meta).map_err(io)?;
    write_matrix(&mut out, model.input()).map_err(io)?;
    write_matrix(&mut out, model.output()).map_err(io)?;
    out.flush().map_err(io)
}

pub fn load_checkpoint(path: &Path) -> Result<EmbeddingModel> {
    let io = |e| Error::io(path, e);
    let mut r = BufReader::new(File::open(path).map_err(io)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("not an embkit checkpoint".into()));
    }
    let mut v = [0u8; 4];
    r.read_exact(&mut v).map_err(io)?;
    let version = u32::from_le_bytes(v);
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let len = read_u64(&mut r).map_err(io)? as usize;
    let mut meta = vec![0u8; len];
    r.read_exact(&mut meta).map_err(io)?;
    let meta: Meta =
        serde_json::from_slice(&meta).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let input = read_matrix(&mut r).map_err(io)?;
    let output = read_matrix(&mut r).map_err(io)?;
    EmbeddingModel::from_parts(meta.vocab, meta.config, input, output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_vocab;
    use crate::embeddings::{cosine, Mode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn read(s: &str) -> Result<WordVectors> {
        read_text(s.as_bytes(), Path::new("mem.vec"))
    }

    #[test]
    fn header_and_headerless() {
        let wv = read("2 3\nx 1 2 3\ny 4 5 6\n").unwrap();
        assert_eq!((wv.len(), wv.dim()), (2, 3));
        let wv = read("a 1.0 0.0\n").unwrap();
        assert_eq!((wv.len(), wv.dim()), (1, 2));
        assert_eq!(wv.get("a").unwrap(), [1.0, 0.0]);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        match read("2 2\nx 1 2\ny 1 zz\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match read("x 1 2\ny 1 2 3\n") {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("expected 2 values"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(read("3 2\nx 1 2\n").is_err());
    }

    fn toy_model() -> EmbeddingModel {
        let words: Vec<String> = (0..30).map(|i| format!("ord{i}")).collect();
        let config = ModelConfig {
            dim: 7,
            mode: Mode::Subword,
            buckets: 97,
            min_count: 1,
            ..ModelConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        EmbeddingModel::init(build_vocab(&words, 1).unwrap(), config, &mut rng).unwrap()
    }

    #[test]
    fn text_round_trip_preserves_cosines_and_neighbours() {
        let model = toy_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vec");
        save_text(&model, &path).unwrap();
        let back = load_text(&path).unwrap();
        let orig = model.word_vectors();
        assert_eq!(back.words(), orig.words());
        for i in 0..orig.len() {
            for j in 0..orig.len() {
                let a = cosine(orig.vector(i), orig.vector(j)).unwrap();
                let b = cosine(back.vector(i), back.vector(j)).unwrap();
                assert!((a - b).abs() <= 1e-6);
            }
            let w = orig.word(i);
            assert_eq!(
                orig.most_similar(w, 1).unwrap()[0].id,
                back.most_similar(w, 1).unwrap()[0].id
            );
        }
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let model = toy_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        save_checkpoint(&model, &path).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back.input(), model.input());
        assert_eq!(back.output(), model.output());
        assert_eq!(back.config(), model.config());
        assert_eq!(back.vocab().entries(), model.vocab().entries());

        std::fs::write(&path, b"garbage!").unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Checkpoint(_))));
    }
}
