//! Corpus ingestion (CoNLL columns, GMB-style CSV) and the 70:15:15 split.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedSentence {
    pub tokens: Vec<String>,
    pub labels: Vec<String>,
}

impl TaggedSentence {
    pub fn new(tokens: Vec<String>, labels: Vec<String>) -> Result<Self> {
        if tokens.is_empty() || tokens.len() != labels.len() {
            return Err(Error::Data(format!(
                "sentence needs equal, non-zero token and label counts (got {} and {})",
                tokens.len(),
                labels.len()
            )));
        }
        Ok(TaggedSentence { tokens, labels })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Token-per-line format: first column is the token, last the label, blank
/// lines end sentences. Lines starting with `-DOCSTART-` are ignored.
pub fn parse_conll<R: Read>(input: R, path: &Path) -> Result<Vec<TaggedSentence>> {
    let mut out = Vec::new();
    let (mut tokens, mut labels) = (Vec::new(), Vec::new());
    let mut columns: Option<usize> = None;
    let mut flush = |tokens: &mut Vec<String>, labels: &mut Vec<String>| {
        if !tokens.is_empty() {
            out.push(TaggedSentence {
                tokens: std::mem::take(tokens),
                labels: std::mem::take(labels),
            });
        }
    };
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::parse(path, i + 1, "invalid UTF-8"),
            _ => Error::io(path, e),
        })?;
        let line = line.trim();
        if line.is_empty() {
            flush(&mut tokens, &mut labels);
            columns = None;
            continue;
        }
        if line.starts_with("-DOCSTART-") {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 {
            return Err(Error::parse(path, i + 1, "expected at least a token and a label"));
        }
        match columns {
            None => columns = Some(fields.len()),
            Some(c) if c != fields.len() => {
                return Err(Error::parse(
                    path,
                    i + 1,
                    format!("{} columns, sentence started with {c}", fields.len()),
                ))
            }
            Some(_) => {}
        }
        tokens.push(fields[0].to_owned());
        labels.push(fields[fields.len() - 1].to_owned());
    }
    flush(&mut tokens, &mut labels);
    Ok(out)
}

pub fn load_conll(path: &Path) -> Result<Vec<TaggedSentence>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_conll(file, path)
}

fn decode(bytes: &[u8]) -> String {
    // The public GMB export is Latin-1; fall back to it when not UTF-8.
    match std::str::from_utf8(bytes) {
        Ok(s) => s.to_owned(),
        Err(_) => bytes.iter().map(|&b| b as char).collect(),
    }
}

/// CSV with a header and columns `sentence-id, token, [...,] tag`. A blank
/// sentence id continues the previous sentence.
pub fn parse_gmb_csv<R: Read>(input: R, path: &Path) -> Result<Vec<TaggedSentence>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let mut out: Vec<TaggedSentence> = Vec::new();
    let mut current: Option<String> = None;
    for (i, record) in reader.byte_records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::parse(path, line, e.to_string()))?;
        if record.len() < 3 {
            return Err(Error::parse(path, line, "expected sentence id, token and tag columns"));
        }
        let id = decode(&record[0]);
        let id = id.trim();
        let token = decode(&record[1]);
        let tag = decode(&record[record.len() - 1]).trim().to_owned();
        if !id.is_empty() && current.as_deref() != Some(id) {
            current = Some(id.to_owned());
            out.push(TaggedSentence {
                tokens: Vec::new(),
                labels: Vec::new(),
            });
        }
        let Some(sentence) = out.last_mut() else {
            return Err(Error::parse(path, line, "token before the first sentence id"));
        };
        sentence.tokens.push(token);
        sentence.labels.push(tag);
    }
    Ok(out)
}

pub fn load_gmb_csv(path: &Path) -> Result<Vec<TaggedSentence>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_gmb_csv(file, path)
}

/// Sizes of the train/dev/test parts for `n` sentences.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let train = n * 7 / 10;
    let dev = n * 15 / 100;
    (train, dev, n - train - dev)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<TaggedSentence>,
    pub dev: Vec<TaggedSentence>,
    pub test: Vec<TaggedSentence>,
}

/// Seeded shuffle followed by a 70:15:15 cut (floors for train and dev, the
/// remainder to test).
pub fn split_dataset(mut sentences: Vec<TaggedSentence>, seed: u64) -> Result<Splits> {
    if sentences.len() < 3 {
        return Err(Error::Data(format!(
            "need at least 3 sentences to split, got {}",
            sentences.len()
        )));
    }
    let (train, dev, _) = split_sizes(sentences.len());
    sentences.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = sentences.split_off(train + dev);
    let dev = sentences.split_off(train);
    Ok(Splits {
        train: sentences,
        dev,
        test,
    })
}
