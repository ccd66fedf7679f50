use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::Serialize;

use super::correlation::{pearson, spearman};
use super::Lookup;
use crate::embeddings::cosine;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct WordPair {
    pub first: String,
    pub second: String,
    pub score: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WordPairSet {
    pub pairs: Vec<WordPair>,
}

/// Parses `word1,word2,score` lines (tab- or comma-separated). A first line
/// whose score column is not numeric is taken as a header; `#` lines are
/// comments.
pub fn parse_wordpairs<R: Read>(input: R, path: &Path) -> Result<WordPairSet> {
    let mut pairs = Vec::new();
    let mut seen_data = false;
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if line.contains('\t') {
            line.split('\t').map(str::trim).collect()
        } else {
            line.split(',').map(str::trim).collect()
        };
        if fields.len() < 3 {
            return Err(Error::parse(path, lineno, "expected word1, word2, score"));
        }
        let score = match fields[2].parse::<f64>() {
            Ok(s) if s.is_finite() => s,
            Ok(_) => return Err(Error::parse(path, lineno, "score is not finite")),
            Err(_) if !seen_data => {
                seen_data = true;
                continue;
            }
            Err(_) => {
                return Err(Error::parse(path, lineno, format!("bad score {:?}", fields[2])))
            }
        };
        seen_data = true;
        pairs.push(WordPair {
            first: fields[0].to_owned(),
            second: fields[1].to_owned(),
            score,
        });
    }
    Ok(WordPairSet { pairs })
}

pub fn read_wordpairs(path: &Path) -> Result<WordPairSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_wordpairs(file, path)
}

#[derive(Clone, Debug, Serialize)]
pub struct WordPairReport {
    pub pearson: f64,
    pub spearman: f64,
    pub oov_fraction: f64,
    pub used: usize,
    pub total: usize,
}

/// Correlates model cosine with human scores over the pairs whose two words
/// are both representable. Words are lowercased before lookup.
pub fn eval_wordpairs(lookup: Lookup<'_>, set: &WordPairSet) -> Result<WordPairReport> {
    let vector = |w: &str| -> Option<Vec<f64>> {
        let w = w.to_lowercase();
        match lookup.vectors.get(&w) {
            Some(v) => Some(v.to_vec()),
            None => lookup.compose(&w),
        }
    };
    let mut model = Vec::new();
    let mut human = Vec::new();
    for p in &set.pairs {
        if let (Some(a), Some(b)) = (vector(&p.first), vector(&p.second)) {
            if let Ok(c) = cosine(&a, &b) {
                model.push(c);
                human.push(p.score);
            }
        }
    }
    if model.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} usable word pairs, at least 2 required",
            model.len()
        )));
    }
    let total = set.pairs.len();
    Ok(WordPairReport {
        pearson: pearson(&model, &human)?,
        spearman: spearman(&model, &human)?,
        oov_fraction: (total - model.len()) as f64 / total as f64,
        used: model.len(),
        total,
    })
}
