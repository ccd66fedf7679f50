use std::collections::HashMap;

use serde::Serialize;

use crate::{Error, Result};

/// `dot(u, v) / (|u| |v|)`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

#[inline]
pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[inline]
pub(crate) fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

pub(crate) fn unit(u: &[f64]) -> Vec<f64> {
    let n = norm(u);
    if n == 0.0 {
        vec![0.0; u.len()]
    } else {
        u.iter().map(|x| x / n).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Neighbor {
    pub word: String,
    pub id: usize,
    pub score: f64,
}

/// Frozen table of word vectors in frequency order (most frequent first),
/// with unit-normalized copies for similarity queries.
#[derive(Clone, Debug)]
pub struct WordVectors {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    raw: Vec<f64>,
    unit: Vec<f64>,
}

impl WordVectors {
    /// `data` is row-major, one row per word. For duplicate surfaces the
    /// first (most frequent) row wins in lookups.
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != words.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: words.len() * dim,
                found: data.len(),
            });
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            index.entry(w.clone()).or_insert(i);
        }
        let mut unit_rows = Vec::with_capacity(data.len());
        for row in data.chunks(dim.max(1)) {
            unit_rows.extend(unit(row));
        }
        Ok(WordVectors {
            words,
            index,
            dim,
            raw: data,
            unit: unit_rows,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn vector(&self, id: usize) -> &[f64] {
        &self.raw[id * self.dim..(id + 1) * self.dim]
    }

    pub fn unit_vector(&self, id: usize) -> &[f64] {
        &self.unit[id * self.dim..(id + 1) * self.dim]
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.id(word).map(|i| self.vector(i))
    }

    /// Top `k` words among the first `limit` rows by cosine to `query`,
    /// skipping ids in `exclude`. Scores descend; ties go to the lower id.
    pub fn nearest(
        &self,
        query: &[f64],
        k: usize,
        limit: usize,
        exclude: &[usize],
    ) -> Result<Vec<Neighbor>> {
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: query.len(),
            });
        }
        let q = unit(query);
        if q.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroVector);
        }
        let limit = limit.min(self.len());
        let mut scored: Vec<(f64, usize)> = (0..limit)
            .filter(|i| !exclude.contains(i))
            .map(|i| (dot(self.unit_vector(i), &q), i))
            .collect();
        let by_rank = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
        if k < scored.len() {
            scored.select_nth_unstable_by(k, by_rank);
            scored.truncate(k);
        }
        scored.sort_by(by_rank);
        Ok(scored
            .into_iter()
            .map(|(score, id)| Neighbor {
                word: self.words[id].clone(),
                id,
                score,
            })
            .collect())
    }

    /// Neighbours of an in-vocabulary word, excluding the word itself.
    pub fn most_similar(&self, word: &str, k: usize) -> Result<Vec<Neighbor>> {
        let id = self
            .id(word)
            .ok_or_else(|| Error::OutOfVocabulary(word.to_owned()))?;
        self.nearest(self.vector(id), k, self.len(), &[id])
    }
}
