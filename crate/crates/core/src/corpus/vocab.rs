use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::subsample::{keep_probability, SubsampleParams};
use super::tokenize::tokenize_str;
use crate::{Error, Result};

pub const DEFAULT_MIN_COUNT: u64 = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub surface: String,
    pub count: u64,
}

/// Word inventory with dense ids. Ids follow descending count, ties broken
/// lexicographically by surface form, so identical input always yields
/// identical ids.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "VocabRepr", into = "VocabRepr")]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    id_of: HashMap<String, usize>,
    total_tokens: u64,
    min_count: u64,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    min_count: u64,
    entries: Vec<VocabEntry>,
}

impl From<VocabRepr> for Vocabulary {
    fn from(r: VocabRepr) -> Self {
        Vocabulary::from_sorted(r.entries, r.min_count)
    }
}

impl From<Vocabulary> for VocabRepr {
    fn from(v: Vocabulary) -> Self {
        VocabRepr {
            min_count: v.min_count,
            entries: v.entries,
        }
    }
}

impl Vocabulary {
    /// Builds a vocabulary from raw counts, dropping words below `min_count`.
    pub fn from_counts(counts: HashMap<String, u64>, min_count: u64) -> Result<Self> {
        if min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        let mut entries: Vec<VocabEntry> = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count)
            .map(|(surface, count)| VocabEntry { surface, count })
            .collect();
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.surface.cmp(&b.surface)));
        Ok(Self::from_sorted(entries, min_count))
    }

    fn from_sorted(entries: Vec<VocabEntry>, min_count: u64) -> Self {
        let id_of = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.surface.clone(), i))
            .collect();
        let total_tokens = entries.iter().map(|e| e.count).sum();
        Vocabulary {
            entries,
            id_of,
            total_tokens,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn id(&self, surface: &str) -> Option<usize> {
        self.id_of.get(surface).copied()
    }

    pub fn surface(&self, id: usize) -> &str {
        &self.entries[id].surface
    }

    pub fn count(&self, id: usize) -> u64 {
        self.entries[id].count
    }

    pub fn counts(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.count).collect()
    }

    /// Number of retained-word tokens in the corpus, before subsampling.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Per-word probability of keeping an occurrence under subsampling.
    pub fn keep_probabilities(&self, params: SubsampleParams) -> Vec<f64> {
        let total = self.total_tokens as f64;
        self.entries
            .iter()
            .map(|e| {
                keep_probability(e.count as f64 / total, params)
                    .expect("vocabulary counts are positive")
            })
            .collect()
    }

    /// Writes `surface<TAB>count` lines in id order.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.entries {
            writeln!(out, "{}\t{}", e.surface, e.count)?;
        }
        Ok(())
    }
}

/// Counts tokens and builds the vocabulary.
pub fn build_vocab<I, S>(tokens: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    for t in tokens {
        let t = t.as_ref();
        if let Some(c) = counts.get_mut(t) {
            *c += 1;
        } else {
            counts.insert(t.to_owned(), 1);
        }
    }
    Vocabulary::from_counts(counts, min_count)
}

/// Streams a UTF-8 text file line by line, tokenizing and counting, then
/// builds the vocabulary.
pub fn count_file(path: &Path, min_count: u64) -> Result<Vocabulary> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::with_capacity(1 << 20, file);
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut line = Vec::new();
    let mut offset = 0usize;
    loop {
        line.clear();
        let n = reader
            .read_until(b'\n', &mut line)
            .map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        let text = std::str::from_utf8(&line).map_err(|e| Error::Decode {
            offset: offset + e.valid_up_to(),
        })?;
        for t in tokenize_str(text) {
            *counts.entry(t).or_insert(0) += 1;
        }
        offset += n;
    }
    Vocabulary::from_counts(counts, min_count)
}
