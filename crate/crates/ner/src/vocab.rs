use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data::TaggedSentence;
use crate::{Error, Result};

/// Target id for positions that contribute nothing to loss or metrics.
pub const IGNORE: usize = usize::MAX;

pub const OUTSIDE: &str = "O";

/// Dense label ids; `O` is always id 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    labels: Vec<String>,
    #[serde(skip)]
    ids: HashMap<String, usize>,
}

impl LabelSet {
    /// Labels observed in `sentences`, `O` first and the rest sorted.
    pub fn from_sentences(sentences: &[TaggedSentence]) -> Self {
        let mut seen: Vec<String> = sentences
            .iter()
            .flat_map(|s| s.labels.iter().cloned())
            .filter(|l| l != OUTSIDE)
            .collect();
        seen.sort();
        seen.dedup();
        let mut labels = vec![OUTSIDE.to_owned()];
        labels.extend(seen);
        Self::from_labels(labels).expect("O is present")
    }

    pub fn from_labels(labels: Vec<String>) -> Result<Self> {
        if labels.first().map(String::as_str) != Some(OUTSIDE) {
            return Err(Error::Data("label set must start with O".into()));
        }
        let ids: HashMap<String, usize> =
            labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        if ids.len() != labels.len() {
            return Err(Error::Data("duplicate labels".into()));
        }
        Ok(LabelSet { labels, ids })
    }

    pub(crate) fn reindex(&mut self) {
        self.ids = self.labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id(&self, label: &str) -> Option<usize> {
        self.ids.get(label).copied()
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    /// Ids for `labels`; labels outside the set map to `O`. Returns the ids
    /// and the number of labels that were remapped.
    pub fn encode(&self, labels: &[String]) -> (Vec<usize>, usize) {
        let mut unseen = 0;
        let ids = labels
            .iter()
            .map(|l| {
                self.id(l).unwrap_or_else(|| {
                    unseen += 1;
                    0
                })
            })
            .collect();
        (ids, unseen)
    }
}

pub const PAD: usize = 0;
pub const UNK: usize = 1;

/// Lowercased task vocabulary. Id 0 is padding and id 1 the unknown token.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenVocab {
    words: Vec<String>,
    #[serde(skip)]
    ids: HashMap<String, usize>,
}

impl TokenVocab {
    pub fn from_sentences<'a, I>(sentences: I) -> Self
    where
        I: IntoIterator<Item = &'a TaggedSentence>,
    {
        let mut words = vec!["<pad>".to_owned(), "<unk>".to_owned()];
        let mut ids = HashMap::new();
        for s in sentences {
            for t in &s.tokens {
                let t = t.to_lowercase();
                if !ids.contains_key(&t) {
                    ids.insert(t.clone(), words.len());
                    words.push(t);
                }
            }
        }
        TokenVocab { words, ids }
    }

    pub(crate) fn reindex(&mut self) {
        self.ids = self
            .words
            .iter()
            .enumerate()
            .skip(2)
            .map(|(i, w)| (w.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn id(&self, token: &str) -> usize {
        self.ids.get(&token.to_lowercase()).copied().unwrap_or(UNK)
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t)).collect()
    }
}
