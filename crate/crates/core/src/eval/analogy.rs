use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::Lookup;
use crate::embeddings::vectors::{dot, unit};
use crate::embeddings::WordVectors;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Semantic,
    Syntactic,
}

impl Category {
    /// Sections named `gram*` are syntactic; everything else is semantic.
    pub fn of_section(name: &str) -> Self {
        if name.starts_with("gram") {
            Category::Syntactic
        } else {
            Category::Semantic
        }
    }
}

/// `a : b :: c : d`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Question {
    pub words: [String; 4],
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    pub category: Category,
    pub questions: Vec<Question>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnalogyTestSet {
    pub sections: Vec<Section>,
}

impl AnalogyTestSet {
    pub fn question_count(&self) -> usize {
        self.sections.iter().map(|s| s.questions.len()).sum()
    }

    pub fn category_total(&self, category: Category) -> usize {
        self.sections
            .iter()
            .filter(|s| s.category == category)
            .map(|s| s.questions.len())
            .sum()
    }
}

/// Parses the `: section` / four-words-per-line analogy format.
pub fn parse_analogy<R: Read>(input: R, path: &Path) -> Result<AnalogyTestSet> {
    let mut set = AnalogyTestSet::default();
    let mut names = HashSet::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix(':') {
            let name = name.trim().to_owned();
            if name.is_empty() {
                return Err(Error::parse(path, lineno, "empty section name"));
            }
            if !names.insert(name.clone()) {
                return Err(Error::parse(path, lineno, format!("duplicate section {name:?}")));
            }
            set.sections.push(Section {
                category: Category::of_section(&name),
                name,
                questions: Vec::new(),
            });
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() != 4 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 4 words, found {}", words.len()),
            ));
        }
        let section = set
            .sections
            .last_mut()
            .ok_or_else(|| Error::parse(path, lineno, "question before any section header"))?;
        section.questions.push(Question {
            words: [0, 1, 2, 3].map(|k| words[k].to_owned()),
            line: lineno,
        });
    }
    Ok(set)
}

pub fn read_analogy(path: &Path) -> Result<AnalogyTestSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_analogy(file, path)
}

/// 3CosAdd over the first `limit` rows of `vectors`: the row maximizing
/// cosine with `unit(b) - unit(a) + unit(c)`, skipping `exclude`.
fn solve_vectors(
    vectors: &WordVectors,
    a: &[f64],
    b: &[f64],
    c: &[f64],
    limit: usize,
    exclude: &[usize],
) -> Option<(usize, f64)> {
    let (ua, ub, uc) = (unit(a), unit(b), unit(c));
    let target: Vec<f64> = (0..ua.len()).map(|k| ub[k] - ua[k] + uc[k]).collect();
    let target = unit(&target);
    let mut best: Option<(usize, f64)> = None;
    for id in 0..limit.min(vectors.len()) {
        if exclude.contains(&id) {
            continue;
        }
        let s = dot(vectors.unit_vector(id), &target);
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((id, s));
        }
    }
    best
}

/// Answers `a : b :: c : ?` over the whole vocabulary. With
/// `exclude_inputs`, the query words themselves are not candidates.
pub fn solve_analogy(
    vectors: &WordVectors,
    a: &str,
    b: &str,
    c: &str,
    exclude_inputs: bool,
) -> Result<(String, f64)> {
    let mut ids = [0usize; 3];
    for (slot, w) in ids.iter_mut().zip([a, b, c]) {
        *slot = vectors
            .id(w)
            .ok_or_else(|| Error::OutOfVocabulary(w.to_owned()))?;
    }
    let exclude: &[usize] = if exclude_inputs { &ids } else { &[] };
    let (id, score) = solve_vectors(
        vectors,
        vectors.vector(ids[0]),
        vectors.vector(ids[1]),
        vectors.vector(ids[2]),
        vectors.len(),
        exclude,
    )
    .ok_or_else(|| Error::InsufficientData("no candidate words".into()))?;
    Ok((vectors.word(id).to_owned(), score))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AnalogyOptions {
    /// Only the most frequent `restrict_vocab` words are lookups and candidates.
    pub restrict_vocab: usize,
    pub case_fold: bool,
}

impl Default for AnalogyOptions {
    fn default() -> Self {
        AnalogyOptions {
            restrict_vocab: 300_000,
            case_fold: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Skipped,
    Answered { predicted: String, correct: bool },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub correct: usize,
    pub attempted: usize,
    pub skipped_oov: usize,
}

impl Tally {
    fn add(&mut self, o: &Outcome) {
        match o {
            Outcome::Skipped => self.skipped_oov += 1,
            Outcome::Answered { correct, .. } => {
                self.attempted += 1;
                self.correct += usize::from(*correct);
            }
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.correct += other.correct;
        self.attempted += other.attempted;
        self.skipped_oov += other.skipped_oov;
    }

    /// Percentage over attempted questions; `None` when nothing was attempted.
    pub fn accuracy(&self) -> Option<f64> {
        (self.attempted > 0).then(|| 100.0 * self.correct as f64 / self.attempted as f64)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SectionScore {
    pub name: String,
    pub category: Category,
    #[serde(flatten)]
    pub tally: Tally,
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalogyReport {
    pub sections: Vec<SectionScore>,
    pub semantic: Tally,
    pub syntactic: Tally,
    pub total: Tally,
    pub accuracy: Option<f64>,
    #[serde(skip)]
    pub outcomes: Vec<Vec<Outcome>>,
}

fn fold(word: &str, case_fold: bool) -> String {
    if case_fold {
        word.to_lowercase()
    } else {
        word.to_owned()
    }
}

/// Scores every question. Questions with any word outside the (folded,
/// truncated) vocabulary are skipped, unless `lookup` can compose vectors
/// for the three query words, in which case only the answer word has to
/// be in the vocabulary.
pub fn eval_analogy(
    lookup: Lookup<'_>,
    set: &AnalogyTestSet,
    options: AnalogyOptions,
) -> AnalogyReport {
    let vectors = lookup.vectors;
    let limit = options.restrict_vocab.min(vectors.len());
    let mut index: HashMap<String, usize> = HashMap::with_capacity(limit);
    for id in 0..limit {
        index.entry(fold(vectors.word(id), options.case_fold)).or_insert(id);
    }

    let answer = |q: &Question| -> Outcome {
        let folded: Vec<String> = q.words.iter().map(|w| fold(w, options.case_fold)).collect();
        let Some(&expected) = index.get(&folded[3]) else {
            return Outcome::Skipped;
        };
        let mut exclude = Vec::with_capacity(3);
        let mut inputs: Vec<Vec<f64>> = Vec::with_capacity(3);
        for w in &folded[..3] {
            match index.get(w) {
                Some(&id) => {
                    exclude.push(id);
                    inputs.push(vectors.vector(id).to_vec());
                }
                None => match lookup.compose(w) {
                    Some(v) => inputs.push(v),
                    None => return Outcome::Skipped,
                },
            }
        }
        match solve_vectors(vectors, &inputs[0], &inputs[1], &inputs[2], limit, &exclude) {
            Some((id, _)) => Outcome::Answered {
                predicted: vectors.word(id).to_owned(),
                correct: fold(vectors.word(id), options.case_fold)
                    == fold(vectors.word(expected), options.case_fold),
            },
            None => Outcome::Skipped,
        }
    };

    let outcomes: Vec<Vec<Outcome>> = set
        .sections
        .iter()
        .map(|s| s.questions.par_iter().map(answer).collect())
        .collect();

    let mut report = AnalogyReport {
        sections: Vec::with_capacity(set.sections.len()),
        semantic: Tally::default(),
        syntactic: Tally::default(),
        total: Tally::default(),
        accuracy: None,
        outcomes: Vec::new(),
    };
    for (section, outs) in set.sections.iter().zip(&outcomes) {
        let mut t = Tally::default();
        outs.iter().for_each(|o| t.add(o));
        match section.category {
            Category::Semantic => report.semantic.merge(&t),
            Category::Syntactic => report.syntactic.merge(&t),
        }
        report.total.merge(&t);
        report.sections.push(SectionScore {
            name: section.name.clone(),
            category: section.category,
            tally: t,
            accuracy: t.accuracy(),
        });
    }
    report.accuracy = report.total.accuracy();
    report.outcomes = outcomes;
    report
}

fn pct(a: Option<f64>) -> String {
    a.map_or_else(|| "n/a".to_owned(), |x| format!("{x:.2}"))
}

impl fmt::Display for AnalogyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<32} {:>8} {:>9} {:>8} {:>9}",
            "section", "correct", "attempted", "skipped", "accuracy"
        )?;
        let row = |f: &mut fmt::Formatter<'_>, name: &str, t: &Tally| {
            writeln!(
                f,
                "{:<32} {:>8} {:>9} {:>8} {:>9}",
                name,
                t.correct,
                t.attempted,
                t.skipped_oov,
                pct(t.accuracy())
            )
        };
        for s in &self.sections {
            row(f, &s.name, &s.tally)?;
        }
        row(f, "semantic", &self.semantic)?;
        row(f, "syntactic", &self.syntactic)?;
        row(f, "total", &self.total)
    }
}
