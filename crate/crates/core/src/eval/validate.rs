use std::fmt;

use serde::Serialize;

use super::analogy::{AnalogyTestSet, Category};

/// Published section structure of an analogy test set.
#[derive(Clone, Copy, Debug)]
pub struct ExpectedCounts {
    pub name: &'static str,
    pub sections: &'static [(&'static str, usize)],
    pub semantic: usize,
    pub syntactic: usize,
    pub total: usize,
}

/// The Swedish analogy test set: 5 semantic and 6 syntactic sections.
pub const SWEDISH: ExpectedCounts = ExpectedCounts {
    name: "swedish",
    sections: &[
        ("capital-common-countries", 342),
        ("capital-world", 7832),
        ("currency", 42),
        ("city-in-state", 1892),
        ("family", 272),
        ("gram2-opposite", 2652),
        ("gram3-comparative", 2162),
        ("gram4-superlative", 1980),
        ("gram6-nationality-adjective", 12),
        ("gram7-past-tense", 1891),
        ("gram8-plural", 1560),
    ],
    semantic: 10_380,
    syntactic: 10_257,
    total: 20_637,
};

/// The original Google English analogy set (`questions-words.txt`).
pub const GOOGLE_ENGLISH: ExpectedCounts = ExpectedCounts {
    name: "google",
    sections: &[
        ("capital-common-countries", 506),
        ("capital-world", 4524),
        ("currency", 866),
        ("city-in-state", 2467),
        ("family", 506),
        ("gram1-adjective-to-adverb", 992),
        ("gram2-opposite", 812),
        ("gram3-comparative", 1332),
        ("gram4-superlative", 1122),
        ("gram5-present-participle", 1056),
        ("gram6-nationality-adjective", 1599),
        ("gram7-past-tense", 1560),
        ("gram8-plural", 1332),
        ("gram9-plural-verbs", 870),
    ],
    semantic: 8_869,
    syntactic: 10_675,
    total: 19_544,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SectionCheck {
    pub name: String,
    pub expected: Option<usize>,
    pub found: Option<usize>,
}

impl SectionCheck {
    pub fn ok(&self) -> bool {
        self.expected == self.found
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub reference: &'static str,
    pub sections: Vec<SectionCheck>,
    pub semantic: usize,
    pub syntactic: usize,
    pub total: usize,
    /// Itemized mismatches; empty when the set matches the reference.
    pub discrepancies: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// Compares section counts and category totals of `set` to `expected`.
///
/// Discrepancies are itemized per section. Category totals are sums of the
/// sections, so a total mismatch is only listed separately when every
/// section matched.
pub fn validate_set(set: &AnalogyTestSet, expected: &ExpectedCounts) -> ValidationReport {
    let mut sections = Vec::new();
    for &(name, count) in expected.sections {
        let found = set
            .sections
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.questions.len());
        sections.push(SectionCheck {
            name: name.to_owned(),
            expected: Some(count),
            found,
        });
    }
    for s in &set.sections {
        if !expected.sections.iter().any(|(n, _)| *n == s.name) {
            sections.push(SectionCheck {
                name: s.name.clone(),
                expected: None,
                found: Some(s.questions.len()),
            });
        }
    }
    let mut discrepancies: Vec<String> = sections
        .iter()
        .filter(|c| !c.ok())
        .map(|c| match (c.expected, c.found) {
            (Some(e), Some(f)) => format!("section {}: expected {e}, found {f}", c.name),
            (Some(e), None) => format!("section {}: missing (expected {e})", c.name),
            (None, Some(f)) => format!("section {}: unexpected ({f} questions)", c.name),
            (None, None) => unreachable!(),
        })
        .collect();

    let semantic = set.category_total(Category::Semantic);
    let syntactic = set.category_total(Category::Syntactic);
    let total = set.question_count();
    if discrepancies.is_empty() {
        for (label, want, got) in [
            ("semantic", expected.semantic, semantic),
            ("syntactic", expected.syntactic, syntactic),
            ("total", expected.total, total),
        ] {
            if want != got {
                discrepancies.push(format!("{label} total: expected {want}, found {got}"));
            }
        }
    }
    ValidationReport {
        reference: expected.name,
        sections,
        semantic,
        syntactic,
        total,
        discrepancies,
    }
}

pub fn validate_swedish(set: &AnalogyTestSet) -> ValidationReport {
    validate_set(set, &SWEDISH)
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |x: Option<usize>| x.map_or("-".to_owned(), |v| v.to_string());
        writeln!(f, "{:<32} {:>9} {:>9}  ok", "section", "expected", "found")?;
        for s in &self.sections {
            writeln!(
                f,
                "{:<32} {:>9} {:>9}  {}",
                s.name,
                opt(s.expected),
                opt(s.found),
                if s.ok() { "yes" } else { "NO" }
            )?;
        }
        writeln!(f, "semantic {}  syntactic {}  total {}", self.semantic, self.syntactic, self.total)?;
        if self.passed() {
            writeln!(f, "all checks passed ({})", self.reference)
        } else {
            for d in &self.discrepancies {
                writeln!(f, "discrepancy: {d}")?;
            }
            Ok(())
        }
    }
}
