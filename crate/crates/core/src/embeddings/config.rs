use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{DEFAULT_MIN_COUNT, DEFAULT_NEGATIVE_TABLE_SIZE};
use crate::{Error, Result};

/// Training architecture (`s1` / `s0` in the grid notation).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Skipgram,
    Cbow,
}

/// Output loss (`h1` / `h0` in the grid notation).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    HierarchicalSoftmax,
    NegativeSampling,
}

/// Whether words are also represented by hashed character n-grams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Word2vec,
    Subword,
}

impl FromStr for Arch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sg" | "skipgram" => Ok(Arch::Skipgram),
            "cbow" => Ok(Arch::Cbow),
            _ => Err(Error::Config(format!("unknown model {s:?} (expected sg or cbow)"))),
        }
    }
}

impl FromStr for Loss {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hs" => Ok(Loss::HierarchicalSoftmax),
            "ns" => Ok(Loss::NegativeSampling),
            _ => Err(Error::Config(format!("unknown loss {s:?} (expected hs or ns)"))),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word2vec" => Ok(Mode::Word2vec),
            "subword" => Ok(Mode::Subword),
            _ => Err(Error::Config(format!(
                "unknown mode {s:?} (expected word2vec or subword)"
            ))),
        }
    }
}

/// Hyper-parameters for one embedding model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub dim: usize,
    pub window: usize,
    pub arch: Arch,
    pub loss: Loss,
    pub epochs: usize,
    pub minn: usize,
    pub maxn: usize,
    pub mode: Mode,
    pub negatives: usize,
    pub lr0: f64,
    pub buckets: usize,
    pub min_count: u64,
    /// Subsampling threshold; 1.0 disables subsampling.
    pub sample: f64,
    pub neg_table_size: usize,
    /// Use exact sigmoid instead of the lookup table.
    pub exact_sigmoid: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim: 300,
            window: 4,
            arch: Arch::Skipgram,
            loss: Loss::NegativeSampling,
            epochs: 10,
            minn: 3,
            maxn: 6,
            mode: Mode::Subword,
            negatives: 5,
            lr0: 0.05,
            buckets: 2_000_000,
            min_count: DEFAULT_MIN_COUNT,
            sample: 1e-4,
            neg_table_size: DEFAULT_NEGATIVE_TABLE_SIZE,
            exact_sigmoid: false,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.dim == 0 {
            return fail("dim must be positive".into());
        }
        if self.epochs == 0 {
            return fail("epochs must be positive".into());
        }
        if self.window == 0 {
            return fail("window must be at least 1".into());
        }
        if self.loss == Loss::NegativeSampling && self.negatives == 0 {
            return fail("negative sampling needs at least one negative".into());
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return fail(format!("learning rate must be positive, got {}", self.lr0));
        }
        if self.min_count == 0 {
            return fail("min_count must be at least 1".into());
        }
        if !(self.sample > 0.0 && self.sample <= 1.0) {
            return fail(format!("sample must lie in (0, 1], got {}", self.sample));
        }
        if self.mode == Mode::Subword {
            if self.minn == 0 || self.minn > self.maxn {
                return fail(format!(
                    "n-gram bounds must satisfy 0 < minn <= maxn, got {}..{}",
                    self.minn, self.maxn
                ));
            }
            if self.buckets == 0 {
                return fail("subword mode needs at least one bucket".into());
            }
        }
        Ok(())
    }

    /// Grid label in the `w4s1h0` notation.
    pub fn label(&self) -> String {
        format!(
            "w{}s{}h{}",
            self.window,
            u8::from(self.arch == Arch::Skipgram),
            u8::from(self.loss == Loss::HierarchicalSoftmax)
        )
    }
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            Mode::Word2vec => "word2vec",
            Mode::Subword => "subword",
        };
        write!(f, "{} {} dim={} epochs={}", mode, self.label(), self.dim, self.epochs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_labelled() {
        let c = ModelConfig::default();
        c.validate().unwrap();
        assert_eq!(c.dim, 300);
        assert_eq!(c.epochs, 10);
        assert_eq!((c.minn, c.maxn), (3, 6));
        assert_eq!(c.label(), "w4s1h0");
        let c = ModelConfig {
            window: 8,
            arch: Arch::Cbow,
            loss: Loss::HierarchicalSoftmax,
            ..c
        };
        assert_eq!(c.label(), "w8s0h1");
    }

    #[test]
    fn rejects_inconsistent_settings() {
        let base = ModelConfig::default();
        for bad in [
            ModelConfig { epochs: 0, ..base.clone() },
            ModelConfig { dim: 0, ..base.clone() },
            ModelConfig { minn: 4, maxn: 3, ..base.clone() },
            ModelConfig { minn: 0, ..base.clone() },
            ModelConfig { negatives: 0, ..base.clone() },
            ModelConfig { window: 0, ..base.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))), "{bad:?}");
        }
        let hs = ModelConfig {
            negatives: 0,
            loss: Loss::HierarchicalSoftmax,
            ..base
        };
        hs.validate().unwrap();
    }

    #[test]
    fn parses_cli_names() {
        assert_eq!("sg".parse::<Arch>().unwrap(), Arch::Skipgram);
        assert_eq!("hs".parse::<Loss>().unwrap(), Loss::HierarchicalSoftmax);
        assert_eq!("word2vec".parse::<Mode>().unwrap(), Mode::Word2vec);
        assert!("bow".parse::<Arch>().is_err());
    }
}
