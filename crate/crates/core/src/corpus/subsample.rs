use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Frequent-word subsampling threshold `t`, as a fraction of all tokens.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsampleParams {
    threshold: f64,
}

impl SubsampleParams {
    /// `t = 1` disables subsampling entirely.
    pub fn new(threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::Config(format!(
                "subsampling threshold must lie in (0, 1], got {threshold}"
            )));
        }
        Ok(SubsampleParams { threshold })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

impl Default for SubsampleParams {
    fn default() -> Self {
        SubsampleParams { threshold: 1e-4 }
    }
}

/// Probability of keeping one occurrence of a word whose corpus frequency
/// fraction is `freq`: `min(1, (sqrt(f/t) + 1) * t/f)`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
pub fn keep_probability(freq: f64, params: SubsampleParams) -> Result<f64> {
    if !(freq > 0.0) {
        return Err(Error::Domain(format!(
            "frequency fraction must be positive, got {freq}"
        )));
    }
    let r = params.threshold / freq;
    Ok((((1.0 / r).sqrt() + 1.0) * r).min(1.0))
}
