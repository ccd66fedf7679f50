//! Percentile bootstrap confidence intervals for a difference in means.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Resamples per RNG substream. Each chunk owns one ChaCha stream, so the
/// result does not depend on how rayon schedules chunks.
const CHUNK: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BootstrapResult {
    pub lo: f64,
    pub hi: f64,
    pub alpha: f64,
    pub resamples: usize,
    pub point_estimate: f64,
    pub contains_zero: bool,
}

impl BootstrapResult {
    /// Wraps an already computed interval.
    pub fn from_interval(lo: f64, hi: f64, alpha: f64, resamples: usize, point_estimate: f64) -> Self {
        BootstrapResult {
            lo,
            hi,
            alpha,
            resamples,
            point_estimate,
            contains_zero: lo <= 0.0 && 0.0 <= hi,
        }
    }

    pub fn interpretation(&self) -> &'static str {
        if self.contains_zero {
            "interval includes 0: difference may be due to chance"
        } else {
            "interval excludes 0: difference unlikely due to chance"
        }
    }
}

impl fmt::Display for BootstrapResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mean difference {:.4}, {:.0}% CI [{:.4}, {:.4}] ({} resamples); {}",
            self.point_estimate,
            100.0 * (1.0 - self.alpha),
            self.lo,
            self.hi,
            self.resamples,
            self.interpretation()
        )
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn resample_mean(xs: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    let n = xs.len();
    (0..n).map(|_| xs[rng.random_range(0..n)]).sum::<f64>() / n as f64
}

/// Unpaired percentile bootstrap of `mean(a) - mean(b)`.
pub fn bootstrap_ci_diff(
    a: &[f64],
    b: &[f64],
    resamples: usize,
    alpha: f64,
    seed: u64,
) -> Result<BootstrapResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "bootstrap needs at least 2 values per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if resamples == 0 {
        return Err(Error::Config("resamples must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must be in (0, 1), got {alpha}")));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::Domain("bootstrap inputs must be finite".into()));
    }

    let chunks = resamples.div_ceil(CHUNK);
    let mut diffs: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let len = CHUNK.min(resamples - chunk * CHUNK);
            (0..len)
                .map(|_| {
                    let ma = resample_mean(a, &mut rng);
                    ma - resample_mean(b, &mut rng)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    diffs.sort_by(f64::total_cmp);

    let lo = percentile_sorted(&diffs, alpha / 2.0);
    let hi = percentile_sorted(&diffs, 1.0 - alpha / 2.0);
    Ok(BootstrapResult::from_interval(lo, hi, alpha, resamples, mean(a) - mean(b)))
}

fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = h.floor() as usize;
    let frac = h - i as f64;
    if i + 1 < sorted.len() && frac > 0.0 {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Linear-interpolation percentile at index `q * (n - 1)` of the sorted
/// samples. `q` is clamped to [0, 1].
///
/// # Panics
/// If `samples` is empty.
pub fn percentile(samples: &[f64], q: f64) -> f64 {
    assert!(!samples.is_empty(), "percentile of empty sample");
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    percentile_sorted(&sorted, q)
}

/// Reads one value per line; blank lines and `#` comments are skipped.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("not a number: {line:?}")))?;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_examples() {
        assert_eq!(percentile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(percentile(&[4.0, 1.0, 3.0], 0.0), 1.0);
        assert_eq!(percentile(&[4.0, 1.0, 3.0], 1.0), 4.0);
        assert_eq!(percentile(&[7.0; 5], 0.3), 7.0);
        assert_eq!(percentile(&[2.0], 0.9), 2.0);
    }

    #[test]
    fn zero_variance() {
        let a = [0.7; 5];
        let r = bootstrap_ci_diff(&a, &a, 2000, 0.05, 1).unwrap();
        assert_eq!((r.lo, r.hi), (0.0, 0.0));
        assert!(r.contains_zero);
    }

    #[test]
    fn undersized_and_bad_args() {
        assert!(bootstrap_ci_diff(&[1.0], &[1.0, 2.0], 100, 0.05, 0).is_err());
        assert!(bootstrap_ci_diff(&[1.0, 2.0], &[1.0, 2.0], 0, 0.05, 0).is_err());
        assert!(bootstrap_ci_diff(&[1.0, 2.0], &[1.0, 2.0], 10, 1.5, 0).is_err());
    }

    #[test]
    fn deterministic_and_partial_chunk() {
        let a = [0.1, 0.4, 0.35, 0.8];
        let b = [0.2, 0.1, 0.3];
        let r1 = bootstrap_ci_diff(&a, &b, 3000, 0.05, 9).unwrap();
        let r2 = bootstrap_ci_diff(&a, &b, 3000, 0.05, 9).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.lo <= r1.hi);
        let r3 = bootstrap_ci_diff(&a, &b, 3000, 0.05, 10).unwrap();
        assert_ne!(r1, r3);
    }

    #[test]
    fn read_values_skips_comments() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.txt");
        fs::write(&p, "# f1\n0.5\n\n0.25\n").unwrap();
        assert_eq!(read_values(&p).unwrap(), vec![0.5, 0.25]);
        fs::write(&p, "0.5\nx\n").unwrap();
        assert!(matches!(read_values(&p), Err(Error::Parse { line: 2, .. })));
    }
}
