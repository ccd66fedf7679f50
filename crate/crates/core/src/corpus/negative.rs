use rand::Rng;

use super::vocab::Vocabulary;
use crate::{Error, Result};

pub const DEFAULT_NEGATIVE_TABLE_SIZE: usize = 10_000_000;

/// Unigram table for negative sampling: word `w` occupies a share of slots
/// proportional to `count_w^power`.
#[derive(Clone, Debug)]
pub struct NegativeTable {
    slots: Vec<u32>,
    power: f64,
}

impl NegativeTable {
    /// Slot counts are assigned by largest remainder, so every word's share
    /// is within `1/size` of its smoothed probability.
    pub fn from_counts(counts: &[u64], power: f64, size: usize) -> Result<Self> {
        if size < counts.len() {
            return Err(Error::TableTooSmall {
                size,
                vocab: counts.len(),
            });
        }
        if counts.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(power)).collect();
        let z: f64 = weights.iter().sum();
        let ideal: Vec<f64> = weights.iter().map(|w| w / z * size as f64).collect();
        let mut slots_per: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
        let assigned: usize = slots_per.iter().sum();
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = ideal[a] - ideal[a].floor();
            let fb = ideal[b] - ideal[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &w in order.iter().take(size.saturating_sub(assigned)) {
            slots_per[w] += 1;
        }
        let mut slots = Vec::with_capacity(size);
        for (w, &k) in slots_per.iter().enumerate() {
            slots.extend(std::iter::repeat_n(w as u32, k));
        }
        debug_assert_eq!(slots.len(), size);
        Ok(NegativeTable { slots, power })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn slots(&self) -> &[u32] {
        &self.slots
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.slots[rng.random_range(0..self.slots.len())] as usize
    }
}

pub fn build_negative_table(vocab: &Vocabulary, power: f64, size: usize) -> Result<NegativeTable> {
    NegativeTable::from_counts(&vocab.counts(), power, size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn shares(t: &NegativeTable, v: usize) -> Vec<f64> {
        let mut k = vec![0usize; v];
        for &s in t.slots() {
            k[s as usize] += 1;
        }
        k.iter().map(|&c| c as f64 / t.len() as f64).collect()
    }

    #[test]
    fn smoothed_share() {
        // 16^0.75 = 8, 1^0.75 = 1
        let t = NegativeTable::from_counts(&[16, 1], 0.75, 9000).unwrap();
        let s = shares(&t, 2);
        assert_eq!(t.len(), 9000);
        assert!((s[0] - 8.0 / 9.0).abs() <= 1.0 / 9000.0);
        assert_eq!(t.slots().iter().filter(|&&w| w == 0).count(), 8000);
    }

    #[test]
    fn symmetric_and_uniform_cases() {
        let t = NegativeTable::from_counts(&[1, 1], 0.75, 100).unwrap();
        assert_eq!(shares(&t, 2), [0.5, 0.5]);
        let t = NegativeTable::from_counts(&[1000, 10, 1, 7], 0.0, 400).unwrap();
        assert_eq!(shares(&t, 4), [0.25; 4]);
    }

    #[test]
    fn too_small_table_rejected() {
        assert!(matches!(
            NegativeTable::from_counts(&[1, 2, 3], 0.75, 2),
            Err(Error::TableTooSmall { size: 2, vocab: 3 })
        ));
    }

    proptest! {
        #[test]
        fn shares_within_one_slot(counts in prop::collection::vec(1u64..5000, 1..60),
                                  extra in 0usize..3000, power in 0.0f64..1.0) {
            let size = counts.len() + extra;
            let t = NegativeTable::from_counts(&counts, power, size).unwrap();
            prop_assert_eq!(t.len(), size);
            let z: f64 = counts.iter().map(|&c| (c as f64).powf(power)).sum();
            for (w, s) in shares(&t, counts.len()).into_iter().enumerate() {
                let p = (counts[w] as f64).powf(power) / z;
                prop_assert!((s - p).abs() <= 1.0 / size as f64 + 1e-12);
            }
        }
    }
}
