use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::vocab::Vocabulary;
use crate::{Error, Result};

/// Binary Huffman code over the vocabulary, as used by hierarchical softmax.
///
/// Internal nodes are numbered `0..V-1` (the root is `V-2`); these ids index
/// the rows of the output matrix.
#[derive(Clone, Debug)]
pub struct HuffmanCoding {
    codes: Vec<Vec<u8>>,
    paths: Vec<Vec<u32>>,
    node_count: usize,
}

impl HuffmanCoding {
    /// Builds the code from raw counts (index = word id).
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let n = counts.len();
        if n < 2 {
            return Err(Error::InsufficientVocabulary(n));
        }
        // parent[node], branch bit for node; leaves 0..n, internal n..2n-1.
        let total = 2 * n - 1;
        let mut parent = vec![usize::MAX; total];
        let mut bit = vec![0u8; total];
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
            counts.iter().enumerate().map(|(i, &c)| Reverse((c, i))).collect();
        let mut next = n;
        while heap.len() > 1 {
            let Reverse((c1, lo)) = heap.pop().unwrap();
            let Reverse((c2, hi)) = heap.pop().unwrap();
            parent[lo] = next;
            parent[hi] = next;
            bit[lo] = 0;
            bit[hi] = 1;
            heap.push(Reverse((c1 + c2, next)));
            next += 1;
        }
        let root = total - 1;

        let mut codes = Vec::with_capacity(n);
        let mut paths = Vec::with_capacity(n);
        for leaf in 0..n {
            let mut code = Vec::new();
            let mut path = Vec::new();
            let mut node = leaf;
            while node != root {
                code.push(bit[node]);
                node = parent[node];
                path.push((node - n) as u32);
            }
            code.reverse();
            path.reverse();
            codes.push(code);
            paths.push(path);
        }
        Ok(HuffmanCoding {
            codes,
            paths,
            node_count: n - 1,
        })
    }

    /// Branch bits from the root down to `word`.
    pub fn code(&self, word: usize) -> &[u8] {
        &self.codes[word]
    }

    /// Internal-node ids visited from the root down to `word`.
    pub fn path(&self, word: usize) -> &[u32] {
        &self.paths[word]
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

pub fn build_huffman(vocab: &Vocabulary) -> Result<HuffmanCoding> {
    HuffmanCoding::from_counts(&vocab.counts())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{BigInt, BigRational, One, Zero};
    use proptest::prelude::*;

    fn lengths(counts: &[u64]) -> Vec<usize> {
        let h = HuffmanCoding::from_counts(counts).unwrap();
        (0..counts.len()).map(|w| h.code(w).len()).collect()
    }

    /// Cost of an optimal prefix code: the sum of all merge weights, computed
    /// with a plain sorted vector rather than a heap.
    fn optimal_cost(counts: &[u64]) -> u64 {
        let mut w: Vec<u64> = counts.to_vec();
        let mut cost = 0;
        while w.len() > 1 {
            w.sort_unstable_by(|a, b| b.cmp(a));
            let a = w.pop().unwrap();
            let b = w.pop().unwrap();
            cost += a + b;
            w.push(a + b);
        }
        cost
    }

    fn kraft_sum(h: &HuffmanCoding) -> BigRational {
        let mut sum = BigRational::zero();
        for w in 0..h.len() {
            let denom = BigInt::one() << h.code(w).len();
            sum += BigRational::new(BigInt::one(), denom);
        }
        sum
    }

    #[test]
    fn hand_run_merges() {
        assert_eq!(lengths(&[4, 2, 1, 1]), [1, 2, 3, 3]);
        assert_eq!(lengths(&[1, 1]), [1, 1]);
    }

    #[test]
    fn fewer_than_two_words_rejected() {
        assert!(matches!(
            HuffmanCoding::from_counts(&[5]),
            Err(Error::InsufficientVocabulary(1))
        ));
    }

    #[test]
    fn paths_end_at_distinct_leaves_and_start_at_root() {
        let h = HuffmanCoding::from_counts(&[9, 5, 3, 3, 2, 1]).unwrap();
        assert_eq!(h.node_count(), 5);
        for w in 0..6 {
            assert_eq!(h.path(w).len(), h.code(w).len());
            assert_eq!(h.path(w)[0], 4);
        }
    }

    proptest! {
        #[test]
        fn prefix_free_kraft_tight_and_optimal(counts in prop::collection::vec(1u64..10_000, 2..200)) {
            let h = HuffmanCoding::from_counts(&counts).unwrap();
            for a in 0..h.len() {
                prop_assert_eq!(h.path(a).len(), h.code(a).len());
                for b in 0..h.len() {
                    if a != b {
                        prop_assert!(!h.code(b).starts_with(h.code(a)));
                    }
                }
            }
            prop_assert_eq!(kraft_sum(&h), BigRational::one());
            let cost: u64 = (0..h.len()).map(|w| counts[w] * h.code(w).len() as u64).sum();
            prop_assert_eq!(cost, optimal_cost(&counts));
        }
    }
}
