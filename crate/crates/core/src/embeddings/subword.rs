use serde::{Deserialize, Serialize};

const BOW: char = '<';
const EOW: char = '>';

/// All character n-grams of `<word>` with length in `minn..=maxn`, ordered by
/// length and then position. The full wrapped form itself is excluded; it is
/// represented by the word's own row.
pub fn extract_ngrams(word: &str, minn: usize, maxn: usize) -> Vec<String> {
    let wrapped: Vec<char> = std::iter::once(BOW)
        .chain(word.chars())
        .chain(std::iter::once(EOW))
        .collect();
    let len = wrapped.len();
    let mut out = Vec::new();
    for n in minn.max(1)..=maxn.min(len) {
        if n == len {
            continue;
        }
        for start in 0..=len - n {
            out.push(wrapped[start..start + n].iter().collect());
        }
    }
    out
}

/// Number of n-grams `extract_ngrams` yields for a word of `chars` characters.
pub fn ngram_count(chars: usize, minn: usize, maxn: usize) -> usize {
    let len = chars + 2;
    (minn.max(1)..=maxn)
        .filter(|&n| n != len)
        .map(|n| (len + 1).saturating_sub(n))
        .sum()
}

/// 32-bit FNV-1a over the UTF-8 bytes. Bytes are sign-extended before the
/// xor, matching the reference trainer's bucket assignment for non-ASCII
/// text (ASCII input gives the textbook FNV-1a value).
pub fn ngram_hash(ngram: &str) -> u32 {
    let mut h: u32 = 2_166_136_261;
    for &b in ngram.as_bytes() {
        h ^= b as i8 as i32 as u32;
        h = h.wrapping_mul(16_777_619);
    }
    h
}

/// Maps words to hashed n-gram buckets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubwordIndex {
    pub minn: usize,
    pub maxn: usize,
    pub buckets: usize,
}

impl SubwordIndex {
    pub fn bucket(&self, ngram: &str) -> usize {
        ngram_hash(ngram) as usize % self.buckets
    }

    /// Bucket ids (in `0..buckets`) of every n-gram of `word`.
    pub fn buckets_of(&self, word: &str) -> Vec<usize> {
        extract_ngrams(word, self.minn, self.maxn)
            .iter()
            .map(|g| self.bucket(g))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn where_has_fourteen_ngrams() {
        let got = extract_ngrams("where", 3, 6);
        let want = [
            "<wh", "whe", "her", "ere", "re>", "<whe", "wher", "here", "ere>", "<wher", "where",
            "here>", "<where", "where>",
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn full_wrapped_form_excluded() {
        assert!(extract_ngrams("a", 3, 6).is_empty());
        assert_eq!(extract_ngrams("ab", 3, 6), ["<ab", "ab>"]);
        assert_eq!(ngram_count(1, 3, 6), 0);
    }

    #[test]
    fn multibyte_characters_count_once() {
        let g = extract_ngrams("år", 3, 3);
        assert_eq!(g, ["<år", "år>"]);
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(ngram_hash(""), 2_166_136_261);
        assert_eq!(ngram_hash("a"), 3_826_002_220);
        // (2166136261 ^ 0x61) * 16777619 mod 2^32
        let step = (2_166_136_261u32 ^ 0x61).wrapping_mul(16_777_619);
        assert_eq!(step, 3_826_002_220);
    }

    #[test]
    fn bucket_bound_and_purity() {
        let idx = SubwordIndex {
            minn: 3,
            maxn: 6,
            buckets: 2_000_000,
        };
        let first = idx.bucket("<kun");
        for _ in 0..1_000_000 {
            assert_eq!(idx.bucket("<kun"), first);
        }
        for g in extract_ngrams("drottningarna", 3, 6) {
            assert!(idx.bucket(&g) < 2_000_000);
        }
    }

    proptest! {
        #[test]
        fn count_matches_closed_form(word in "\\PC{1,20}", minn in 1usize..5, span in 0usize..4) {
            let maxn = minn + span;
            let chars = word.chars().count();
            prop_assert_eq!(extract_ngrams(&word, minn, maxn).len(), ngram_count(chars, minn, maxn));
        }
    }
}
