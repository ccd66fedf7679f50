use rand::Rng;

use crate::embeddings::SharedMatrix;

/// Calls `f(center, context)` for every position of `sentence` that has at
/// least one context word. For each position an effective window `b` is
/// drawn uniformly from `1..=window`; the context is every other position
/// within distance `b`, clipped at the sentence bounds.
pub fn for_each_context<R, F>(sentence: &[u32], window: usize, rng: &mut R, mut f: F)
where
    R: Rng + ?Sized,
    F: FnMut(u32, &[u32]),
{
    let mut context = Vec::with_capacity(2 * window);
    for (i, &center) in sentence.iter().enumerate() {
        let b = rng.random_range(1..=window);
        context.clear();
        let lo = i.saturating_sub(b);
        let hi = (i + b).min(sentence.len() - 1);
        context.extend(
            (lo..=hi)
                .filter(|&j| j != i)
                .map(|j| sentence[j]),
        );
        if !context.is_empty() {
            f(center, &context);
        }
    }
}

/// Collected form of [`for_each_context`]: `(center word, context words)`.
pub fn make_contexts<R: Rng + ?Sized>(
    sentence: &[u32],
    window: usize,
    rng: &mut R,
) -> Vec<(u32, Vec<u32>)> {
    let mut out = Vec::new();
    for_each_context(sentence, window, rng, |c, ctx| out.push((c, ctx.to_vec())));
    out
}

/// Hidden vector from input rows: the mean over `words` of each word's mean
/// row. Skipgram passes a single word; CBoW passes the context. Returns
/// `false` (leaving `out` zeroed) when there is nothing to average.
pub fn compose_hidden(input: &SharedMatrix, words: &[&[u32]], out: &mut [f64]) -> bool {
    out.iter_mut().for_each(|x| *x = 0.0);
    let words: Vec<&[u32]> = words.iter().copied().filter(|w| !w.is_empty()).collect();
    if words.is_empty() {
        return false;
    }
    let per_word = 1.0 / words.len() as f64;
    for rows in words {
        let scale = per_word / rows.len() as f64;
        for &r in rows {
            input.add_row_to(r as usize, out, scale);
        }
    }
    true
}
