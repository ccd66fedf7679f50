//! Output-layer update rules: negative sampling and hierarchical softmax.
//!
//! Both return the gradient of the loss with respect to the hidden vector,
//! computed against the output rows as they were before this update; the
//! caller applies `-lr * grad` to the input rows.

use rand::Rng;

use super::sigmoid::Sigmoid;
use crate::corpus::{HuffmanCoding, NegativeTable};
use crate::embeddings::SharedMatrix;

/// Redraws allowed when a negative sample collides with the target.
pub const MAX_REDRAWS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct Update {
    pub grad: Vec<f64>,
    pub loss: f64,
}

/// One binary logistic term: label 1 pushes `row·h` up, label 0 down.
#[inline]
fn binary_step(
    hidden: &[f64],
    row: usize,
    label: bool,
    lr: f64,
    output: &SharedMatrix,
    sigmoid: &Sigmoid,
    grad: &mut [f64],
) -> f64 {
    let score = output.dot_row(row, hidden);
    let (loss, g) = if label {
        (sigmoid.neg_log(score), 1.0 - sigmoid.eval(score))
    } else {
        (sigmoid.neg_log(-score), -sigmoid.eval(score))
    };
    output.add_row_to(row, grad, -g);
    if lr != 0.0 {
        output.add_to_row(row, hidden, lr * g);
    }
    loss
}

/// Negative-sampling loss for `target`, drawing `negatives` words from the
/// table. A draw equal to the target is redrawn up to `MAX_REDRAWS` times,
/// then that negative is skipped.
#[allow(clippy::too_many_arguments)]
pub fn ns_update<R: Rng + ?Sized>(
    hidden: &[f64],
    target: usize,
    table: &NegativeTable,
    negatives: usize,
    lr: f64,
    output: &SharedMatrix,
    sigmoid: &Sigmoid,
    rng: &mut R,
) -> Update {
    let mut drawn = Vec::with_capacity(negatives);
    for _ in 0..negatives {
        let mut neg = table.sample(rng);
        let mut tries = 0;
        while neg == target && tries < MAX_REDRAWS {
            neg = table.sample(rng);
            tries += 1;
        }
        if neg != target {
            drawn.push(neg);
        }
    }
    ns_update_with(hidden, target, &drawn, lr, output, sigmoid)
}

/// Negative-sampling update against a fixed list of negatives.
pub fn ns_update_with(
    hidden: &[f64],
    target: usize,
    negatives: &[usize],
    lr: f64,
    output: &SharedMatrix,
    sigmoid: &Sigmoid,
) -> Update {
    let mut grad = vec![0.0; hidden.len()];
    let mut loss = binary_step(hidden, target, true, lr, output, sigmoid, &mut grad);
    for &neg in negatives {
        loss += binary_step(hidden, neg, false, lr, output, sigmoid, &mut grad);
    }
    Update { grad, loss }
}

/// Hierarchical-softmax loss along the target's Huffman path. Code bit 0
/// means the positive branch (label 1).
pub fn hs_update(
    hidden: &[f64],
    target: usize,
    coding: &HuffmanCoding,
    lr: f64,
    output: &SharedMatrix,
    sigmoid: &Sigmoid,
) -> Update {
    let mut grad = vec![0.0; hidden.len()];
    let mut loss = 0.0;
    for (&node, &bit) in coding.path(target).iter().zip(coding.code(target)) {
        loss += binary_step(hidden, node as usize, bit == 0, lr, output, sigmoid, &mut grad);
    }
    Update { grad, loss }
}

/// `P(word | hidden)` implied by the tree: the product of branch
/// probabilities along the word's path (exact sigmoid).
pub fn hs_probability(
    hidden: &[f64],
    word: usize,
    coding: &HuffmanCoding,
    output: &SharedMatrix,
) -> f64 {
    coding
        .path(word)
        .iter()
        .zip(coding.code(word))
        .map(|(&node, &bit)| {
            let s = output.dot_row(node as usize, hidden);
            let z = if bit == 0 { s } else { -s };
            1.0 / (1.0 + (-z).exp())
        })
        .product()
}
