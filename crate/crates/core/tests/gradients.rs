use embkit_core::corpus::HuffmanCoding;
use embkit_core::embeddings::{Matrix, SharedMatrix};
use embkit_core::trainer::{hs_probability, hs_update, ns_update_with, Sigmoid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-6;
const TOL: f64 = 1e-4;

fn log_sigmoid(x: f64) -> f64 {
    // stable ln σ(x)
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Terms of a sum of binary logistic losses: (row, label).
fn loss(rows: &Matrix, terms: &[(usize, bool)], h: &[f64]) -> f64 {
    terms
        .iter()
        .map(|&(r, label)| {
            let s = dot(rows.row(r), h);
            -log_sigmoid(if label { s } else { -s })
        })
        .sum()
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / (a.abs() + n.abs()).max(1e-8)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Checks the returned hidden gradient and the applied output-row step
/// against central differences of `loss`. Returns the worst relative error.
fn check(
    rows: &Matrix,
    terms: &[(usize, bool)],
    h: &[f64],
    run: impl Fn(&SharedMatrix, f64) -> Vec<f64>,
) -> f64 {
    let mut worst: f64 = 0.0;
    let grad = run(&SharedMatrix::from(rows.clone()), 0.0);
    for i in 0..h.len() {
        let mut hp = h.to_vec();
        let mut hm = h.to_vec();
        hp[i] += EPS;
        hm[i] -= EPS;
        let num = (loss(rows, terms, &hp) - loss(rows, terms, &hm)) / (2.0 * EPS);
        worst = worst.max(rel_err(grad[i], num));
    }

    let lr = 1e-3;
    let shared = SharedMatrix::from(rows.clone());
    run(&shared, lr);
    let after = shared.snapshot();
    for &(r, _) in terms {
        for c in 0..rows.cols() {
            let mut plus = rows.clone();
            let mut minus = rows.clone();
            plus.row_mut(r)[c] += EPS;
            minus.row_mut(r)[c] -= EPS;
            let num = (loss(&plus, terms, h) - loss(&minus, terms, h)) / (2.0 * EPS);
            let applied = (after.row(r)[c] - rows.row(r)[c]) / lr;
            worst = worst.max(rel_err(-applied, num));
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ns_gradient_matches_finite_differences(seed in any::<u64>(), dim in 5usize..=20, k in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = 12;
        let rows = Matrix::from_vec(v, dim, random_vec(&mut rng, v * dim, 0.5));
        let h = random_vec(&mut rng, dim, 1.0);
        let mut ids: Vec<usize> = (0..v).collect();
        for i in 0..=k {
            let j = rng.random_range(i..v);
            ids.swap(i, j);
        }
        let target = ids[0];
        let negs = ids[1..=k].to_vec();
        let mut terms = vec![(target, true)];
        terms.extend(negs.iter().map(|&n| (n, false)));
        let sig = Sigmoid::exact();
        let worst = check(&rows, &terms, &h, |m, lr| {
            ns_update_with(&h, target, &negs, lr, m, &sig).grad
        });
        prop_assert!(worst < TOL, "relative error {worst}");
    }

    #[test]
    fn hs_gradient_matches_finite_differences(seed in any::<u64>(), dim in 5usize..=20, v in 2usize..=40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts: Vec<u64> = (0..v).map(|_| rng.random_range(1..1000)).collect();
        let coding = HuffmanCoding::from_counts(&counts).unwrap();
        let nodes = v - 1;
        let rows = Matrix::from_vec(nodes, dim, random_vec(&mut rng, nodes * dim, 0.5));
        let h = random_vec(&mut rng, dim, 1.0);
        let target = rng.random_range(0..v);
        let terms: Vec<(usize, bool)> = coding
            .path(target)
            .iter()
            .zip(coding.code(target))
            .map(|(&n, &b)| (n as usize, b == 0))
            .collect();
        let sig = Sigmoid::exact();
        let worst = check(&rows, &terms, &h, |m, lr| {
            hs_update(&h, target, &coding, lr, m, &sig).grad
        });
        prop_assert!(worst < TOL, "relative error {worst}");
    }

    #[test]
    fn update_losses_are_nonnegative(seed in any::<u64>(), dim in 1usize..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = Matrix::from_vec(6, dim, random_vec(&mut rng, 6 * dim, 20.0));
        let h = random_vec(&mut rng, dim, 20.0);
        let coding = HuffmanCoding::from_counts(&[5, 4, 3, 2, 1, 1, 1]).unwrap();
        for sig in [Sigmoid::exact(), Sigmoid::table()] {
            let m = SharedMatrix::from(rows.clone());
            prop_assert!(ns_update_with(&h, 0, &[1, 2, 3], 0.1, &m, &sig).loss >= 0.0);
            prop_assert!(hs_update(&h, 6, &coding, 0.1, &m, &sig).loss >= 0.0);
        }
    }

    #[test]
    fn hs_leaf_probabilities_sum_to_one(seed in any::<u64>(), v in 8usize..=64, dim in 2usize..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts: Vec<u64> = (0..v).map(|_| rng.random_range(1..10_000)).collect();
        let coding = HuffmanCoding::from_counts(&counts).unwrap();
        let rows = SharedMatrix::from(Matrix::from_vec(v - 1, dim, random_vec(&mut rng, (v - 1) * dim, 1.0)));
        let h = random_vec(&mut rng, dim, 2.0);
        let total: f64 = (0..v).map(|w| hs_probability(&h, w, &coding, &rows)).sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "sum {total}");
    }
}

#[test]
fn symmetric_zero_cases() {
    let sig = Sigmoid::exact();
    let m = SharedMatrix::from(Matrix::zeros(8, 5));
    let h = vec![0.0; 5];
    let u = ns_update_with(&h, 0, &[3], 0.05, &m, &sig);
    assert!((u.loss - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
    assert!(u.grad.iter().all(|&g| g == 0.0));

    let coding = HuffmanCoding::from_counts(&[9, 7, 5, 3, 2, 1]).unwrap();
    for w in 0..6 {
        let u = hs_update(&h, w, &coding, 0.05, &m, &sig);
        let l = coding.code(w).len() as f64;
        assert!((u.loss - l * std::f64::consts::LN_2).abs() < 1e-12);
    }
}

#[test]
fn one_step_lowers_the_loss() {
    let sig = Sigmoid::exact();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let rows = Matrix::from_vec(10, 8, random_vec(&mut rng, 80, 0.5));
        let h = random_vec(&mut rng, 8, 1.0);
        let negs = [4, 7, 9];
        let m = SharedMatrix::from(rows);
        let before = ns_update_with(&h, 1, &negs, 0.05, &m, &sig).loss;
        let after = ns_update_with(&h, 1, &negs, 0.0, &m, &sig).loss;
        assert!(after < before, "{after} >= {before}");
    }
}
