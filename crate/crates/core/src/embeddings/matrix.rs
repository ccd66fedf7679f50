use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Matrix { rows, cols, data }
    }

    /// Entries drawn uniformly from `[-bound, bound]`, row by row.
    pub fn uniform<R: Rng + ?Sized>(rows: usize, cols: usize, bound: f64, rng: &mut R) -> Self {
        let data = (0..rows * cols)
            .map(|_| rng.random_range(-bound..=bound))
            .collect();
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Matrix shared between training workers without locks.
///
/// Each component is an independent relaxed atomic: concurrent writers may
/// overwrite each other's updates (Hogwild), but no read ever observes a
/// partially written value.
#[derive(Debug)]
pub struct SharedMatrix {
    rows: usize,
    cols: usize,
    data: Vec<AtomicU64>,
}

impl SharedMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        f64::from_bits(self.data[r * self.cols + c].load(Ordering::Relaxed))
    }

    #[inline]
    pub fn set(&self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c].store(v.to_bits(), Ordering::Relaxed);
    }

    #[inline]
    fn cells(&self, r: usize) -> &[AtomicU64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn dot_row(&self, r: usize, v: &[f64]) -> f64 {
        self.cells(r)
            .iter()
            .zip(v)
            .map(|(a, b)| f64::from_bits(a.load(Ordering::Relaxed)) * b)
            .sum()
    }

    /// `row[r] += scale * v`
    #[inline]
    pub fn add_to_row(&self, r: usize, v: &[f64], scale: f64) {
        for (a, b) in self.cells(r).iter().zip(v) {
            let x = f64::from_bits(a.load(Ordering::Relaxed)) + scale * b;
            a.store(x.to_bits(), Ordering::Relaxed);
        }
    }

    /// `out += scale * row[r]`
    #[inline]
    pub fn add_row_to(&self, r: usize, out: &mut [f64], scale: f64) {
        for (o, a) in out.iter_mut().zip(self.cells(r)) {
            *o += scale * f64::from_bits(a.load(Ordering::Relaxed));
        }
    }

    pub fn row_vec(&self, r: usize) -> Vec<f64> {
        self.cells(r)
            .iter()
            .map(|a| f64::from_bits(a.load(Ordering::Relaxed)))
            .collect()
    }

    pub fn snapshot(&self) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|a| f64::from_bits(a.load(Ordering::Relaxed)))
                .collect(),
        }
    }

    pub fn into_matrix(self) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .into_iter()
                .map(|a| f64::from_bits(a.into_inner()))
                .collect(),
        }
    }
}

impl From<Matrix> for SharedMatrix {
    fn from(m: Matrix) -> Self {
        SharedMatrix {
            rows: m.rows,
            cols: m.cols,
            data: m.data.into_iter().map(|x| AtomicU64::new(x.to_bits())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_round_trip_and_row_ops() {
        let m = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let s = SharedMatrix::from(m.clone());
        assert_eq!(s.dot_row(1, &[1.0, 0.0, 1.0]), 10.0);
        s.add_to_row(0, &[1.0, 1.0, 1.0], 0.5);
        assert_eq!(s.row_vec(0), [1.5, 2.5, 3.5]);
        let mut out = vec![0.0; 3];
        s.add_row_to(1, &mut out, 2.0);
        assert_eq!(out, [8.0, 10.0, 12.0]);
        let back = s.into_matrix();
        assert_eq!(back.row(1), m.row(1));
    }
}
