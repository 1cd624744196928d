//! Dense symmetric positive-definite solves on row-major buffers.

use crate::error::{BfcError, Result};

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[2]) + (acc[1] + acc[3]);
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        s += x * y;
    }
    s
}

/// Lower Cholesky factor of an `n x n` SPD matrix, stored row-major in the
/// lower triangle (the strict upper triangle is left untouched).
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors `a` in place. Only the lower triangle of `a` is read.
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        for i in 0..n {
            let (done, rest) = a.split_at_mut(i * n);
            let row_i = &mut rest[..n];
            for j in 0..i {
                let row_j = &done[j * n..j * n + j + 1];
                let s = row_i[j] - dot(&row_i[..j], &row_j[..j]);
                row_i[j] = s / row_j[j];
            }
            let s = row_i[i] - dot(&row_i[..i], &row_i[..i]);
            if s.is_nan() || s <= 0.0 || s.is_infinite() {
                return Err(BfcError::NotPositiveDefinite { pivot: i, value: s });
            }
            row_i[i] = s.sqrt();
        }
        Ok(Self { n, l: a })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `L L^T x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut z = b.to_vec();
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            z[i] = (z[i] - dot(row, &z[..i])) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            z[i] /= self.l[i * n + i];
            let xi = z[i];
            let row = &self.l[i * n..i * n + i];
            for (zk, lk) in z[..i].iter_mut().zip(row) {
                *zk -= lk * xi;
            }
        }
        z
    }
}

/// `y = A x` for a full row-major `n x n` matrix.
pub fn symv(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n).map(|i| dot(&a[i * n..(i + 1) * n], x)).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}
