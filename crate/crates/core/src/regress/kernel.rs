use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::distance::squared_distance;
use crate::regress::linalg::dot;

/// Kernel functions for KRR and SVR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    /// `k(x, z) = x . z`
    Linear,
    /// `k(x, z) = exp(-|x - z|^2 / (2 sigma^2))`
    Rbf { sigma: f64 },
}

impl Kernel {
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { sigma } => (-squared_distance(a, b) / (2.0 * sigma * sigma)).exp(),
        }
    }

    /// Full symmetric Gram matrix, row-major.
    pub fn gram(&self, x: &DataMatrix) -> Vec<f64> {
        let m = x.rows();
        let mut k = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..=i {
                let v = self.eval(x.row(i), x.row(j));
                k[i * m + j] = v;
                k[j * m + i] = v;
            }
        }
        k
    }

    pub fn name(&self) -> String {
        match self {
            Kernel::Linear => "linear".into(),
            Kernel::Rbf { sigma } => format!("rbf(sigma={sigma})"),
        }
    }
}

/// Median pairwise distance over at most `max_samples` rows taken at a fixed
/// stride; 1.0 when every distance is zero.
pub fn median_heuristic(x: &DataMatrix, max_samples: usize) -> f64 {
    let n = x.rows();
    let stride = n.div_ceil(max_samples.max(2)).max(1);
    let idx: Vec<usize> = (0..n).step_by(stride).collect();
    let mut d = Vec::with_capacity(idx.len() * idx.len() / 2);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            d.push(squared_distance(x.row(i), x.row(j)).sqrt());
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    let mid = d.len() / 2;
    let (_, m, _) = d.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    if *m > 0.0 {
        *m
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rbf_is_one_on_the_diagonal() {
        let k = Kernel::Rbf { sigma: 0.7 };
        assert_eq!(k.eval(&[1.0, 2.0], &[1.0, 2.0]), 1.0);
        let v = k.eval(&[0.0], &[1.0]);
        assert!((v - (-1.0f64 / 0.98).exp()).abs() < 1e-15);
    }

    #[test]
    fn median_of_line() {
        let x = DataMatrix::from_rows(&[[0.0], [1.0], [3.0]]).unwrap();
        // distances 1, 3, 2
        assert_eq!(median_heuristic(&x, 1000), 2.0);
    }
}
