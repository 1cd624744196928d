use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{BfcError, Result};
use crate::regress::linalg::{dot, Cholesky};

/// Ordinary least squares with intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.intercept
    }

    /// `(w_1, ..., w_d, intercept)`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut v = self.weights.clone();
        v.push(self.intercept);
        v
    }
}

/// Least squares through the normal equations of the centered problem. A
/// ridge jitter is added only if the Gram matrix is numerically singular.
pub fn train_lr(x: &DataMatrix, y: &[f64]) -> Result<LinearModel> {
    let (n, d) = (x.rows(), x.cols());
    if n == 0 {
        return Err(BfcError::TooFewSamples { needed: 1, got: 0 });
    }
    if y.len() != n {
        return Err(BfcError::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let nf = n as f64;
    let mut xm = vec![0.0; d];
    for r in x.iter_rows() {
        for (m, v) in xm.iter_mut().zip(r) {
            *m += v;
        }
    }
    xm.iter_mut().for_each(|m| *m /= nf);
    let ym = y.iter().sum::<f64>() / nf;

    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    let mut xc = vec![0.0; d];
    for (r, &yi) in x.iter_rows().zip(y) {
        for j in 0..d {
            xc[j] = r[j] - xm[j];
        }
        let yc = yi - ym;
        for a in 0..d {
            rhs[a] += xc[a] * yc;
            for b in 0..=a {
                gram[a * d + b] += xc[a] * xc[b];
            }
        }
    }
    let trace: f64 = (0..d).map(|a| gram[a * d + a]).sum();
    let mut jitter = 0.0;
    let chol = loop {
        let mut g = gram.clone();
        for a in 0..d {
            g[a * d + a] += jitter;
        }
        match Cholesky::factor(g, d) {
            Ok(c) => break c,
            Err(_) if jitter < 1e6 * (trace / d as f64).max(1.0) => {
                jitter = if jitter == 0.0 {
                    1e-12 * (trace / d as f64).max(1.0)
                } else {
                    jitter * 100.0
                };
            }
            Err(e) => return Err(e),
        }
    };
    let weights = chol.solve(&rhs);
    let intercept = ym - dot(&weights, &xm);
    Ok(LinearModel { weights, intercept })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_through_origin() {
        let x = DataMatrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]).unwrap();
        let m = train_lr(&x, &[0.0, 2.0, 4.0, 6.0]).unwrap();
        assert!((m.weights[0] - 2.0).abs() < 1e-12);
        assert!(m.intercept.abs() < 1e-12);
    }

    #[test]
    fn constant_target() {
        let x = DataMatrix::from_rows(&[[0.3, 1.0], [1.7, -2.0], [2.2, 0.5]]).unwrap();
        let m = train_lr(&x, &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(m.coefficients(), vec![0.0, 0.0, 4.0]);
    }

    #[test]
    fn single_sample_and_collinear_columns() {
        let x = DataMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let m = train_lr(&x, &[3.0]).unwrap();
        assert!((m.predict(&[1.0, 2.0]) - 3.0).abs() < 1e-12);

        let x = DataMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]).unwrap();
        let m = train_lr(&x, &[1.0, 2.0, 3.0]).unwrap();
        assert!((m.predict(&[4.0, 8.0]) - 4.0).abs() < 1e-6);
    }
}
