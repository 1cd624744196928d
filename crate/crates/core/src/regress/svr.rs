//! Epsilon-insensitive support vector regression.
//!
//! The dual over `2m` box-constrained variables `(alpha, alpha*)` is solved by
//! sequential minimal optimization: each step picks the maximal violating
//! pair (largest first-order KKT violation) and solves the two-variable
//! subproblem analytically.

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{BfcError, Result};
use crate::regress::kernel::Kernel;

/// Guards the pair update when the curvature vanishes.
const TAU: f64 = 1e-12;

/// Gram matrices up to this many rows are cached in full.
const FULL_GRAM_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub epsilon: f64,
    pub c: f64,
    pub kernel: Kernel,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    pub max_iter: usize,
}

impl SvrParams {
    pub fn new(epsilon: f64, c: f64, kernel: Kernel) -> Self {
        Self {
            epsilon,
            c,
            kernel,
            tol: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    /// `alpha_i - alpha*_i` per training point.
    pub coef: Vec<f64>,
    pub alpha: Vec<f64>,
    pub alpha_star: Vec<f64>,
    pub bias: f64,
    pub epsilon: f64,
    pub c: f64,
    pub kernel: Kernel,
    pub support: DataMatrix,
    pub offset: f64,
    pub iterations: usize,
    /// Maximal KKT violation at exit.
    pub gap: f64,
}

impl SvrModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let s: f64 = self
            .support
            .iter_rows()
            .zip(&self.coef)
            .filter(|(_, c)| **c != 0.0)
            .map(|(r, c)| c * self.kernel.eval(x, r))
            .sum();
        self.offset + s + self.bias
    }

    /// Dual objective `1/2 b'Kb + eps |b|_1 - y'b` at `b = coef`.
    pub fn dual_objective(&self, y: &[f64]) -> f64 {
        dual_objective(
            &self.kernel.gram(&self.support),
            &self.coef,
            y,
            self.epsilon,
        )
    }
}

/// `1/2 b'Kb + eps sum|b_i| - y'b` for a row-major Gram matrix.
pub fn dual_objective(gram: &[f64], beta: &[f64], y: &[f64], epsilon: f64) -> f64 {
    let m = beta.len();
    let mut quad = 0.0;
    for i in 0..m {
        for j in 0..m {
            quad += beta[i] * beta[j] * gram[i * m + j];
        }
    }
    0.5 * quad + epsilon * beta.iter().map(|b| b.abs()).sum::<f64>()
        - beta.iter().zip(y).map(|(b, t)| b * t).sum::<f64>()
}

enum Gram<'a> {
    Full(Vec<f64>),
    Lazy(&'a DataMatrix, Kernel),
}

impl Gram<'_> {
    fn row(&self, i: usize, m: usize, buf: &mut Vec<f64>) {
        buf.clear();
        match self {
            Gram::Full(k) => buf.extend_from_slice(&k[i * m..(i + 1) * m]),
            Gram::Lazy(x, kernel) => buf.extend(x.iter_rows().map(|r| kernel.eval(x.row(i), r))),
        }
    }
}

/// Trains an epsilon-SVR on `(x, y)`.
pub fn train_svr(x: &DataMatrix, y: &[f64], params: SvrParams) -> Result<SvrModel> {
    let m = x.rows();
    let SvrParams {
        epsilon,
        c,
        kernel,
        tol,
        max_iter,
    } = params;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(BfcError::InvalidArgument(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(BfcError::InvalidArgument(format!("C must be > 0, got {c}")));
    }
    if m == 0 {
        return Err(BfcError::TooFewSamples { needed: 1, got: 0 });
    }
    if y.len() != m {
        return Err(BfcError::DimensionMismatch {
            expected: m,
            got: y.len(),
        });
    }

    let gram = if m <= FULL_GRAM_LIMIT {
        Gram::Full(kernel.gram(x))
    } else {
        Gram::Lazy(x, kernel)
    };
    let diag: Vec<f64> = (0..m).map(|i| kernel.eval(x.row(i), x.row(i))).collect();

    // variable t < m is alpha_t (sign +1), t >= m is alpha*_{t-m} (sign -1)
    let l = 2 * m;
    let sign = |t: usize| if t < m { 1.0 } else { -1.0 };
    let point = |t: usize| if t < m { t } else { t - m };
    let mut a = vec![0.0; l];
    let mut g: Vec<f64> = (0..l)
        .map(|t| {
            if t < m {
                epsilon - y[t]
            } else {
                epsilon + y[t - m]
            }
        })
        .collect();

    let mut row_i = Vec::with_capacity(m);
    let mut row_j = Vec::with_capacity(m);
    let mut iterations = 0;
    let gap = loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..l {
            let yt = sign(t);
            let v = -yt * g[t];
            let up = if yt > 0.0 { a[t] < c } else { a[t] > 0.0 };
            let low = if yt > 0.0 { a[t] > 0.0 } else { a[t] < c };
            if up && v > gmax {
                gmax = v;
                i = t;
            }
            if low && v < gmin {
                gmin = v;
                j = t;
            }
        }
        let gap = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || gap < tol {
            break gap.max(0.0);
        }
        if iterations >= max_iter {
            return Err(BfcError::SolverMaxIterations { iterations, gap });
        }
        iterations += 1;

        let (pi, pj) = (point(i), point(j));
        let (yi, yj) = (sign(i), sign(j));
        gram.row(pi, m, &mut row_i);
        gram.row(pj, m, &mut row_j);
        let q_ij = yi * yj * row_i[pj];
        let (old_i, old_j) = (a[i], a[j]);

        if yi != yj {
            let mut quad = diag[pi] + diag[pj] + 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-g[i] - g[j]) / quad;
            let diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if diff > 0.0 {
                if a[j] < 0.0 {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = -diff;
            }
            if diff > 0.0 {
                if a[i] > c {
                    a[i] = c;
                    a[j] = c - diff;
                }
            } else if a[j] > c {
                a[j] = c;
                a[i] = c + diff;
            }
        } else {
            let mut quad = diag[pi] + diag[pj] - 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (g[i] - g[j]) / quad;
            let sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if sum > c {
                if a[i] > c {
                    a[i] = c;
                    a[j] = sum - c;
                }
            } else if a[j] < 0.0 {
                a[j] = 0.0;
                a[i] = sum;
            }
            if sum > c {
                if a[j] > c {
                    a[j] = c;
                    a[i] = sum - c;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = sum;
            }
        }

        let (di, dj) = (a[i] - old_i, a[j] - old_j);
        for (t, gt) in g.iter_mut().enumerate().take(l) {
            let p = point(t);
            *gt += sign(t) * (yi * row_i[p] * di + yj * row_j[p] * dj);
        }
    };

    // bias from free variables, else midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..l {
        let yt = sign(t);
        let yg = yt * g[t];
        if a[t] >= c {
            if yt < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if a[t] <= 0.0 {
            if yt > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    };

    let alpha = a[..m].to_vec();
    let alpha_star = a[m..].to_vec();
    let coef = alpha.iter().zip(&alpha_star).map(|(p, q)| p - q).collect();
    Ok(SvrModel {
        coef,
        alpha,
        alpha_star,
        bias: -rho,
        epsilon,
        c,
        kernel,
        support: x.clone(),
        offset: 0.0,
        iterations,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_inside_tube_give_flat_model() {
        let x = DataMatrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]).unwrap();
        let y = [0.05, -0.08, 0.02, 0.09];
        let m = train_svr(&x, &y, SvrParams::new(0.1, 10.0, Kernel::Linear)).unwrap();
        assert!(m.coef.iter().all(|&c| c == 0.0));
        assert_eq!(m.iterations, 0);
        for (t, yt) in y.iter().enumerate() {
            assert!((m.predict(x.row(t)) - yt).abs() <= 0.1 + 1e-12);
        }
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let x = DataMatrix::from_rows(&[[0.0]]).unwrap();
        assert!(train_svr(&x, &[0.0], SvrParams::new(-1.0, 1.0, Kernel::Linear)).is_err());
        assert!(train_svr(&x, &[0.0], SvrParams::new(0.1, 0.0, Kernel::Linear)).is_err());
    }

    #[test]
    fn iteration_cap_reports_gap() {
        let x = DataMatrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let mut p = SvrParams::new(0.0, 100.0, Kernel::Rbf { sigma: 1.0 });
        p.max_iter = 1;
        p.tol = 1e-12;
        match train_svr(&x, &[0.0, 5.0, -3.0], p) {
            Err(BfcError::SolverMaxIterations { iterations: 1, gap }) => assert!(gap > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn box_constraints_hold() {
        let x = DataMatrix::from_rows(&[[0.0], [0.4], [1.1], [2.0], [2.5], [3.7]]).unwrap();
        let y = [0.0, 1.0, -1.0, 2.0, 0.5, -0.7];
        let m = train_svr(
            &x,
            &y,
            SvrParams::new(0.05, 1.0, Kernel::Rbf { sigma: 0.8 }),
        )
        .unwrap();
        for (a, s) in m.alpha.iter().zip(&m.alpha_star) {
            assert!((0.0..=1.0).contains(a) && (0.0..=1.0).contains(s));
            assert!(a * s <= 1e-3);
        }
        assert!(m.gap < 1e-3);
    }
}
