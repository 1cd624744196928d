use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{BfcError, Result};
use crate::regress::kernel::Kernel;
use crate::regress::linalg::{norm, symv, Cholesky};

/// Kernel ridge regression in dual form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrrModel {
    pub alpha: Vec<f64>,
    pub support: DataMatrix,
    pub lambda: f64,
    pub kernel: Kernel,
    /// Added to every prediction (the group mean when the target was centered).
    pub offset: f64,
}

impl KrrModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.offset
            + self
                .support
                .iter_rows()
                .zip(&self.alpha)
                .map(|(s, a)| a * self.kernel.eval(x, s))
                .sum::<f64>()
    }
}

/// Solves `(K + lambda I) alpha = y` by Cholesky with one step of iterative
/// refinement.
pub fn train_krr(x: &DataMatrix, y: &[f64], lambda: f64, kernel: Kernel) -> Result<KrrModel> {
    let m = x.rows();
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(BfcError::InvalidArgument(format!(
            "lambda must be > 0, got {lambda}"
        )));
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
    let mut a = kernel.gram(x);
    for i in 0..m {
        a[i * m + i] += lambda;
    }
    let chol = Cholesky::factor(a.clone(), m)?;
    let mut alpha = chol.solve(y);
    let r: Vec<f64> = symv(&a, m, &alpha)
        .iter()
        .zip(y)
        .map(|(v, t)| t - v)
        .collect();
    if norm(&r) > 0.0 {
        let fix = chol.solve(&r);
        alpha.iter_mut().zip(&fix).for_each(|(a, f)| *a += f);
    }
    Ok(KrrModel {
        alpha,
        support: x.clone(),
        lambda,
        kernel,
        offset: 0.0,
    })
}

/// `|(K + lambda I) alpha - y|` for a trained model against its targets.
pub fn krr_residual(model: &KrrModel, y: &[f64]) -> f64 {
    let m = model.support.rows();
    let mut a = model.kernel.gram(&model.support);
    for i in 0..m {
        a[i * m + i] += model.lambda;
    }
    let r: Vec<f64> = symv(&a, m, &model.alpha)
        .iter()
        .zip(y)
        .map(|(v, t)| v - (t - model.offset))
        .collect();
    norm(&r)
}
