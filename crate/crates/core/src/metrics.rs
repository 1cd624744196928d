//! Partition agreement and regression error metrics.

use std::collections::BTreeMap;

use crate::error::{BfcError, Result};

/// Counts of samples per (true label, predicted label) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub row_sums: Vec<usize>,
    pub col_sums: Vec<usize>,
    pub n: usize,
}

impl ContingencyTable {
    pub fn new<A: Ord + Copy, B: Ord + Copy>(a: &[A], b: &[B]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(BfcError::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        let ra = relabel(a);
        let rb = relabel(b);
        let r = ra.iter().max().map_or(0, |m| m + 1);
        let s = rb.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![vec![0usize; s]; r];
        for (&i, &j) in ra.iter().zip(&rb) {
            counts[i][j] += 1;
        }
        let row_sums = counts.iter().map(|row| row.iter().sum()).collect();
        let col_sums = (0..s)
            .map(|j| counts.iter().map(|row| row[j]).sum())
            .collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            n: a.len(),
        })
    }
}

fn relabel<T: Ord + Copy>(labels: &[T]) -> Vec<usize> {
    let mut ids = BTreeMap::new();
    for &l in labels {
        let next = ids.len();
        ids.entry(l).or_insert(next);
    }
    labels.iter().map(|l| ids[l]).collect()
}

fn entropy(sums: &[usize], n: usize) -> f64 {
    let nf = n as f64;
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / nf;
            -p * p.ln()
        })
        .sum()
}

fn mutual_information(t: &ContingencyTable) -> f64 {
    let nf = t.n as f64;
    let mut mi = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let v = nij as f64;
                mi += v / nf * (nf * v / (t.row_sums[i] as f64 * t.col_sums[j] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Expected mutual information under the hypergeometric model of random
/// partitions with fixed marginals.
fn expected_mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.n;
    let nf = n as f64;
    let mut lnfact = vec![0.0f64; n + 1];
    for k in 1..=n {
        lnfact[k] = lnfact[k - 1] + (k as f64).ln();
    }
    let mut emi = 0.0;
    for &a in &t.row_sums {
        for &b in &t.col_sums {
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            let base = lnfact[a] + lnfact[b] + lnfact[n - a] + lnfact[n - b] - lnfact[n];
            for nij in lo..=hi {
                let v = nij as f64;
                let term = v / nf * (nf * v / (a as f64 * b as f64)).ln();
                let lp = base
                    - lnfact[nij]
                    - lnfact[a - nij]
                    - lnfact[b - nij]
                    - lnfact[n + nij - a - b];
                emi += term * lp.exp();
            }
        }
    }
    emi
}

/// Adjusted mutual information, normalized by the larger of the two
/// entropies. 1 for identical partitions up to relabeling, around 0 for
/// independent ones.
pub fn ami<A: Ord + Copy, B: Ord + Copy>(labels_true: &[A], labels_pred: &[B]) -> Result<f64> {
    if labels_true.is_empty() {
        return Err(BfcError::TooFewSamples { needed: 1, got: 0 });
    }
    let t = ContingencyTable::new(labels_true, labels_pred)?;
    let (r, s) = (t.row_sums.len(), t.col_sums.len());
    if r == 1 || s == 1 {
        return Ok(if r == s { 1.0 } else { 0.0 });
    }
    let mi = mutual_information(&t);
    let hu = entropy(&t.row_sums, t.n);
    let hv = entropy(&t.col_sums, t.n);
    let emi = expected_mutual_information(&t);
    let denom = hu.max(hv) - emi;
    if denom.abs() < 1e-15 {
        let same = r == s
            && t.counts
                .iter()
                .all(|row| row.iter().filter(|&&c| c > 0).count() == 1);
        return Ok(if same { 1.0 } else { 0.0 });
    }
    Ok((mi - emi) / denom)
}

/// Mean of squared residuals.
pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(BfcError::DimensionMismatch {
            expected: truth.len(),
            got: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(BfcError::TooFewSamples { needed: 1, got: 0 });
    }
    let s: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(s / pred.len() as f64)
}
