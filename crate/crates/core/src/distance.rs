//! Canonical Euclidean distance kernel.
//!
//! Every distance in the crate goes through [`squared_distance`], which sums
//! squared coordinate differences in fixed-width lanes and folds the lanes in
//! a fixed order. The result therefore depends only on the two inputs, never
//! on how callers batch or parallelize their loops, which is what makes
//! mutual-pair detection and worker-count independence exact.

use crate::error::{BfcError, Result};

/// Lane width of the chunked kernel. Changing it changes the summation order
/// and therefore the low bits of every distance.
pub const LANES: usize = 8;

/// Squared Euclidean distance with the canonical summation order.
///
/// Callers must pass slices of equal length; this is checked in debug builds
/// only. Use [`distance`] for the checked public entry point.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; LANES];
    let mut ca = a.chunks_exact(LANES);
    let mut cb = b.chunks_exact(LANES);
    for (xa, xb) in (&mut ca).zip(&mut cb) {
        for l in 0..LANES {
            let t = xa[l] - xb[l];
            acc[l] += t * t;
        }
    }
    for (l, (x, y)) in ca.remainder().iter().zip(cb.remainder()).enumerate() {
        let t = x - y;
        acc[l] += t * t;
    }
    // pairwise fold: (0+4)+(2+6) + (1+5)+(3+7)
    let s0 = acc[0] + acc[4];
    let s1 = acc[1] + acc[5];
    let s2 = acc[2] + acc[6];
    let s3 = acc[3] + acc[7];
    (s0 + s2) + (s1 + s3)
}

/// Euclidean distance between two points of equal dimension.
pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(BfcError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(squared_distance(a, b).sqrt())
}
