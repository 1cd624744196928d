//! Independent oracles and instance generators shared by the integration
//! tests. Nothing here calls into the code under test except to build inputs.
#![allow(dead_code)]

use bfc_core::DataMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Plain left-to-right Euclidean distance.
pub fn naive_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += (x - y) * (x - y);
    }
    s.sqrt()
}

/// Uniform points in `[0, 1)^d`.
pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DataMatrix {
    let data = (0..n * d).map(|_| rng.random::<f64>()).collect();
    DataMatrix::new(n, d, data).unwrap()
}

/// Points on a small integer grid, so many distances tie exactly.
pub fn grid_points(rng: &mut ChaCha8Rng, n: usize, d: usize, side: i32) -> DataMatrix {
    let data = (0..n * d)
        .map(|_| rng.random_range(0..side) as f64)
        .collect();
    DataMatrix::new(n, d, data).unwrap()
}

/// Random instance: half continuous, half on a tie-heavy grid.
pub fn mixed_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DataMatrix {
    if rng.random::<bool>() {
        uniform_points(rng, n, d)
    } else {
        let side = rng.random_range(3..12);
        grid_points(rng, n, d, side)
    }
}

/// Nearest other point by exhaustive scan; lowest index wins ties.
pub fn brute_nearest(x: &DataMatrix, i: usize) -> (usize, f64) {
    let mut best = usize::MAX;
    let mut best_d = f64::INFINITY;
    for j in 0..x.rows() {
        if j == i {
            continue;
        }
        let d = naive_distance(x.row(i), x.row(j));
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    (best, best_d)
}

pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }

    /// Vertex sets, each ascending, ordered by smallest member.
    pub fn sets(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root = std::collections::BTreeMap::new();
        for v in 0..n {
            let r = self.find(v);
            by_root.entry(r).or_insert_with(Vec::new).push(v);
        }
        let mut sets: Vec<Vec<usize>> = by_root.into_values().collect();
        sets.sort_by_key(|s| s[0]);
        sets
    }
}

/// Kruskal minimum spanning tree weight of the complete graph on `members`.
pub fn kruskal_weight(x: &DataMatrix, members: &[usize]) -> f64 {
    let mut edges = Vec::new();
    for (a, &u) in members.iter().enumerate() {
        for &v in &members[a + 1..] {
            edges.push((
                naive_distance(x.row(u), x.row(v)),
                a,
                members.iter().position(|&m| m == v).unwrap(),
            ));
        }
    }
    edges.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut uf = UnionFind::new(members.len());
    let mut total = 0.0;
    let mut used = 0;
    for (w, a, b) in edges {
        if uf.union(a, b) {
            total += w;
            used += 1;
        }
    }
    assert_eq!(used + 1, members.len().max(1));
    total
}

/// Connected vertex sets of the undirected graph with edges `i - next[i]`.
pub fn functional_graph_components(next: &[usize]) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(next.len());
    for (i, &j) in next.iter().enumerate() {
        uf.union(i, j);
    }
    uf.sets()
}

/// Optimal makespan of packing `sizes` onto `p` bins, by exhaustive search.
pub fn optimal_makespan(sizes: &[usize], p: usize) -> usize {
    fn go(sizes: &[usize], k: usize, loads: &mut [usize], best: &mut usize) {
        if k == sizes.len() {
            *best = (*best).min(*loads.iter().max().unwrap());
            return;
        }
        for b in 0..loads.len() {
            // skip bins identical to an earlier empty one
            if loads[b] == 0 && loads[..b].contains(&0) {
                continue;
            }
            if loads[b] + sizes[k] >= *best {
                continue;
            }
            loads[b] += sizes[k];
            go(sizes, k + 1, loads, best);
            loads[b] -= sizes[k];
        }
    }
    let mut best = usize::MAX;
    go(sizes, 0, &mut vec![0; p], &mut best);
    best
}

/// Dense solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let m = nalgebra::DMatrix::from_row_slice(n, n, a);
    let v = nalgebra::DVector::from_column_slice(b);
    m.lu()
        .solve(&v)
        .expect("nonsingular")
        .iter()
        .copied()
        .collect()
}

/// Least squares `min |X w - y|` with an intercept column, via QR.
/// Returns `[w_1..w_d, intercept]`.
pub fn least_squares_qr(x: &DataMatrix, y: &[f64]) -> Vec<f64> {
    let (n, d) = (x.rows(), x.cols());
    let mut a = nalgebra::DMatrix::zeros(n, d + 1);
    for i in 0..n {
        for j in 0..d {
            a[(i, j)] = x.row(i)[j];
        }
        a[(i, d)] = 1.0;
    }
    let b = nalgebra::DVector::from_column_slice(y);
    let qr = a.qr();
    let qtb = qr.q().transpose() * b;
    let r = qr.r();
    r.solve_upper_triangular(&qtb)
        .expect("full rank")
        .iter()
        .copied()
        .collect()
}

/// Exact binomial coefficient; fine for the small `n` used by the oracle.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// Adjusted mutual information by direct summation of the expected-MI
/// formula with exact hypergeometric weights, max-entropy normalization.
/// Suitable for up to a few dozen samples.
pub fn ami_oracle(a: &[i64], b: &[i64]) -> f64 {
    use std::collections::BTreeMap;
    let n = a.len();
    let mut ka = BTreeMap::new();
    let mut kb = BTreeMap::new();
    for &v in a {
        let l = ka.len();
        ka.entry(v).or_insert(l);
    }
    for &v in b {
        let l = kb.len();
        kb.entry(v).or_insert(l);
    }
    let (r, s) = (ka.len(), kb.len());
    let mut t = vec![vec![0usize; s]; r];
    for (x, y) in a.iter().zip(b) {
        t[ka[x]][kb[y]] += 1;
    }
    let ai: Vec<usize> = t.iter().map(|row| row.iter().sum()).collect();
    let bj: Vec<usize> = (0..s).map(|j| t.iter().map(|row| row[j]).sum()).collect();
    let nf = n as f64;
    let h = |m: &[usize]| -> f64 {
        m.iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / nf;
                -p * p.ln()
            })
            .sum()
    };
    let (ha, hb) = (h(&ai), h(&bj));
    let mut mi = 0.0;
    for i in 0..r {
        for j in 0..s {
            let nij = t[i][j] as f64;
            if nij > 0.0 {
                mi += nij / nf * (nf * nij / (ai[i] as f64 * bj[j] as f64)).ln();
            }
        }
    }
    let mut emi = 0.0;
    for &x in &ai {
        for &y in &bj {
            let lo = (x + y).saturating_sub(n).max(1);
            for k in lo..=x.min(y) {
                let kf = k as f64;
                let term = kf / nf * (nf * kf / (x as f64 * y as f64)).ln();
                // hypergeometric probability of a cell count of k
                let prob = (binomial(x, k) * binomial(n - x, y - k)) as f64 / binomial(n, y) as f64;
                emi += term * prob;
            }
        }
    }
    (mi - emi) / (ha.max(hb) - emi)
}

/// Gaussian kernel from the plain distance.
pub fn rbf(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let d = naive_distance(a, b);
    (-d * d / (2.0 * sigma * sigma)).exp()
}

pub fn gram(x: &DataMatrix, sigma: f64) -> Vec<f64> {
    let m = x.rows();
    let mut k = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            k[i * m + j] = rbf(x.row(i), x.row(j), sigma);
        }
    }
    k
}

/// Minimizes the three-point SVR dual over `beta1, beta2` with
/// `beta3 = -beta1 - beta2` by successively finer grids.
pub fn svr_grid_oracle(k: &[f64], y: &[f64], eps: f64, c: f64) -> f64 {
    let obj = |b: [f64; 3]| {
        let mut q = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                q += b[i] * b[j] * k[i * 3 + j];
            }
        }
        0.5 * q + eps * b.iter().map(|v| v.abs()).sum::<f64>()
            - b.iter().zip(y).map(|(a, t)| a * t).sum::<f64>()
    };
    let (mut lo1, mut hi1, mut lo2, mut hi2) = (-c, c, -c, c);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for _ in 0..12 {
        let steps = 200;
        for a in 0..=steps {
            let b1 = lo1 + (hi1 - lo1) * a as f64 / steps as f64;
            for b in 0..=steps {
                let b2 = lo2 + (hi2 - lo2) * b as f64 / steps as f64;
                let b3 = -b1 - b2;
                if b3.abs() > c {
                    continue;
                }
                let v = obj([b1, b2, b3]);
                if v < best.0 {
                    best = (v, b1, b2);
                }
            }
        }
        let w1 = (hi1 - lo1) / 20.0;
        let w2 = (hi2 - lo2) / 20.0;
        lo1 = (best.1 - w1).max(-c);
        hi1 = (best.1 + w1).min(c);
        lo2 = (best.2 - w2).max(-c);
        hi2 = (best.2 + w2).min(c);
    }
    best.0
}
