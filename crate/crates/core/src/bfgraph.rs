//! Best friend graphs: every vertex points at its nearest neighbor.
//!
//! Each weakly connected component of such a graph contains exactly one
//! directed cycle, and that cycle has length two (a mutual pair). Dropping
//! one edge of each mutual pair leaves a forest whose trees are minimum
//! spanning trees of their vertex sets, and the mean tree-edge weight of a
//! component is its compactness.

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::distance::squared_distance;
use crate::error::{BfcError, Result};
use crate::pool::WorkerPool;

/// Vertices per parallel task in the nearest-neighbor scan.
const SCAN_BLOCK: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestFriendEdge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// One outgoing edge per vertex, indexed by source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestFriendGraph {
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl BestFriendGraph {
    /// Assembles a graph from explicit edges. `targets[i]` is the best friend
    /// of `i`; no nearest-neighbor property is checked.
    pub fn from_parts(targets: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        let n = targets.len();
        if weights.len() != n {
            return Err(BfcError::DimensionMismatch {
                expected: n,
                got: weights.len(),
            });
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= n || t == i {
                return Err(BfcError::InvalidArgument(format!(
                    "vertex {i} has invalid best friend {t}"
                )));
            }
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(BfcError::InvalidArgument(format!(
                "vertex {i} has invalid weight {}",
                weights[i]
            )));
        }
        Ok(Self { targets, weights })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    #[inline]
    pub fn target(&self, i: usize) -> usize {
        self.targets[i]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn edge(&self, i: usize) -> BestFriendEdge {
        BestFriendEdge {
            source: i,
            target: self.targets[i],
            weight: self.weights[i],
        }
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = BestFriendEdge> + '_ {
        (0..self.len()).map(|i| self.edge(i))
    }

    /// True when `i` and its best friend point at each other.
    #[inline]
    pub fn is_mutual(&self, i: usize) -> bool {
        self.targets[self.targets[i]] == i
    }

    /// Little-endian dump of targets and weight bits, for byte-level
    /// comparisons between runs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len() * 16);
        for (t, w) in self.targets.iter().zip(&self.weights) {
            out.extend_from_slice(&(*t as u64).to_le_bytes());
            out.extend_from_slice(&w.to_bits().to_le_bytes());
        }
        out
    }
}

/// Nearest neighbor of `i` by the canonical squared distance; equidistant
/// candidates resolve to the lowest index.
fn best_friend(points: &DataMatrix, i: usize) -> (usize, f64) {
    let xi = points.row(i);
    let mut best = usize::MAX;
    let mut best_sq = f64::INFINITY;
    for (j, xj) in points.iter_rows().enumerate() {
        if j == i {
            continue;
        }
        let sq = squared_distance(xi, xj);
        if sq < best_sq {
            best_sq = sq;
            best = j;
        }
    }
    (best, best_sq.sqrt())
}

/// Builds the best friend graph with a fresh pool of `workers` threads.
pub fn build_best_friend_graph(points: &DataMatrix, workers: usize) -> Result<BestFriendGraph> {
    let pool = WorkerPool::new(workers)?;
    build_best_friend_graph_with(points, &pool)
}

/// Brute-force nearest-neighbor scan, parallel over blocks of vertices.
pub fn build_best_friend_graph_with(
    points: &DataMatrix,
    pool: &WorkerPool,
) -> Result<BestFriendGraph> {
    let n = points.rows();
    if n < 2 {
        return Err(BfcError::TooFewSamples { needed: 2, got: n });
    }
    let blocks = n.div_ceil(SCAN_BLOCK);
    let parts = pool.map_indexed(blocks, |b| {
        let lo = b * SCAN_BLOCK;
        let hi = (lo + SCAN_BLOCK).min(n);
        (lo..hi).map(|i| best_friend(points, i)).collect::<Vec<_>>()
    });
    let mut targets = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (t, w) in parts.into_iter().flatten() {
        targets.push(t);
        weights.push(w);
    }
    Ok(BestFriendGraph { targets, weights })
}

/// A weakly connected component of a best friend graph, i.e. one tree of the
/// best friend forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: usize,
    /// Ascending vertex indices.
    pub members: Vec<usize>,
    /// The mutual pair, lower index first.
    pub cycle_pair: (usize, usize),
    /// Tree edges, `members.len() - 1`.
    pub edge_count: usize,
    pub weight_sum: f64,
    pub compactness: f64,
}

/// Undirected forest adjacency in CSR form. The cycle edge leaving the higher
/// vertex of each mutual pair is dropped.
struct ForestAdjacency {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl ForestAdjacency {
    fn new(g: &BestFriendGraph) -> Self {
        let n = g.len();
        let kept = |v: usize| !(g.is_mutual(v) && v > g.target(v));
        let mut deg = vec![0usize; n];
        for v in 0..n {
            if kept(v) {
                deg[v] += 1;
                deg[g.target(v)] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &deg {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0usize; offsets[n]];
        for v in 0..n {
            if kept(v) {
                let t = g.target(v);
                neighbors[fill[v]] = t;
                fill[v] += 1;
                neighbors[fill[t]] = v;
                fill[t] += 1;
            }
        }
        Self { offsets, neighbors }
    }

    fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Weight of the forest edge between adjacent vertices `u` and `v`.
#[inline]
fn edge_weight(g: &BestFriendGraph, u: usize, v: usize) -> f64 {
    if g.target(u) == v {
        g.weight(u)
    } else {
        debug_assert_eq!(g.target(v), u);
        g.weight(v)
    }
}

/// Depth-first traversal of one tree from `root`, accumulating tree weights.
/// Iterative: trees can be as deep as the vertex count.
fn traverse(g: &BestFriendGraph, adj: &ForestAdjacency, root: usize) -> (Vec<usize>, f64) {
    let mut members = vec![root];
    let mut weight_sum = 0.0;
    let mut stack = vec![(root, usize::MAX)];
    while let Some((v, parent)) = stack.pop() {
        for &u in adj.neighbors(v) {
            if u != parent {
                weight_sum += edge_weight(g, v, u);
                members.push(u);
                stack.push((u, v));
            }
        }
    }
    (members, weight_sum)
}

/// Splits the graph into its components, one per mutual pair, ordered by
/// their smallest member.
pub fn find_components(g: &BestFriendGraph) -> Vec<Component> {
    find_components_with(g, &WorkerPool::single())
}

/// [`find_components`] with traversal spread over a worker pool; each
/// component is walked by exactly one task.
pub fn find_components_with(g: &BestFriendGraph, pool: &WorkerPool) -> Vec<Component> {
    let n = g.len();
    let roots: Vec<(usize, usize)> = (0..n)
        .filter(|&i| g.is_mutual(i) && i < g.target(i))
        .map(|i| (i, g.target(i)))
        .collect();
    let adj = ForestAdjacency::new(g);
    let walked = pool.map_indexed(roots.len(), |r| traverse(g, &adj, roots[r].0));

    let mut comps: Vec<Component> = roots
        .into_iter()
        .zip(walked)
        .map(|(pair, (mut members, weight_sum))| {
            members.sort_unstable();
            let edge_count = members.len() - 1;
            Component {
                id: 0,
                cycle_pair: pair,
                edge_count,
                weight_sum,
                compactness: weight_sum / edge_count as f64,
                members,
            }
        })
        .collect();
    comps.sort_by_key(|c| c.members[0]);
    for (id, c) in comps.iter_mut().enumerate() {
        c.id = id;
    }
    let covered: usize = comps.iter().map(|c| c.members.len()).sum();
    assert_eq!(
        covered, n,
        "best friend graph invariant violated: components cover {covered} of {n} vertices"
    );
    comps
}

/// Per-vertex component id.
pub fn component_labels(components: &[Component], n: usize) -> Vec<usize> {
    let mut label = vec![usize::MAX; n];
    for c in components {
        for &m in &c.members {
            label[m] = c.id;
        }
    }
    label
}

/// Undirected tree edges `(u, v, weight)` with `u < v`, one list per
/// component, sorted by endpoints.
pub fn forest_as_undirected(
    g: &BestFriendGraph,
    components: &[Component],
) -> Vec<Vec<(usize, usize, f64)>> {
    let label = component_labels(components, g.len());
    let mut out = vec![Vec::new(); components.len()];
    for v in 0..g.len() {
        let t = g.target(v);
        if g.is_mutual(v) && v > t {
            continue;
        }
        out[label[v]].push((v.min(t), v.max(t), g.weight(v)));
    }
    for edges in &mut out {
        edges.sort_by_key(|e| (e.0, e.1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[&[f64]]) -> DataMatrix {
        DataMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn two_points_point_at_each_other() {
        let g = build_best_friend_graph(&pts(&[&[0.0, 0.0], &[3.0, 4.0]]), 1).unwrap();
        assert_eq!(g.targets(), &[1, 0]);
        assert_eq!(g.weights(), &[5.0, 5.0]);
        let comps = find_components(&g);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].cycle_pair, (0, 1));
        assert_eq!(comps[0].edge_count, 1);
        assert_eq!(comps[0].compactness, 5.0);
        let forest = forest_as_undirected(&g, &comps);
        assert_eq!(forest, vec![vec![(0, 1, 5.0)]]);
    }

    #[test]
    fn one_dimensional_chain() {
        let g = build_best_friend_graph(&pts(&[&[0.0], &[1.0], &[3.0]]), 1).unwrap();
        assert_eq!(g.targets(), &[1, 0, 1]);
        let comps = find_components(&g);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].members, vec![0, 1, 2]);
        assert_eq!(comps[0].compactness, 1.5);
    }

    #[test]
    fn three_chain_drops_one_cycle_edge() {
        // 0 -> 1 <-> 2
        let g = BestFriendGraph::from_parts(vec![1, 2, 1], vec![2.0, 1.0, 1.0]).unwrap();
        let comps = find_components(&g);
        assert_eq!(comps[0].cycle_pair, (1, 2));
        let forest = forest_as_undirected(&g, &comps);
        assert_eq!(forest, vec![vec![(0, 1, 2.0), (1, 2, 1.0)]]);
    }

    #[test]
    fn compactness_of_four_edge_tree() {
        // star-ish tree hanging off the mutual pair (0,1) with weights 3,5,4,7
        // 0 <-> 1 (3), 2 -> 0 (5), 3 -> 1 (4), 4 -> 2 (7)
        let g = BestFriendGraph::from_parts(vec![1, 0, 0, 1, 2], vec![3.0, 3.0, 5.0, 4.0, 7.0])
            .unwrap();
        let comps = find_components(&g);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].edge_count, 4);
        assert!((comps[0].compactness - 4.75).abs() < 1e-12);
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        // 1 is equidistant from 0 and 2
        let g = build_best_friend_graph(&pts(&[&[0.0], &[1.0], &[2.0]]), 1).unwrap();
        assert_eq!(g.target(1), 0);
        // duplicates
        let g = build_best_friend_graph(&pts(&[&[5.0], &[5.0], &[5.0], &[5.0]]), 1).unwrap();
        assert_eq!(g.targets(), &[1, 0, 0, 0]);
        let comps = find_components(&g);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].compactness, 0.0);
    }

    #[test]
    fn fewer_than_two_points_is_an_error() {
        let err = build_best_friend_graph(&pts(&[&[1.0, 1.0]]), 1).unwrap_err();
        assert!(matches!(err, BfcError::TooFewSamples { .. }));
    }

    #[test]
    fn from_parts_rejects_self_loops() {
        assert!(BestFriendGraph::from_parts(vec![0, 0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn deep_chain_does_not_overflow() {
        // geometric spacing makes every point's best friend its left neighbor
        let n = 200_000;
        let targets: Vec<usize> = (0..n).map(|i| if i == 0 { 1 } else { i - 1 }).collect();
        let weights = vec![1.0; n];
        let g = BestFriendGraph::from_parts(targets, weights).unwrap();
        let comps = find_components(&g);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].members.len(), n);
    }
}
