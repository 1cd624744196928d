//! Level-by-level best friend clustering and optimal-level selection.
//!
//! Level 1 clusters the raw samples; level `k + 1` clusters the centers of
//! level `k`. Every cluster absorbs at least two children, so the number of
//! levels is logarithmic in the sample count. The dispersion of a level-`k`
//! cluster is its best friend weight in the level-`k + 1` graph, so HCI for a
//! level is available as soon as the next level has been built.

use serde::{Deserialize, Serialize};

use crate::bfgraph::{build_best_friend_graph_with, find_components_with, BestFriendGraph};
use crate::data::DataMatrix;
use crate::error::{BfcError, Result};
use crate::pool::WorkerPool;

/// One step of the hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLevel {
    /// 1-based level number.
    pub level: usize,
    /// Cluster id of every original sample.
    pub assignment: Vec<usize>,
    /// Ids of the level below that make up each cluster (sample indices at
    /// level 1), ascending.
    pub children: Vec<Vec<usize>>,
    /// `(start, len)` of each cluster in the organized sample order.
    pub ranges: Vec<(usize, usize)>,
    pub centers: DataMatrix,
    pub counts: Vec<usize>,
    pub compactness: Vec<f64>,
    /// Distance to the nearest other center; `None` until the next level
    /// exists, and always `None` on a single-cluster level.
    pub dispersion: Option<Vec<f64>>,
    /// Best friend graph over the previous level's centers.
    pub graph: BestFriendGraph,
    #[serde(skip)]
    sums: Vec<f64>,
}

impl ClusterLevel {
    pub fn num_clusters(&self) -> usize {
        self.counts.len()
    }

    /// Per-cluster sums of the original samples, row-major `m x d`.
    pub fn sums(&self) -> &[f64] {
        &self.sums
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hierarchy {
    pub n: usize,
    pub dim: usize,
    pub levels: Vec<ClusterLevel>,
    /// HCI per level, same indexing as `levels`.
    pub hci: Vec<f64>,
    /// 1-based level with maximal HCI.
    pub optimal_level: usize,
    /// Organized sample order: position -> original sample index.
    pub order: Vec<usize>,
}

impl Hierarchy {
    /// Level by 1-based number.
    pub fn level(&self, k: usize) -> &ClusterLevel {
        &self.levels[k - 1]
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn optimal(&self) -> &ClusterLevel {
        self.level(self.optimal_level)
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.num_clusters()).collect()
    }
}

fn group_level(
    graph: BestFriendGraph,
    sums_in: &[f64],
    counts_in: &[usize],
    dim: usize,
    level: usize,
    pool: &WorkerPool,
) -> Result<(ClusterLevel, Vec<usize>)> {
    let comps = find_components_with(&graph, pool);
    let m = comps.len();
    let mut sums = vec![0.0; m * dim];
    let mut counts = vec![0usize; m];
    let mut parent = vec![0usize; counts_in.len()];
    let mut children = Vec::with_capacity(m);
    let mut compactness = Vec::with_capacity(m);
    for c in &comps {
        let acc = &mut sums[c.id * dim..(c.id + 1) * dim];
        for &child in &c.members {
            parent[child] = c.id;
            counts[c.id] += counts_in[child];
            for (a, s) in acc.iter_mut().zip(&sums_in[child * dim..(child + 1) * dim]) {
                *a += s;
            }
        }
        children.push(c.members.clone());
        compactness.push(c.compactness);
    }
    let mut centers = Vec::with_capacity(m * dim);
    for (k, &cnt) in counts.iter().enumerate() {
        centers.extend(sums[k * dim..(k + 1) * dim].iter().map(|s| s / cnt as f64));
    }
    let centers = DataMatrix::new(m, dim, centers)?;
    Ok((
        ClusterLevel {
            level,
            assignment: Vec::new(),
            children,
            ranges: Vec::new(),
            centers,
            counts,
            compactness,
            dispersion: None,
            graph,
            sums,
        },
        parent,
    ))
}

/// One clustering step over the centers of the level below.
///
/// `counts_in[i]` is the number of original samples behind center `i`; new
/// centers are the count-weighted means, i.e. the means of the original
/// samples. The returned level carries no sample assignment or ranges.
pub fn cluster_step(
    centers_in: &DataMatrix,
    counts_in: &[usize],
    level: usize,
    pool: &WorkerPool,
) -> Result<ClusterLevel> {
    if counts_in.len() != centers_in.rows() {
        return Err(BfcError::DimensionMismatch {
            expected: centers_in.rows(),
            got: counts_in.len(),
        });
    }
    let dim = centers_in.cols();
    let mut sums = Vec::with_capacity(centers_in.rows() * dim);
    for (r, &c) in centers_in.iter_rows().zip(counts_in) {
        sums.extend(r.iter().map(|v| v * c as f64));
    }
    let graph = build_best_friend_graph_with(centers_in, pool)?;
    Ok(group_level(graph, &sums, counts_in, dim, level, pool)?.0)
}

/// Fills `level`'s dispersion from the graph built over its centers.
pub fn dispersion_fill(level: &mut ClusterLevel, next_graph: &BestFriendGraph) -> Result<()> {
    let m = level.num_clusters();
    if m < 2 {
        return Err(BfcError::InvalidArgument(
            "dispersion is undefined for a single-cluster level".into(),
        ));
    }
    if next_graph.len() != m {
        return Err(BfcError::DimensionMismatch {
            expected: m,
            got: next_graph.len(),
        });
    }
    level.dispersion = Some(next_graph.weights().to_vec());
    Ok(())
}

/// Mean of `(d - c) / (d + c)`; a term with `d + c == 0` counts as 0 and an
/// empty or single-cluster level scores 0.
pub fn hci_from(compactness: &[f64], dispersion: &[f64]) -> f64 {
    let m = compactness.len();
    if m <= 1 {
        return 0.0;
    }
    let total: f64 = compactness
        .iter()
        .zip(dispersion)
        .map(|(&c, &d)| if d + c == 0.0 { 0.0 } else { (d - c) / (d + c) })
        .sum();
    total / m as f64
}

/// HCI of a level whose dispersion has been filled.
pub fn hci(level: &ClusterLevel) -> Result<f64> {
    if level.num_clusters() <= 1 {
        return Ok(0.0);
    }
    let d = level.dispersion.as_ref().ok_or_else(|| {
        BfcError::InvalidArgument(format!("level {} has no dispersion yet", level.level))
    })?;
    Ok(hci_from(&level.compactness, d))
}

/// 1-based index of the largest HCI; ties go to the lowest level.
pub fn select_optimal_level(hci: &[f64]) -> usize {
    let mut best = 0;
    for (k, &h) in hci.iter().enumerate() {
        if h > hci[best] {
            best = k;
        }
    }
    best + 1
}

/// Clusters until a single cluster remains, then scores every level.
pub fn build_hierarchy(data: &DataMatrix, pool: &WorkerPool) -> Result<Hierarchy> {
    let n = data.rows();
    if n < 2 {
        return Err(BfcError::TooFewSamples { needed: 2, got: n });
    }
    let dim = data.cols();
    let mut levels: Vec<ClusterLevel> = Vec::new();

    let graph = build_best_friend_graph_with(data, pool)?;
    let ones = vec![1usize; n];
    let (mut first, parent) = group_level(graph, data.as_slice(), &ones, dim, 1, pool)?;
    first.assignment = parent;
    levels.push(first);

    while levels.last().unwrap().num_clusters() > 1 {
        let prev = levels.last_mut().unwrap();
        let graph = build_best_friend_graph_with(&prev.centers, pool)?;
        dispersion_fill(prev, &graph)?;
        let (mut next, parent) =
            group_level(graph, &prev.sums, &prev.counts, dim, prev.level + 1, pool)?;
        next.assignment = prev.assignment.iter().map(|&c| parent[c]).collect();
        levels.push(next);
    }

    let order = organize_levels(&mut levels, n);
    let hci = levels.iter().map(hci).collect::<Result<Vec<_>>>()?;
    let optimal_level = select_optimal_level(&hci);
    Ok(Hierarchy {
        n,
        dim,
        levels,
        hci,
        optimal_level,
        order,
    })
}

/// Lays samples out so that every cluster at every level is a contiguous
/// range and children keep their id order inside the parent. Fills
/// `ranges` and returns position -> sample.
fn organize_levels(levels: &mut [ClusterLevel], n: usize) -> Vec<usize> {
    let top = levels.len();
    let mut order: Vec<usize> = (0..levels[top - 1].num_clusters()).collect();
    for k in (0..top).rev() {
        order = order
            .iter()
            .flat_map(|&c| levels[k].children[c].iter().copied())
            .collect();
    }
    debug_assert_eq!(order.len(), n);

    let mut start_below = vec![0usize; n];
    for (pos, &s) in order.iter().enumerate() {
        start_below[s] = pos;
    }
    for level in levels.iter_mut() {
        let ranges: Vec<(usize, usize)> = level
            .children
            .iter()
            .zip(&level.counts)
            .map(|(ch, &cnt)| (start_below[ch[0]], cnt))
            .collect();
        start_below = ranges.iter().map(|r| r.0).collect();
        level.ranges = ranges;
    }
    order
}

/// Reorders the rows of `data` into the hierarchy's organized order.
/// Returns the reordered matrix and the position -> original index map.
pub fn organize(data: &DataMatrix, hierarchy: &Hierarchy) -> Result<(DataMatrix, Vec<usize>)> {
    if data.rows() != hierarchy.n {
        return Err(BfcError::DimensionMismatch {
            expected: hierarchy.n,
            got: data.rows(),
        });
    }
    Ok((data.select_rows(&hierarchy.order), hierarchy.order.clone()))
}
