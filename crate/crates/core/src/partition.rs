//! Balanced assignment of clusters to virtual processes.
//!
//! Oversized clusters are split by walking back down the hierarchy (a
//! cluster is replaced by the clusters it was merged from), and the resulting
//! groups are packed onto `p` processes largest-first. Groups stay separate
//! after packing: a process holding several groups trains one model per
//! group. Because the organized sample order nests every level, each group is
//! a contiguous range of that order.

use serde::{Deserialize, Serialize};

use crate::error::{BfcError, Result};
use crate::hierarchy::Hierarchy;

/// Default oversize slack.
pub const DEFAULT_DELTA: f64 = 0.25;

/// Where a group's samples came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSource {
    /// A whole cluster of the given level.
    Cluster { level: usize, cluster: usize },
    /// A contiguous piece of a level-1 cluster that was still too large.
    Run { cluster: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub id: usize,
    pub source: GroupSource,
    /// First position in the organized order.
    pub start: usize,
    pub len: usize,
}

impl Group {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub p: usize,
    pub n: usize,
    pub delta: f64,
    /// Groups ordered by `start`; `groups[i].id == i`.
    pub groups: Vec<Group>,
    /// Owning process of each group.
    pub process_of: Vec<usize>,
    /// Group ids per process, largest first in packing order.
    pub processes: Vec<Vec<usize>>,
    pub loads: Vec<usize>,
}

impl PartitionPlan {
    pub fn n_p(&self) -> f64 {
        self.n as f64 / self.p as f64
    }

    pub fn max_load(&self) -> usize {
        self.loads.iter().copied().max().unwrap_or(0)
    }

    /// Load ceiling `(1 + delta) * ceil(n / p)`.
    pub fn load_bound(&self) -> f64 {
        load_bound(self.n, self.p, self.delta)
    }
}

pub fn load_bound(n: usize, p: usize, delta: f64) -> f64 {
    (1.0 + delta) * (n as f64 / p as f64).ceil()
}

fn chop(cluster: usize, start: usize, len: usize, piece: usize, out: &mut Vec<Group>) {
    let piece = piece.max(1);
    let mut s = start;
    while s < start + len {
        let l = piece.min(start + len - s);
        out.push(Group {
            id: 0,
            source: GroupSource::Run { cluster },
            start: s,
            len: l,
        });
        s += l;
    }
}

fn split_into(
    h: &Hierarchy,
    level: usize,
    cluster: usize,
    threshold: f64,
    piece: usize,
    out: &mut Vec<Group>,
) {
    let (start, len) = h.level(level).ranges[cluster];
    if len as f64 <= threshold {
        out.push(Group {
            id: 0,
            source: GroupSource::Cluster { level, cluster },
            start,
            len,
        });
    } else if level == 1 {
        chop(cluster, start, len, piece, out);
    } else {
        for &child in &h.level(level).children[cluster] {
            split_into(h, level - 1, child, threshold, piece, out);
        }
    }
}

fn renumber(groups: &mut [Group]) {
    groups.sort_by_key(|g| g.start);
    for (i, g) in groups.iter_mut().enumerate() {
        g.id = i;
    }
}

/// Replaces a cluster larger than `(1 + delta) * n_p` by its children,
/// recursively. Level-1 clusters that are still too large are cut into
/// contiguous runs of `ceil(n_p)` samples. Output is ordered by position.
pub fn split_backtrack(
    h: &Hierarchy,
    level: usize,
    cluster: usize,
    n_p: f64,
    delta: f64,
) -> Vec<Group> {
    let mut out = Vec::new();
    split_into(
        h,
        level,
        cluster,
        (1.0 + delta) * n_p,
        n_p.ceil() as usize,
        &mut out,
    );
    renumber(&mut out);
    out
}

/// Packs groups onto `p` processes, largest group first onto the currently
/// lightest process (lowest index on ties).
pub fn merge_pack(groups: &[Group], p: usize, delta: f64) -> Result<PartitionPlan> {
    if p == 0 {
        return Err(BfcError::InvalidArgument("p must be >= 1".into()));
    }
    if p > groups.len() {
        return Err(BfcError::InfeasiblePartition(format!(
            "{p} processes but only {} groups; lower p or raise delta",
            groups.len()
        )));
    }
    let mut groups = groups.to_vec();
    renumber(&mut groups);
    let n = groups.iter().map(|g| g.len).sum();

    let mut by_size: Vec<usize> = (0..groups.len()).collect();
    by_size.sort_by(|&a, &b| groups[b].len.cmp(&groups[a].len).then(a.cmp(&b)));

    let mut loads = vec![0usize; p];
    let mut processes = vec![Vec::new(); p];
    let mut process_of = vec![0usize; groups.len()];
    for g in by_size {
        let mut target = 0;
        for q in 1..p {
            if loads[q] < loads[target] {
                target = q;
            }
        }
        loads[target] += groups[g].len;
        processes[target].push(g);
        process_of[g] = target;
    }
    Ok(PartitionPlan {
        p,
        n,
        delta,
        groups,
        process_of,
        processes,
        loads,
    })
}

/// Splits one group a level further: a cluster into its children, a level-1
/// cluster or run into two halves. `None` for single samples.
fn refine(h: &Hierarchy, g: &Group) -> Option<Vec<Group>> {
    if g.len < 2 {
        return None;
    }
    let halves = |cluster| {
        let a = g.len / 2;
        vec![
            Group {
                id: 0,
                source: GroupSource::Run { cluster },
                start: g.start,
                len: g.len - a,
            },
            Group {
                id: 0,
                source: GroupSource::Run { cluster },
                start: g.start + g.len - a,
                len: a,
            },
        ]
    };
    Some(match g.source {
        GroupSource::Cluster { level, cluster } if level >= 2 => h.level(level).children[cluster]
            .iter()
            .map(|&c| {
                let (start, len) = h.level(level - 1).ranges[c];
                Group {
                    id: 0,
                    source: GroupSource::Cluster {
                        level: level - 1,
                        cluster: c,
                    },
                    start,
                    len,
                }
            })
            .collect(),
        GroupSource::Cluster { cluster, .. } | GroupSource::Run { cluster } => halves(cluster),
    })
}

/// SPLIT every oversized cluster of `level`, then MERGE-pack onto `p`
/// processes. If packing leaves a process above `(1 + delta) * ceil(n / p)`
/// or there are fewer groups than processes, the largest offending group is
/// split one step further and packing is repeated.
///
/// Every split threshold reachable with a slack in `[0, delta]` is tried and
/// the plan with the smallest maximum load is kept (the coarsest one on
/// ties), so raising `delta` never raises the maximum load.
pub fn plan_partition_at(
    h: &Hierarchy,
    level: usize,
    p: usize,
    delta: f64,
) -> Result<PartitionPlan> {
    let n = h.n;
    if p == 0 || p > n {
        return Err(BfcError::InvalidArgument(format!(
            "p must be in 1..={n}, got {p}"
        )));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(BfcError::InvalidArgument(format!(
            "delta must be >= 0, got {delta}"
        )));
    }
    if level == 0 || level > h.num_levels() {
        return Err(BfcError::InvalidArgument(format!("no level {level}")));
    }
    let n_p = n as f64 / p as f64;

    // Cluster sizes between n_p and (1 + delta) * n_p are the only places
    // where the set of split clusters changes.
    let mut sizes: Vec<usize> = h.levels[..level]
        .iter()
        .flat_map(|l| l.counts.iter().copied())
        .filter(|&s| s as f64 > n_p && s as f64 <= (1.0 + delta) * n_p)
        .collect();
    sizes.sort_unstable();
    sizes.dedup();

    let mut best: Option<PartitionPlan> = None;
    let candidates = sizes
        .iter()
        .rev()
        .map(|&s| (s as f64, s as f64 / n_p - 1.0))
        .chain(std::iter::once((n_p, 0.0)));
    for (threshold, slack) in candidates {
        let bound = load_bound(n, p, slack) * (1.0 + 1e-12);
        let plan = refine_and_pack(h, level, p, delta, threshold, bound)?;
        if best.as_ref().is_none_or(|b| plan.max_load() < b.max_load()) {
            best = Some(plan);
        }
    }
    Ok(best.expect("at least one candidate threshold"))
}

/// Packs the groups left by `threshold` and keeps refining until the
/// maximum load is within `bound`. Returns the best plan seen on the way.
fn refine_and_pack(
    h: &Hierarchy,
    level: usize,
    p: usize,
    delta: f64,
    threshold: f64,
    bound: f64,
) -> Result<PartitionPlan> {
    let piece = (h.n as f64 / p as f64).ceil() as usize;
    let mut groups = Vec::new();
    for c in 0..h.level(level).num_clusters() {
        split_into(h, level, c, threshold, piece, &mut groups);
    }
    renumber(&mut groups);

    let mut best: Option<PartitionPlan> = None;
    loop {
        let victim = if groups.len() < p {
            largest_splittable(&groups, 0..groups.len())
        } else {
            let plan = merge_pack(&groups, p, delta)?;
            let done = plan.max_load() as f64 <= bound;
            let worst = (0..p)
                .max_by(|&a, &b| plan.loads[a].cmp(&plan.loads[b]).then(b.cmp(&a)))
                .unwrap();
            let victim = largest_splittable(&groups, plan.processes[worst].iter().copied());
            if best.as_ref().is_none_or(|b| plan.max_load() < b.max_load()) {
                best = Some(plan);
            }
            // stop once within bound, or when the heaviest process holds
            // only single samples
            if done || victim.is_none() {
                return Ok(best.unwrap());
            }
            victim
        };
        let Some(victim) = victim else {
            return Err(BfcError::InfeasiblePartition(format!(
                "{p} processes but only {} groups of single samples",
                groups.len()
            )));
        };
        let pieces = refine(h, &groups[victim]).expect("victim has at least two samples");
        groups.swap_remove(victim);
        groups.extend(pieces);
        renumber(&mut groups);
    }
}

fn largest_splittable(groups: &[Group], candidates: impl Iterator<Item = usize>) -> Option<usize> {
    candidates
        .filter(|&g| groups[g].len >= 2)
        .max_by(|&a, &b| groups[a].len.cmp(&groups[b].len).then(b.cmp(&a)))
}

/// [`plan_partition_at`] on the hierarchy's optimal level.
pub fn plan_partition(h: &Hierarchy, p: usize, delta: f64) -> Result<PartitionPlan> {
    plan_partition_at(h, h.optimal_level, p, delta)
}
