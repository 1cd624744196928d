mod common;

use bfc_core::{
    build_hierarchy, merge_pack, plan_partition, split_backtrack, DataMatrix, Group, GroupSource,
    Hierarchy, PartitionPlan, WorkerPool,
};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn build(x: &DataMatrix) -> Hierarchy {
    build_hierarchy(x, &WorkerPool::single()).unwrap()
}

/// Coverage, disjointness, contiguity and bookkeeping of a plan.
fn check_plan(h: &Hierarchy, plan: &PartitionPlan) -> Result<(), String> {
    let n = h.n;
    if plan.loads.iter().sum::<usize>() != n {
        return Err("loads do not sum to n".into());
    }
    let mut covered = vec![false; n];
    for (i, g) in plan.groups.iter().enumerate() {
        if g.id != i || g.len == 0 {
            return Err(format!("bad group {i}"));
        }
        for pos in g.range() {
            if pos >= n || covered[pos] {
                return Err(format!("position {pos} covered twice or out of range"));
            }
            covered[pos] = true;
        }
        // a group never mixes samples from different source clusters
        let (level, cluster) = match g.source {
            GroupSource::Cluster { level, cluster } => (level, cluster),
            GroupSource::Run { cluster } => (1, cluster),
        };
        let a = &h.level(level).assignment;
        if g.range().any(|pos| a[h.order[pos]] != cluster) {
            return Err(format!("group {i} leaves its source cluster"));
        }
    }
    if covered.iter().any(|c| !c) {
        return Err("not every position is covered".into());
    }
    let mut loads = vec![0usize; plan.p];
    for (q, ids) in plan.processes.iter().enumerate() {
        for &g in ids {
            if plan.process_of[g] != q {
                return Err(format!("group {g} owner mismatch"));
            }
            loads[q] += plan.groups[g].len;
        }
    }
    if loads != plan.loads {
        return Err("loads inconsistent with process lists".into());
    }
    if plan.processes.iter().map(|p| p.len()).sum::<usize>() != plan.groups.len() {
        return Err("a group is on zero or several processes".into());
    }
    Ok(())
}

#[test]
fn random_hierarchies_meet_the_load_bound() {
    let mut r = rng(31);
    for _ in 0..60 {
        let n = r.random_range(8..600);
        let d = r.random_range(1..5);
        let x = mixed_points(&mut r, n, d);
        let h = build(&x);
        for _ in 0..4 {
            let p = r.random_range(1..=n.min(64));
            let delta = [0.0, 0.1, 0.25, 0.5, 1.0][r.random_range(0..5)];
            let plan = plan_partition(&h, p, delta).unwrap();
            check_plan(&h, &plan).unwrap();
            assert!(plan.groups.len() >= p);
            assert!(
                plan.max_load() as f64 <= plan.load_bound() + 1e-9,
                "n={n} p={p} delta={delta} loads={:?}",
                plan.loads
            );
        }
    }
}

#[test]
fn plans_are_deterministic() {
    let mut r = rng(32);
    let x = uniform_points(&mut r, 400, 2);
    let h = build(&x);
    for p in [1, 3, 7, 16] {
        assert_eq!(
            plan_partition(&h, p, 0.25).unwrap(),
            plan_partition(&h, p, 0.25).unwrap()
        );
    }
}

#[test]
fn split_output_respects_threshold() {
    let mut r = rng(33);
    for _ in 0..50 {
        let n = r.random_range(16..400);
        let x = uniform_points(&mut r, n, 2);
        let h = build(&x);
        let k = h.num_levels();
        let n_p = n as f64 / r.random_range(2..12) as f64;
        for level in 1..=k {
            for c in 0..h.level(level).num_clusters() {
                let out = split_backtrack(&h, level, c, n_p, 0.25);
                let (start, len) = h.level(level).ranges[c];
                assert_eq!(out.first().unwrap().start, start);
                assert_eq!(out.iter().map(|g| g.len).sum::<usize>(), len);
                for w in out.windows(2) {
                    assert_eq!(w[0].start + w[0].len, w[1].start);
                }
                for g in &out {
                    assert!(g.len as f64 <= 1.25 * n_p || g.len <= n_p.ceil() as usize);
                }
            }
        }
    }
}

fn groups_from_sizes(sizes: &[usize]) -> Vec<Group> {
    let mut start = 0;
    sizes
        .iter()
        .enumerate()
        .map(|(i, &len)| {
            let g = Group {
                id: i,
                source: GroupSource::Cluster {
                    level: 1,
                    cluster: i,
                },
                start,
                len,
            };
            start += len;
            g
        })
        .collect()
}

#[test]
fn packing_against_exhaustive_optimum() {
    let mut r = rng(34);
    for _ in 0..400 {
        let k = r.random_range(1..=8);
        let sizes: Vec<usize> = (0..k).map(|_| r.random_range(1..30)).collect();
        let p = r.random_range(1..=k);
        let plan = merge_pack(&groups_from_sizes(&sizes), p, 0.25).unwrap();
        let opt = optimal_makespan(&sizes, p);
        let bound = (4.0 / 3.0 - 1.0 / (3.0 * p as f64)) * opt as f64;
        assert!(
            plan.max_load() as f64 <= bound + 1e-9,
            "sizes={sizes:?} p={p} got {} opt {opt}",
            plan.max_load()
        );
        assert!(plan.max_load() >= opt);
    }
}

#[test]
fn two_small_groups_share_a_process() {
    let plan = merge_pack(&groups_from_sizes(&[3, 5, 2, 2]), 3, 0.25).unwrap();
    let mut loads = plan.loads.clone();
    loads.sort_unstable();
    assert_eq!(loads, vec![3, 4, 5]);
    assert_eq!(plan.process_of[2], plan.process_of[3]);
}

#[test]
fn larger_slack_never_raises_max_load() {
    let mut r = rng(35);
    for _ in 0..120 {
        let n = r.random_range(50..500);
        let d = r.random_range(1..4);
        let x = mixed_points(&mut r, n, d);
        let h = build(&x);
        let p = r.random_range(2..32);
        let mut prev = usize::MAX;
        for delta in [0.0, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0] {
            let plan = plan_partition(&h, p, delta).unwrap();
            assert!(plan.max_load() as f64 <= plan.load_bound() + 1e-9);
            assert!(
                plan.max_load() <= prev,
                "n={n} p={p} delta={delta}: {} > {prev}",
                plan.max_load()
            );
            prev = plan.max_load();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plan_invariants(
        pts in prop::collection::vec((-20.0..20.0f64, -20.0..20.0f64), 4..200),
        p_frac in 0.0..1.0f64,
        delta in 0.0..1.0f64,
    ) {
        let rows: Vec<[f64; 2]> = pts.iter().map(|&(a, b)| [a, b]).collect();
        let x = DataMatrix::from_rows(&rows).unwrap();
        let h = build(&x);
        let p = 1 + (p_frac * (x.rows() - 1) as f64) as usize;
        let plan = plan_partition(&h, p, delta).unwrap();
        prop_assert!(check_plan(&h, &plan).is_ok(), "{:?}", check_plan(&h, &plan));
        prop_assert!(plan.max_load() as f64 <= plan.load_bound() + 1e-9);
    }

    #[test]
    fn max_load_is_monotone_in_delta(
        pts in prop::collection::vec((-20.0..20.0f64, -20.0..20.0f64), 8..160),
        p_frac in 0.0..1.0f64,
        a in 0.0..1.5f64,
        b in 0.0..1.5f64,
    ) {
        let rows: Vec<[f64; 2]> = pts.iter().map(|&(u, v)| [u, v]).collect();
        let x = DataMatrix::from_rows(&rows).unwrap();
        let h = build(&x);
        let p = 1 + (p_frac * (x.rows() / 2) as f64) as usize;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let tight = plan_partition(&h, p, lo).unwrap();
        let loose = plan_partition(&h, p, hi).unwrap();
        prop_assert!(loose.max_load() <= tight.max_load());
    }
}
