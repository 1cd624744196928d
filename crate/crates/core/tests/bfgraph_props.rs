mod common;

use bfc_core::bfgraph::forest_as_undirected;
use bfc_core::{
    build_best_friend_graph, build_best_friend_graph_with, find_components, DataMatrix, WorkerPool,
};
use common::*;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn matches_exhaustive_nearest_neighbour_scan() {
    let mut r = rng(11);
    for _ in 0..200 {
        let n = r.random_range(2..80);
        let d = r.random_range(1..10);
        let x = mixed_points(&mut r, n, d);
        let g = build_best_friend_graph(&x, 1).unwrap();
        for i in 0..n {
            let (t, w) = brute_nearest(&x, i);
            assert_eq!(g.target(i), t, "vertex {i}");
            assert!((g.weight(i) - w).abs() <= 1e-12 * (1.0 + w));
        }
    }
}

#[test]
fn larger_than_one_block() {
    let mut r = rng(12);
    let x = uniform_points(&mut r, 700, 3);
    let g = build_best_friend_graph(&x, 1).unwrap();
    for i in (0..700).step_by(7) {
        assert_eq!(g.target(i), brute_nearest(&x, i).0);
    }
}

#[test]
fn forest_trees_are_minimum_spanning_trees() {
    let mut r = rng(13);
    for _ in 0..150 {
        let n = r.random_range(4..60);
        let d = if r.random::<bool>() { 2 } else { 8 };
        let x = uniform_points(&mut r, n, d);
        let g = build_best_friend_graph(&x, 1).unwrap();
        let comps = find_components(&g);
        let forest = forest_as_undirected(&g, &comps);
        for (c, edges) in comps.iter().zip(&forest) {
            assert_eq!(edges.len(), c.members.len() - 1);
            let total: f64 = edges.iter().map(|e| e.2).sum();
            let mst = kruskal_weight(&x, &c.members);
            assert!((total - mst).abs() <= 1e-9, "{total} vs {mst}");
            assert!((c.weight_sum - mst).abs() <= 1e-9);
        }
    }
}

#[test]
fn components_match_union_find_over_edges() {
    let mut r = rng(14);
    for _ in 0..200 {
        let n = r.random_range(2..120);
        let x = mixed_points(&mut r, n, 2);
        let g = build_best_friend_graph(&x, 1).unwrap();
        let oracle = functional_graph_components(g.targets());
        let got: Vec<Vec<usize>> = find_components(&g).into_iter().map(|c| c.members).collect();
        assert_eq!(got, oracle);
    }
}

#[test]
fn duplicate_points_pair_up_at_zero_distance() {
    let x = DataMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [5.0, 5.0]]).unwrap();
    let g = build_best_friend_graph(&x, 1).unwrap();
    assert_eq!(g.targets(), &[1, 0, 0, 0]);
    assert_eq!(&g.weights()[..3], &[0.0, 0.0, 0.0]);
    let comps = find_components(&g);
    assert_eq!(comps.len(), 1);
    assert_eq!(comps[0].cycle_pair, (0, 1));
}

#[test]
fn worker_count_does_not_change_bytes() {
    let mut r = rng(15);
    let pools: Vec<WorkerPool> = [1, 2, 3, 8]
        .iter()
        .map(|&w| WorkerPool::new(w).unwrap())
        .collect();
    for _ in 0..20 {
        let n = r.random_range(2..400);
        let x = mixed_points(&mut r, n, 4);
        let base = build_best_friend_graph_with(&x, &pools[0])
            .unwrap()
            .to_bytes();
        for pool in &pools[1..] {
            assert_eq!(
                build_best_friend_graph_with(&x, pool).unwrap().to_bytes(),
                base
            );
        }
        let a = find_components(&build_best_friend_graph(&x, 1).unwrap());
        let b = bfc_core::bfgraph::find_components_with(
            &build_best_friend_graph(&x, 1).unwrap(),
            &pools[3],
        );
        assert_eq!(a, b);
    }
}

fn points_strategy() -> impl Strategy<Value = DataMatrix> {
    (2usize..64, 1usize..6).prop_flat_map(|(n, d)| {
        prop::collection::vec(
            prop_oneof![(-50i32..50).prop_map(|v| v as f64 / 4.0), -10.0..10.0f64],
            n * d,
        )
        .prop_map(move |v| DataMatrix::new(n, d, v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn structural_invariants(x in points_strategy()) {
        let g = build_best_friend_graph(&x, 1).unwrap();
        let n = g.len();
        prop_assert_eq!(g.edges().len(), n);
        let comps = find_components(&g);
        let label = bfc_core::component_labels(&comps, n);
        for c in &comps {
            let mutual: Vec<usize> = c.members.iter().copied().filter(|&v| g.is_mutual(v)).collect();
            prop_assert_eq!(mutual.len(), 2);
            let (a, b) = c.cycle_pair;
            prop_assert_eq!(g.weight(a), g.weight(b));
        }
        for start in 0..n {
            let mut v = start;
            let mut hops = 0;
            while !g.is_mutual(v) {
                let w = g.weight(v);
                v = g.target(v);
                prop_assert!(g.weight(v) <= w);
                prop_assert_eq!(label[v], label[start]);
                hops += 1;
                prop_assert!(hops <= n);
            }
        }
    }

    #[test]
    fn compactness_is_mean_tree_edge(x in points_strategy()) {
        let g = build_best_friend_graph(&x, 1).unwrap();
        for c in find_components(&g) {
            let k = c.members.len();
            prop_assert!(k >= 2);
            prop_assert_eq!(c.edge_count, k - 1);
            prop_assert!((c.compactness * (k - 1) as f64 - c.weight_sum).abs() <= 1e-9 * (1.0 + c.weight_sum));
        }
    }
}
