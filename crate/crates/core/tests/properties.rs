use std::path::Path;

use proptest::prelude::*;

use centrex::coverage::{group_coverage, sample_uncovered_pairs, PairUniverse, SamplingConfig, TargetSet};
use centrex::generators::erdos_renyi;
use centrex::ges::run_ges;
use centrex::graph::{bfs, dist_add, DistanceMatrix, Edge, Graph, UNREACHABLE};
use centrex::oracle::dag_coverage;
use centrex::problem::{build_candidates, Setting};
use centrex::rng;

fn graph_strategy(directed: bool) -> impl Strategy<Value = Graph> {
    (3usize..=12).prop_flat_map(move |n| {
        let slots = n * n;
        prop::collection::vec(prop::bool::weighted(0.25), slots).prop_map(move |bits| {
            let edges: Vec<Edge> = (0..n)
                .flat_map(|u| (0..n).map(move |v| (u, v)))
                .filter(|&(u, v)| u != v && (directed || u < v) && bits[u * n + v])
                .map(|(u, v)| Edge(u, v))
                .collect();
            Graph::from_edges(n, directed, &edges).unwrap()
        })
    })
}

fn targets_for(g: &Graph, picks: &[usize]) -> TargetSet {
    let n = g.node_count();
    let mut nodes: Vec<usize> = picks.iter().map(|p| p % n).collect();
    nodes.sort_unstable();
    nodes.dedup();
    nodes.truncate(n - 2);
    TargetSet::new(n, &nodes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn bfs_triangle_inequality(g in graph_strategy(true)) {
        let d = DistanceMatrix::compute(&g);
        let n = g.node_count();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    prop_assert!(d.get(a, c) <= dist_add(d.get(a, b), d.get(b, c)));
                }
            }
        }
    }

    #[test]
    fn undirected_distances_are_symmetric(g in graph_strategy(false)) {
        let n = g.node_count();
        for s in 0..n {
            let f = bfs(&g, s, false);
            for t in 0..n {
                prop_assert_eq!(f.get(t), bfs(&g, t, false).get(s));
            }
        }
    }

    #[test]
    fn reversed_bfs_gives_distance_to_source(g in graph_strategy(true)) {
        let d = DistanceMatrix::compute(&g);
        for t in 0..g.node_count() {
            let back = bfs(&g, t, true);
            for v in 0..g.node_count() {
                prop_assert_eq!(back.get(v), d.get(v, t));
            }
        }
    }

    #[test]
    fn adding_edges_never_lengthens_paths(g in graph_strategy(false), u in 0usize..12, v in 0usize..12) {
        let n = g.node_count();
        let (u, v) = (u % n, v % n);
        prop_assume!(u != v && !g.has_edge(u, v));
        let before = DistanceMatrix::compute(&g);
        let after = DistanceMatrix::compute(&g.with_edges(&[Edge(u, v)]).unwrap());
        for s in 0..n {
            for t in 0..n {
                prop_assert!(after.get(s, t) <= before.get(s, t));
            }
        }
        prop_assert_eq!(after.get(u, v), 1);
    }

    #[test]
    fn s1_candidate_count(g in graph_strategy(false), picks in prop::collection::vec(0usize..12, 1..4)) {
        let x = targets_for(&g, &picks);
        let outside = x.outside();
        let present = g.edges().iter().filter(|e| x.contains(e.0) != x.contains(e.1)).count();
        let expected = x.len() * outside.len() - present;
        let c = match build_candidates(&g, &x, Setting::S1) {
            Ok(c) => c,
            Err(_) => {
                prop_assert_eq!(expected, 0);
                return Ok(());
            }
        };
        prop_assert_eq!(c.len(), expected);
        for e in &c {
            prop_assert!(x.contains(e.0) != x.contains(e.1));
            prop_assert!(!g.has_edge(e.0, e.1));
        }
    }

    #[test]
    fn dag_oracle_matches_coverage(directed in any::<bool>(), seed in any::<u64>(), picks in prop::collection::vec(0usize..12, 1..4)) {
        let g = erdos_renyi(10, 0.25, directed, &mut rng::stream(seed, rng::tag::GRAPH, 0));
        let x = targets_for(&g, &picks);
        let exact = group_coverage(&g, &x, &PairUniverse::AllPairs);
        prop_assert_eq!(dag_coverage(&g, &x, &PairUniverse::AllPairs).unwrap(), exact.covered);
    }

    #[test]
    fn s1_edges_never_reduce_coverage(g in graph_strategy(false), picks in prop::collection::vec(0usize..12, 1..3), which in any::<prop::sample::Index>()) {
        let x = targets_for(&g, &picks);
        let c = build_candidates(&g, &x, Setting::S1);
        prop_assume!(c.is_ok());
        let c = c.unwrap();
        let e = c[which.index(c.len())];
        let before = group_coverage(&g, &x, &PairUniverse::AllPairs).covered;
        let after = group_coverage(&g.with_edges(&[e]).unwrap(), &x, &PairUniverse::AllPairs).covered;
        prop_assert!(after >= before);
    }
}

#[test]
fn unreachable_sentinel_saturates() {
    assert_eq!(dist_add(UNREACHABLE, 1), UNREACHABLE);
    assert_eq!(dist_add(2, 3), 5);
}

#[test]
fn rejection_sampling_is_uniform() {
    // node 5 is isolated, so every pair among 0..5 is uncovered by X = {5}
    let g = Graph::from_edges(6, false, &[Edge(0, 1), Edge(1, 2), Edge(2, 3), Edge(3, 4), Edge(0, 4)]).unwrap();
    let x = TargetSet::new(6, &[5]).unwrap();
    let q = 10_000;
    let cfg = SamplingConfig {
        materialize_limit: 0,
        ..SamplingConfig::default()
    };
    let s = sample_uncovered_pairs(&g, &x, &PairUniverse::AllPairs, q, 99, &cfg).unwrap();
    let mut counts = std::collections::BTreeMap::new();
    for p in &s.pairs {
        *counts.entry((p.s, p.t)).or_insert(0u32) += 1;
    }
    assert_eq!(counts.len(), 10);
    let expected = q as f64 / 10.0;
    let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 9 degrees of freedom, p = 0.001
    assert!(chi2 < 27.88, "chi2 = {chi2}");
}

#[test]
fn walkthrough_trace() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/walkthrough.txt");
    let p = centrex::instance::load_instance(&path).unwrap();
    let r = run_ges(&p).unwrap();
    let picks: Vec<(String, String)> = r.selected.iter().map(|&e| p.edge_label(e)).collect();
    assert_eq!(picks, [("d".into(), "a".into()), ("f".into(), "b".into())]);
    let scores: Vec<i64> = r.iterations.iter().map(|it| it.score).collect();
    assert_eq!(scores, [3, 1]);
    assert_eq!(r.gain(), 4);
}
