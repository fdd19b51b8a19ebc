//! Comparison strategies: High-Degree, High-ACC (sampled adaptive coverage)
//! and Random.
//!
//! High-Degree and High-ACC rank non-target nodes, then connect them to the
//! target set round-robin over `X` in id order, using only edges present in
//! the candidate list.

use std::collections::HashSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::coverage::{PairUniverse, SampledPair};
use crate::error::{Error, Result};
use crate::graph::{dist_add, Edge, NodeId, UNREACHABLE};
use crate::par;
use crate::problem::{
    exact_after, GainKind, IterationRecord, ProblemInstance, SampleSummary, SelectionReport, Timings,
};
use crate::rng::{self, tag};

/// Walks `ranked` nodes and pairs each with the next target (cycling) such
/// that the edge is a candidate not already selected. Returns edges with the
/// rank score of the node they came from.
fn pair_round_robin(p: &ProblemInstance, ranked: &[(NodeId, i64)]) -> Vec<(Edge, i64)> {
    let directed = p.graph.is_directed();
    let allowed: HashSet<Edge> = p.candidates.iter().map(|e| e.normalized(directed)).collect();
    let targets = p.targets.nodes();
    let mut cursor = 0usize;
    let mut used = HashSet::new();
    let mut out = Vec::new();
    for &(v, score) in ranked {
        if out.len() == p.budget {
            break;
        }
        for step in 0..targets.len() {
            let x = targets[(cursor + step) % targets.len()];
            let options: &[Edge] = if directed {
                &[Edge(x, v), Edge(v, x)]
            } else {
                &[Edge(x, v)]
            };
            let pick = options
                .iter()
                .map(|e| e.normalized(directed))
                .find(|e| allowed.contains(e) && !used.contains(e));
            if let Some(e) = pick {
                used.insert(e);
                out.push((e, score));
                cursor = (cursor + step + 1) % targets.len();
                break;
            }
        }
    }
    out
}

fn finish(
    p: &ProblemInstance,
    name: &str,
    picks: Vec<(Edge, i64)>,
    kind: GainKind,
    mut timings: Timings,
    samples: Option<SampleSummary>,
    seed: Option<u64>,
) -> Result<SelectionReport> {
    if picks.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut warnings = Vec::new();
    if picks.len() < p.budget {
        warnings.push(format!("only {} feasible edges for budget {}", picks.len(), p.budget));
    }
    let t0 = Instant::now();
    let before = p.coverage(&p.graph);
    let selected: Vec<Edge> = picks.iter().map(|x| x.0).collect();
    let after = exact_after(p, &selected)?;
    timings.record("exact", t0);
    let iterations = picks
        .into_iter()
        .enumerate()
        .map(|(i, (edge, score))| IterationRecord {
            step: i + 1,
            edge,
            score,
            kind,
            estimate: None,
        })
        .collect();
    Ok(SelectionReport {
        algorithm: name.into(),
        selected,
        iterations,
        coverage_before: (&before).into(),
        coverage_after: (&after).into(),
        samples,
        seed,
        warnings,
        timings,
    })
}

/// Connect `X` to the highest-degree nodes (ties to the lower id).
pub fn high_degree(p: &ProblemInstance) -> Result<SelectionReport> {
    p.validate()?;
    let t0 = Instant::now();
    let g = &p.graph;
    let mut ranked: Vec<(NodeId, i64)> = (0..g.node_count())
        .filter(|&v| !p.targets.contains(v))
        .map(|v| (v, g.degree(v) as i64))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let picks = pair_round_robin(p, &ranked);
    let mut timings = Timings::default();
    timings.record("rank", t0);
    finish(p, "high-degree", picks, GainKind::Degree, timings, None, None)
}

/// Connect `X` to nodes chosen by greedy adaptive coverage over `q` pairs
/// sampled uniformly from all of `Z`. Pairs already covered by `X` start
/// covered; each pick only counts pairs no earlier pick covers.
pub fn high_acc(p: &ProblemInstance, q: usize, seed: u64) -> Result<SelectionReport> {
    p.validate()?;
    if q == 0 {
        return Err(Error::Config("High-ACC needs at least one sampled pair".into()));
    }
    let g = &p.graph;
    let directed = g.is_directed();
    let t0 = Instant::now();
    let outside = p.targets.outside();
    if p.pairs.size(g, &p.targets) == 0 {
        return Err(Error::Sampling("pair universe is empty".into()));
    }
    let pairs: Vec<SampledPair> = par::map_range(q, |i| {
        let mut rng = rng::stream(seed, tag::ACC_SAMPLE, i as u64);
        let (s, t) = match &p.pairs {
            PairUniverse::AllPairs => {
                let a = rng.gen_range(0..outside.len());
                let mut b = rng.gen_range(0..outside.len() - 1);
                if b >= a {
                    b += 1;
                }
                (outside[a], outside[b])
            }
            PairUniverse::Explicit(list) => list[rng.gen_range(0..list.len())],
        };
        let mut queue = Vec::new();
        let mut pair = SampledPair {
            s,
            t,
            from_s: Vec::new(),
            to_t: Vec::new(),
        };
        pair.refresh(g, &mut queue);
        pair
    });

    let on_path = |pair: &SampledPair, v: NodeId| {
        let d = pair.distance();
        v != pair.s && v != pair.t && d != UNREACHABLE && dist_add(pair.from_s[v], pair.to_t[v]) == d
    };
    let mut covered: Vec<bool> = pairs
        .iter()
        .map(|pr| p.targets.nodes().iter().any(|&x| on_path(pr, x)))
        .collect();
    let initially = covered.iter().filter(|&&c| c).count();

    let mut chosen = vec![false; g.node_count()];
    let mut ranked = Vec::new();
    // Keep ranking until enough picks pair with a feasible edge.
    while ranked.len() < outside.len() {
        let scores: Vec<i64> = par::map_slice(&outside, |&v| {
            if chosen[v] {
                return -1;
            }
            pairs
                .iter()
                .zip(&covered)
                .filter(|(pr, &c)| !c && on_path(pr, v))
                .count() as i64
        });
        let best = par::argmax_first(&scores).expect("non-empty");
        let v = outside[best];
        chosen[v] = true;
        for (pr, c) in pairs.iter().zip(covered.iter_mut()) {
            if !*c && on_path(pr, v) {
                *c = true;
            }
        }
        ranked.push((v, scores[best]));
        if pair_round_robin(p, &ranked).len() >= p.budget {
            break;
        }
    }
    let picks = pair_round_robin(p, &ranked);
    let mut timings = Timings::default();
    timings.record("rank", t0);
    let m_u = (q - initially) as u64;
    let summary = SampleSummary {
        q,
        source: "uniform-over-universe".into(),
        draws: q as u64,
        covered_at_end: covered.iter().filter(|&&c| c).count(),
        m_u,
        m_u_ordered: if directed { m_u } else { 2 * m_u },
        m_u_source: "sampled-uncovered".into(),
        m_u_estimate: None,
    };
    finish(
        p,
        "high-acc",
        picks,
        GainKind::AdaptiveCoverage,
        timings,
        Some(summary),
        Some(seed),
    )
}

/// `k` distinct candidates uniformly at random.
pub fn random_edges(p: &ProblemInstance, seed: u64) -> Result<SelectionReport> {
    p.validate()?;
    let t0 = Instant::now();
    let mut rng = rng::stream(seed, tag::RANDOM_EDGES, 0);
    let picks: Vec<(Edge, i64)> = p
        .candidates
        .choose_multiple(&mut rng, p.budget)
        .map(|&e| (e, 0))
        .collect();
    let mut timings = Timings::default();
    timings.record("draw", t0);
    finish(p, "random", picks, GainKind::None, timings, None, Some(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::TargetSet;
    use crate::graph::Graph;
    use crate::problem::{build_candidates, Setting};

    fn instance(g: Graph, x: &[NodeId], k: usize) -> ProblemInstance {
        ProblemInstance::auto(g, x, Setting::incident(false), k).unwrap()
    }

    #[test]
    fn high_degree_connects_to_hub() {
        // star center 0 with leaves 1..5, pendant path 5-6-7, X = {7}
        let mut edges: Vec<Edge> = (1..=5).map(|i| Edge(0, i)).collect();
        edges.extend([Edge(5, 6), Edge(6, 7)]);
        let g = Graph::from_edges(8, false, &edges).unwrap();
        let r = high_degree(&instance(g, &[7], 2)).unwrap();
        assert_eq!(r.selected[0], Edge(0, 7));
        assert_eq!(r.iterations[0].score, 5);
    }

    #[test]
    fn round_robin_over_targets() {
        let edges: Vec<Edge> = (0..7).map(|i| Edge(i, i + 1)).collect();
        let g = Graph::from_edges(8, false, &edges).unwrap();
        let r = high_degree(&instance(g, &[0, 7], 4)).unwrap();
        // ranked by degree: 1..6 (deg 2); alternating targets 0, 7 skipping present edges
        assert_eq!(r.selected, vec![Edge(1, 7), Edge(0, 2), Edge(3, 7), Edge(0, 4)]);
    }

    #[test]
    fn high_acc_picks_path_middle() {
        // P5 0..4 plus isolated target 5
        let edges: Vec<Edge> = (0..4).map(|i| Edge(i, i + 1)).collect();
        let g = Graph::from_edges(6, false, &edges).unwrap();
        let r = high_acc(&instance(g, &[5], 1), 2000, 3).unwrap();
        assert_eq!(r.selected, vec![Edge(2, 5)]);
    }

    #[test]
    fn high_acc_when_everything_is_covered() {
        // star, X = center, explicit universe of covered leaf pairs
        let edges: Vec<Edge> = (1..=4).map(|i| Edge(0, i)).collect();
        let g = Graph::from_edges(6, false, &edges).unwrap();
        let x = TargetSet::new(6, &[0]).unwrap();
        let z = PairUniverse::explicit(&g, &x, &[(1, 2), (3, 4)]).unwrap();
        let p = ProblemInstance {
            candidates: build_candidates(&g, &x, Setting::S1).unwrap(),
            targets: x,
            pairs: z,
            budget: 1,
            setting: Setting::S1,
            enforce_s2: false,
            graph: g,
        };
        let r = high_acc(&p, 50, 1).unwrap();
        assert_eq!(r.iterations[0].score, 0);
        assert_eq!(r.selected, vec![Edge(0, 5)]);
    }

    #[test]
    fn random_is_seeded_and_distinct() {
        let edges: Vec<Edge> = (0..9).map(|i| Edge(i, i + 1)).collect();
        let g = Graph::from_edges(10, false, &edges).unwrap();
        let p = instance(g, &[0], 4);
        let a = random_edges(&p, 5).unwrap();
        let b = random_edges(&p, 5).unwrap();
        assert_eq!(a.selected, b.selected);
        let set: HashSet<_> = a.selected.iter().collect();
        assert_eq!(set.len(), 4);
        let all = random_edges(&instance(p.graph.clone(), &[0], p.candidates.len()), 1).unwrap();
        let mut got = all.selected.clone();
        got.sort();
        assert_eq!(got, p.candidates);
    }

    #[test]
    fn random_single_candidate() {
        let g = Graph::from_edges(3, false, &[Edge(0, 1), Edge(1, 2)]).unwrap();
        let r = random_edges(&instance(g, &[0], 1), 0).unwrap();
        assert_eq!(r.selected, vec![Edge(0, 2)]);
    }

    #[test]
    fn single_target_pairs_trivially() {
        let edges: Vec<Edge> = (0..5).map(|i| Edge(i, i + 1)).collect();
        let g = Graph::from_edges(6, false, &edges).unwrap();
        let r = high_degree(&instance(g, &[3], 2)).unwrap();
        assert!(r.selected.iter().all(|e| e.touches(3)));
    }
}
