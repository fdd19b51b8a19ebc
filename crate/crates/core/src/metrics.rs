//! Side metrics: average distance, group closeness of `X`, and
//! independent-cascade influence of `X`.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coverage::TargetSet;
use crate::graph::{bfs, Graph, UNREACHABLE};
use crate::par;
use crate::rng::{self, tag};

/// Which pairs enter the average distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairSampling {
    Exhaustive,
    /// Uniform ordered pairs `s != t`, with replacement.
    Sampled(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceStats {
    pub mean: f64,
    pub reachable_pairs: u64,
    pub unreachable_pairs: u64,
}

/// Mean hop distance over reachable pairs; unreachable pairs are counted
/// separately and left out of the mean.
pub fn avg_distance(g: &Graph, pairs: PairSampling, seed: u64) -> DistanceStats {
    let n = g.node_count();
    // per item: (distance sum, reachable, unreachable)
    let parts: Vec<(u64, u64, u64)> = match pairs {
        PairSampling::Exhaustive => par::map_range(n, |s| {
            let d = bfs(g, s, false).dist;
            let mut acc = (0u64, 0u64, 0u64);
            for (t, &dt) in d.iter().enumerate() {
                if t == s || (!g.is_directed() && t < s) {
                    continue;
                }
                if dt == UNREACHABLE {
                    acc.2 += 1;
                } else {
                    acc.0 += dt as u64;
                    acc.1 += 1;
                }
            }
            acc
        }),
        PairSampling::Sampled(q) => par::map_range(q, |i| {
            if n < 2 {
                return (0, 0, 0);
            }
            let mut rng = rng::stream(seed, tag::METRICS, i as u64);
            let s = rng.gen_range(0..n);
            let mut t = rng.gen_range(0..n - 1);
            if t >= s {
                t += 1;
            }
            let d = bfs(g, s, false).get(t);
            if d == UNREACHABLE {
                (0, 0, 1)
            } else {
                (d as u64, 1, 0)
            }
        }),
    };
    let (sum, reach, unreach) = parts
        .into_iter()
        .fold((0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    DistanceStats {
        mean: if reach == 0 { 0.0 } else { sum as f64 / reach as f64 },
        reachable_pairs: reach,
        unreachable_pairs: unreach,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosenessStats {
    pub value: f64,
    pub unreachable: u64,
}

/// Group closeness `r / Σ d(X, v)` over the `r` nodes of `V \ X` reachable
/// from `X`, where `d(X, v)` is the distance from the nearest target.
pub fn closeness(g: &Graph, x: &TargetSet) -> ClosenessStats {
    let n = g.node_count();
    let mut dist = vec![UNREACHABLE; n];
    let mut queue = VecDeque::new();
    for &v in x.nodes() {
        dist[v] = 0;
        queue.push_back(v);
    }
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            let w = w as usize;
            if dist[w] == UNREACHABLE {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    let (mut sum, mut reach, mut unreach) = (0u64, 0u64, 0u64);
    for v in (0..n).filter(|&v| !x.contains(v)) {
        if dist[v] == UNREACHABLE {
            unreach += 1;
        } else {
            sum += dist[v] as u64;
            reach += 1;
        }
    }
    ClosenessStats {
        value: if sum == 0 { 0.0 } else { reach as f64 / sum as f64 },
        unreachable: unreach,
    }
}

fn cascade<R: Rng>(g: &Graph, x: &TargetSet, p: f64, rng: &mut R) -> u64 {
    let n = g.node_count();
    let mut active = vec![false; n];
    let mut frontier: Vec<usize> = x.nodes().to_vec();
    for &v in &frontier {
        active[v] = true;
    }
    let mut count = frontier.len() as u64;
    let mut next = Vec::new();
    while !frontier.is_empty() {
        next.clear();
        for &u in &frontier {
            for &w in g.neighbors(u) {
                let w = w as usize;
                // each (u, w) edge is tried once: u is activated once
                if !active[w] && (p >= 1.0 || (p > 0.0 && rng.gen_bool(p))) {
                    active[w] = true;
                    count += 1;
                    next.push(w);
                }
            }
        }
        std::mem::swap(&mut frontier, &mut next);
    }
    count
}

/// Mean activated-set size under independent cascade seeded by `X`.
pub fn ic_influence(g: &Graph, x: &TargetSet, p: f64, trials: usize, seed: u64) -> f64 {
    let trials = trials.max(1);
    let total = par::sum_range(trials, |i| {
        let mut rng = rng::stream(seed, tag::CASCADE, i as u64);
        cascade(g, x, p, &mut rng)
    });
    total as f64 / trials as f64
}

/// Relative change in percent; positive means better. Distances improve
/// by decreasing.
pub fn improvement_pct(before: f64, after: f64, lower_is_better: bool) -> f64 {
    if before == 0.0 {
        return 0.0;
    }
    let delta = if lower_is_better {
        before - after
    } else {
        after - before
    };
    100.0 * delta / before
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub before: f64,
    pub after: f64,
    pub improvement_pct: f64,
}

impl MetricValue {
    fn new(before: f64, after: f64, lower_is_better: bool) -> Self {
        MetricValue {
            before,
            after,
            improvement_pct: improvement_pct(before, after, lower_is_better),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsBlock {
    pub avg_distance: MetricValue,
    pub closeness: MetricValue,
    pub influence: MetricValue,
    pub influence_probability: f64,
    pub influence_trials: usize,
    pub distance_pairs: String,
}

#[derive(Clone, Copy, Debug)]
pub struct MetricsConfig {
    pub distance_pairs: PairSampling,
    pub influence_probability: f64,
    pub influence_trials: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            distance_pairs: PairSampling::Sampled(1000),
            influence_probability: 0.1,
            influence_trials: 1000,
        }
    }
}

/// Before/after metrics for a selection. The same seeds are used on both
/// graphs, so sampled pairs and cascade coins line up.
pub fn compare(before: &Graph, after: &Graph, x: &TargetSet, cfg: &MetricsConfig, seed: u64) -> MetricsBlock {
    let d0 = avg_distance(before, cfg.distance_pairs, seed).mean;
    let d1 = avg_distance(after, cfg.distance_pairs, seed).mean;
    let c0 = closeness(before, x).value;
    let c1 = closeness(after, x).value;
    let p = cfg.influence_probability;
    let i0 = ic_influence(before, x, p, cfg.influence_trials, seed);
    let i1 = ic_influence(after, x, p, cfg.influence_trials, seed);
    MetricsBlock {
        avg_distance: MetricValue::new(d0, d1, true),
        closeness: MetricValue::new(c0, c1, false),
        influence: MetricValue::new(i0, i1, false),
        influence_probability: p,
        influence_trials: cfg.influence_trials,
        distance_pairs: match cfg.distance_pairs {
            PairSampling::Exhaustive => "exhaustive".into(),
            PairSampling::Sampled(q) => format!("sampled:{q}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, false, &(0..n - 1).map(|i| Edge(i, i + 1)).collect::<Vec<_>>()).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, false, &(0..n).map(|i| Edge(i, (i + 1) % n)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn avg_distance_examples() {
        let d = avg_distance(&path(3), PairSampling::Exhaustive, 0);
        assert!((d.mean - 4.0 / 3.0).abs() < 1e-12);
        let k3 = cycle(3);
        assert_eq!(avg_distance(&k3, PairSampling::Exhaustive, 0).mean, 1.0);
        // C6: distances 1 (x6), 2 (x6), 3 (x3)
        assert!((avg_distance(&cycle(6), PairSampling::Exhaustive, 0).mean - 1.8).abs() < 1e-12);
    }

    #[test]
    fn avg_distance_excludes_unreachable() {
        let g = Graph::from_edges(4, false, &[Edge(0, 1), Edge(2, 3)]).unwrap();
        let d = avg_distance(&g, PairSampling::Exhaustive, 0);
        assert_eq!((d.mean, d.reachable_pairs, d.unreachable_pairs), (1.0, 2, 4));
    }

    #[test]
    fn closeness_examples() {
        let star = Graph::from_edges(5, false, &(1..5).map(|i| Edge(0, i)).collect::<Vec<_>>()).unwrap();
        assert_eq!(closeness(&star, &TargetSet::new(5, &[0]).unwrap()).value, 1.0);
        let c = closeness(&path(3), &TargetSet::new(3, &[0]).unwrap()).value;
        assert!((c - 2.0 / 3.0).abs() < 1e-12);
        let c = closeness(&cycle(6), &TargetSet::new(6, &[0]).unwrap()).value;
        assert!((c - 5.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn influence_extremes() {
        let g = Graph::from_edges(6, false, &[Edge(0, 1), Edge(1, 2), Edge(3, 4)]).unwrap();
        let x = TargetSet::new(6, &[0]).unwrap();
        assert_eq!(ic_influence(&g, &x, 0.0, 50, 1), 1.0);
        assert_eq!(ic_influence(&g, &x, 1.0, 50, 1), 3.0);
    }

    #[test]
    fn influence_single_edge_expectation() {
        // E = 1 + p
        let g = Graph::from_edges(2, false, &[Edge(0, 1)]).unwrap();
        let x = TargetSet::new(2, &[0]).unwrap();
        let m = ic_influence(&g, &x, 0.1, 100_000, 42);
        assert!((m - 1.1).abs() < 0.01, "{m}");
    }

    #[test]
    fn improvement_sign_convention() {
        assert_eq!(improvement_pct(2.0, 1.5, true), 25.0);
        assert_eq!(improvement_pct(2.0, 3.0, false), 50.0);
        assert_eq!(improvement_pct(0.0, 3.0, false), 0.0);
    }
}
