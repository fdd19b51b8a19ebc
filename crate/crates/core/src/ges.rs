//! Exact greedy edge selection.
//!
//! Each round computes all-pairs distances on the current graph, then scores
//! every remaining candidate `(a, b)` by the exact coverage of `X` in
//! `G + (a, b)`. Distances in the augmented graph come from the base matrix:
//! `d'(s,t) = min(d(s,t), d(s,a) + 1 + d(b,t), d(s,b) + 1 + d(a,t))`, the
//! last term only when undirected.

use std::time::Instant;

use crate::coverage::{group_coverage, PairUniverse, TargetSet};
use crate::error::{Error, Result};
use crate::graph::{dist_add, DistanceMatrix, Edge, Graph, NodeId, UNREACHABLE};
use crate::par;
use crate::problem::{exact_after, GainKind, IterationRecord, ProblemInstance, SelectionReport, Timings};

/// Largest graph GES accepts; the distance matrix is `n²` words.
pub const GES_MAX_NODES: usize = 4096;

#[derive(Clone, Copy, Debug, Default)]
pub struct GesOptions {
    /// Stop once the best remaining gain is `<= 0` instead of filling the budget.
    pub stop_on_zero_gain: bool,
}

/// Exact coverage gain of adding `e` to `g`, by full recount.
pub fn marginal_gain_exact(g: &Graph, x: &TargetSet, z: &PairUniverse, base_coverage: u64, e: Edge) -> Result<i64> {
    let h = g.with_edges(&[e])?;
    Ok(group_coverage(&h, x, z).covered as i64 - base_coverage as i64)
}

/// Coverage counter over a fixed distance matrix, optionally with one extra edge.
struct AugmentedCoverage<'a> {
    d: &'a DistanceMatrix,
    directed: bool,
    targets: &'a [NodeId],
    pairs: Vec<(NodeId, NodeId)>,
}

impl<'a> AugmentedCoverage<'a> {
    fn new(g: &Graph, d: &'a DistanceMatrix, x: &'a TargetSet, z: &PairUniverse) -> Self {
        let pairs = match z {
            PairUniverse::AllPairs => {
                let outside = x.outside();
                let mut v = Vec::new();
                for (i, &s) in outside.iter().enumerate() {
                    let partners = if g.is_directed() {
                        &outside[..]
                    } else {
                        &outside[i + 1..]
                    };
                    v.extend(partners.iter().filter(|&&t| t != s).map(|&t| (s, t)));
                }
                v
            }
            PairUniverse::Explicit(p) => p.clone(),
        };
        AugmentedCoverage {
            d,
            directed: g.is_directed(),
            targets: x.nodes(),
            pairs,
        }
    }

    #[inline]
    fn dist(&self, s: NodeId, t: NodeId, e: Option<Edge>) -> u32 {
        let base = self.d.get(s, t);
        match e {
            None => base,
            Some(Edge(a, b)) => {
                let mut best = base.min(dist_add(dist_add(self.d.get(s, a), 1), self.d.get(b, t)));
                if !self.directed {
                    best = best.min(dist_add(dist_add(self.d.get(s, b), 1), self.d.get(a, t)));
                }
                best
            }
        }
    }

    fn count(&self, e: Option<Edge>) -> u64 {
        self.pairs
            .iter()
            .filter(|&&(s, t)| {
                let d = self.dist(s, t, e);
                d != UNREACHABLE
                    && self
                        .targets
                        .iter()
                        .any(|&x| x != s && x != t && dist_add(self.dist(s, x, e), self.dist(x, t, e)) == d)
            })
            .count() as u64
    }
}

pub fn run_ges(p: &ProblemInstance) -> Result<SelectionReport> {
    run_ges_with(p, &GesOptions::default())
}

pub fn run_ges_with(p: &ProblemInstance, opts: &GesOptions) -> Result<SelectionReport> {
    p.validate()?;
    let n = p.graph.node_count();
    if n > GES_MAX_NODES {
        return Err(Error::Guard(format!(
            "GES keeps an n x n distance matrix; n = {n} exceeds {GES_MAX_NODES}"
        )));
    }
    let mut timings = Timings::default();
    let t0 = Instant::now();
    let before = p.coverage(&p.graph);
    timings.record("exact-before", t0);

    let t0 = Instant::now();
    let mut current = p.graph.clone();
    let mut remaining: Vec<Edge> = p.candidates.clone();
    let mut selected = Vec::new();
    let mut iterations = Vec::new();
    let mut warnings = Vec::new();
    for step in 0..p.budget {
        if remaining.is_empty() {
            break;
        }
        let d = DistanceMatrix::compute(&current);
        let counter = AugmentedCoverage::new(&current, &d, &p.targets, &p.pairs);
        let base = counter.count(None) as i64;
        let gains: Vec<i64> = par::map_slice(&remaining, |&e| counter.count(Some(e)) as i64 - base);
        let best = par::argmax_first(&gains).expect("non-empty");
        let gain = gains[best];
        if gain <= 0 {
            if opts.stop_on_zero_gain {
                warnings.push(format!("stopped after {step} edges: best remaining gain is {gain}"));
                break;
            }
            warnings.push(format!("step {}: best gain is {gain}", step + 1));
        }
        let e = remaining.remove(best);
        current = current.with_edges(&[e])?;
        selected.push(e);
        iterations.push(IterationRecord {
            step: step + 1,
            edge: e,
            score: gain,
            kind: GainKind::Exact,
            estimate: None,
        });
    }
    timings.record("greedy", t0);

    let t0 = Instant::now();
    let after = exact_after(p, &selected)?;
    timings.record("exact-after", t0);

    Ok(SelectionReport {
        algorithm: "ges".into(),
        selected,
        iterations,
        coverage_before: (&before).into(),
        coverage_after: (&after).into(),
        samples: None,
        seed: None,
        warnings,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Setting;

    fn p4_instance(k: usize) -> ProblemInstance {
        // a-b-c-d as 0-1-2-3, X = {a}, candidates (a,c), (a,d)
        let g = Graph::from_edges(4, false, &[Edge(0, 1), Edge(1, 2), Edge(2, 3)]).unwrap();
        ProblemInstance {
            targets: TargetSet::new(4, &[0]).unwrap(),
            candidates: vec![Edge(0, 2), Edge(0, 3)],
            pairs: PairUniverse::AllPairs,
            budget: k,
            setting: Setting::S1,
            enforce_s2: false,
            graph: g,
        }
    }

    #[test]
    fn p4_selects_a_d() {
        let r = run_ges(&p4_instance(1)).unwrap();
        assert_eq!(r.selected, vec![Edge(0, 3)]);
        assert_eq!(r.iterations[0].score, 1);
        assert_eq!(r.gain(), 1);
    }

    #[test]
    fn marginal_gains_on_p4() {
        let p = p4_instance(1);
        let base = p.coverage(&p.graph).covered;
        assert_eq!(
            marginal_gain_exact(&p.graph, &p.targets, &p.pairs, base, Edge(0, 2)).unwrap(),
            0
        );
        assert_eq!(
            marginal_gain_exact(&p.graph, &p.targets, &p.pairs, base, Edge(0, 3)).unwrap(),
            1
        );
    }

    #[test]
    fn negative_gain_on_star_chord() {
        let edges: Vec<Edge> = (1..=4).map(|i| Edge(0, i)).collect();
        let g = Graph::from_edges(5, false, &edges).unwrap();
        let x = TargetSet::new(5, &[0]).unwrap();
        let base = group_coverage(&g, &x, &PairUniverse::AllPairs).covered;
        assert_eq!(base, 6);
        assert_eq!(
            marginal_gain_exact(&g, &x, &PairUniverse::AllPairs, base, Edge(1, 2)).unwrap(),
            -1
        );
    }

    #[test]
    fn saturated_coverage_gains_zero() {
        let edges: Vec<Edge> = (1..=4).map(|i| Edge(0, i)).collect();
        let g = Graph::from_edges(6, false, &edges).unwrap();
        let x = TargetSet::new(6, &[0]).unwrap();
        // pairs limited to covered leaves
        let z = PairUniverse::explicit(&g, &x, &[(1, 2), (3, 4)]).unwrap();
        let base = group_coverage(&g, &x, &z).covered;
        assert_eq!(marginal_gain_exact(&g, &x, &z, base, Edge(0, 5)).unwrap(), 0);
    }

    #[test]
    fn budget_equal_to_candidates_takes_all() {
        let p = p4_instance(2);
        let r = run_ges(&p).unwrap();
        assert_eq!(r.selected, vec![Edge(0, 3), Edge(0, 2)]);
        let all = exact_after(&p, &p.candidates).unwrap();
        assert_eq!(r.coverage_after.covered, all.covered);
    }

    #[test]
    fn augmented_counts_match_recount() {
        let g = Graph::from_edges(
            7,
            false,
            &[Edge(0, 1), Edge(1, 2), Edge(2, 3), Edge(3, 4), Edge(4, 5), Edge(1, 6)],
        )
        .unwrap();
        let x = TargetSet::new(7, &[2, 6]).unwrap();
        let z = PairUniverse::AllPairs;
        let d = DistanceMatrix::compute(&g);
        let c = AugmentedCoverage::new(&g, &d, &x, &z);
        let base = group_coverage(&g, &x, &z).covered;
        assert_eq!(c.count(None), base);
        for e in [Edge(0, 5), Edge(2, 5), Edge(6, 4), Edge(0, 3)] {
            let direct = group_coverage(&g.with_edges(&[e]).unwrap(), &x, &z).covered;
            assert_eq!(c.count(Some(e)), direct, "{e}");
        }
    }

    #[test]
    fn stop_on_zero_gain() {
        let g = Graph::from_edges(4, false, &[Edge(0, 1), Edge(1, 2), Edge(2, 3)]).unwrap();
        let p = ProblemInstance {
            targets: TargetSet::new(4, &[0]).unwrap(),
            candidates: vec![Edge(0, 2)],
            pairs: PairUniverse::AllPairs,
            budget: 1,
            setting: Setting::S1,
            enforce_s2: false,
            graph: g,
        };
        let r = run_ges_with(
            &p,
            &GesOptions {
                stop_on_zero_gain: true,
            },
        )
        .unwrap();
        assert!(r.selected.is_empty());
        let r = run_ges(&p).unwrap();
        assert_eq!(r.selected, vec![Edge(0, 2)]);
        assert_eq!(r.iterations[0].score, 0);
    }
}
