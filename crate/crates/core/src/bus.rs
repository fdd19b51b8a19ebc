//! Greedy edge selection on sampled uncovered pairs.
//!
//! `Q` is drawn once from `M_u`. Every round recomputes `d(s,·)` and `d(·,t)`
//! for the still-uncovered samples on the current graph, scores each remaining
//! candidate `(a, b)` in O(1) per sample, and commits the best one. A sample
//! is newly covered by `(a, b)` when the path through the new edge,
//! `L = d(s,a) + 1 + d(b,t)` (or the mirrored term when undirected), is finite
//! and no longer than `d(s,t)`: the path then contains the edge's target
//! endpoint and is a shortest path.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coverage::{exhaustive_sample, sample_uncovered_pairs, SampleSet, SampledPair, SamplingConfig, TargetSet};
use crate::error::{Error, Result};
use crate::graph::{dist_add, Edge, UNREACHABLE};
use crate::par;
use crate::problem::{
    exact_after, GainKind, IterationRecord, ProblemInstance, SampleSummary, SelectionReport, Timings,
};

/// `12 · m_u · (l + k) · ln|Γ| / (ε² · OPT)`, rounded up.
///
/// `opt_bound` is a lower bound on the optimum, in the same units as `m_u`;
/// a smaller bound only increases `q`.
pub fn sample_size_thm4(m_u: u64, l: u32, k: usize, gamma_size: usize, epsilon: f64, opt_bound: f64) -> Result<usize> {
    check_common(l, gamma_size, epsilon)?;
    if !(opt_bound > 0.0 && opt_bound <= m_u as f64) {
        return Err(Error::Config(format!(
            "OPT bound must lie in (0, m_u = {m_u}], got {opt_bound}"
        )));
    }
    let q = 12.0 * m_u as f64 * (l as f64 + k as f64) * (gamma_size as f64).ln() / (epsilon * epsilon * opt_bound);
    Ok(q.ceil() as usize)
}

/// `12 · (l + k) · ln|Γ| / ε²`, rounded up.
pub fn sample_size_cor3(l: u32, k: usize, gamma_size: usize, epsilon: f64) -> Result<usize> {
    check_common(l, gamma_size, epsilon)?;
    let q = 12.0 * (l as f64 + k as f64) * (gamma_size as f64).ln() / (epsilon * epsilon);
    Ok(q.ceil() as usize)
}

fn check_common(l: u32, gamma_size: usize, epsilon: f64) -> Result<()> {
    if gamma_size < 2 {
        return Err(Error::Config(format!(
            "sample-size bounds need at least 2 candidates (ln|candidates| > 0), got {gamma_size}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Config(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if l == 0 {
        return Err(Error::Config("confidence exponent l must be positive".into()));
    }
    Ok(())
}

/// How the sample size is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sizing {
    /// `q` from the OPT-free bound.
    Corollary {
        epsilon: f64,
        l: u32,
    },
    /// `q` from the OPT-dependent bound with a user-supplied lower bound on OPT.
    Theorem {
        epsilon: f64,
        l: u32,
        opt_bound: f64,
    },
    Manual(usize),
    /// Every uncovered pair once; `q = m_u`.
    Exhaustive,
    /// `256 · k`, the sample counts used for the CG runs. Carries no guarantee.
    PaperCg,
}

/// Resolved sampling plan, embedded in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub formula: String,
    pub q: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence_l: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt_bound: Option<f64>,
    pub k: usize,
    pub candidates: usize,
    pub m_u_ordered: u64,
    pub log_base: String,
    pub guarantee: bool,
}

impl SamplePlan {
    /// `m_u` and `opt_bound` are in the universe's own convention; the plan
    /// records `m_u` in the ordered convention (the ratio is unaffected).
    pub fn resolve(sizing: Sizing, k: usize, gamma_size: usize, m_u: u64, ordered_factor: u64) -> Result<SamplePlan> {
        let mut plan = SamplePlan {
            formula: String::new(),
            q: 0,
            epsilon: None,
            confidence_l: None,
            opt_bound: None,
            k,
            candidates: gamma_size,
            m_u_ordered: m_u * ordered_factor,
            log_base: "e".into(),
            guarantee: false,
        };
        match sizing {
            Sizing::Corollary { epsilon, l } => {
                plan.q = sample_size_cor3(l, k, gamma_size, epsilon)?;
                plan.formula = "cor3".into();
                plan.epsilon = Some(epsilon);
                plan.confidence_l = Some(l);
                plan.guarantee = true;
            }
            Sizing::Theorem { epsilon, l, opt_bound } => {
                let f = ordered_factor as f64;
                plan.q = sample_size_thm4(m_u * ordered_factor, l, k, gamma_size, epsilon, opt_bound * f)?;
                plan.formula = "thm4".into();
                plan.epsilon = Some(epsilon);
                plan.confidence_l = Some(l);
                plan.opt_bound = Some(opt_bound);
                plan.guarantee = true;
            }
            Sizing::Manual(q) => {
                if q == 0 {
                    return Err(Error::Config("sample size must be at least 1".into()));
                }
                plan.q = q;
                plan.formula = "manual".into();
            }
            Sizing::Exhaustive => {
                plan.q = m_u as usize;
                plan.formula = "exhaustive".into();
            }
            Sizing::PaperCg => {
                plan.q = 256 * k;
                plan.formula = "paper-cg".into();
            }
        }
        Ok(plan)
    }
}

/// `f^q = (m_u / q) · (number of covered samples)`.
pub fn estimate_coverage(sample: &SampleSet, m_u: f64) -> f64 {
    if sample.is_empty() {
        return 0.0;
    }
    m_u / sample.len() as f64 * sample.covered_count() as f64
}

/// Whether adding `e` gives `pair` a shortest path through the edge.
#[inline]
pub fn covers_via(pair: &SampledPair, e: Edge, directed: bool) -> bool {
    let d = pair.distance();
    let Edge(a, b) = e;
    let mut l = dist_add(dist_add(pair.from_s[a], 1), pair.to_t[b]);
    if !directed {
        l = l.min(dist_add(dist_add(pair.from_s[b], 1), pair.to_t[a]));
    }
    l != UNREACHABLE && l <= d
}

/// Unflagged samples that `e` newly covers. Edges without a target endpoint
/// score 0: a path through them cannot be certified to meet `X`.
pub fn score_candidate(sample: &SampleSet, e: Edge, x: &TargetSet, directed: bool) -> i64 {
    if !(x.contains(e.0) || x.contains(e.1)) {
        return 0;
    }
    sample
        .pairs
        .iter()
        .zip(&sample.covered)
        .filter(|(p, &c)| !c && covers_via(p, e, directed))
        .count() as i64
}

/// [`score_candidate`] for every candidate at once. Loops pair-major so each
/// sample's two distance rows stay in cache while all candidates read them.
pub fn score_all(sample: &SampleSet, candidates: &[Edge], x: &TargetSet, directed: bool) -> Vec<i64> {
    const CHUNK: usize = 32;
    let eligible: Vec<bool> = candidates.iter().map(|e| x.contains(e.0) || x.contains(e.1)).collect();
    let open: Vec<&SampledPair> = sample
        .pairs
        .iter()
        .zip(&sample.covered)
        .filter(|(_, &c)| !c)
        .map(|(p, _)| p)
        .collect();
    let chunks = open.len().div_ceil(CHUNK);
    let partial = par::map_range(chunks, |c| {
        let mut counts = vec![0u32; candidates.len()];
        for pair in &open[c * CHUNK..((c + 1) * CHUNK).min(open.len())] {
            for ((slot, &e), &ok) in counts.iter_mut().zip(candidates).zip(&eligible) {
                *slot += (ok && covers_via(pair, e, directed)) as u32;
            }
        }
        counts
    });
    let mut total = vec![0i64; candidates.len()];
    for counts in partial {
        for (t, c) in total.iter_mut().zip(counts) {
            *t += c as i64;
        }
    }
    total
}

pub fn run_bus(p: &ProblemInstance, sizing: Sizing, seed: u64) -> Result<(SelectionReport, SamplePlan)> {
    run_bus_with(p, sizing, seed, &SamplingConfig::default())
}

pub fn run_bus_with(
    p: &ProblemInstance,
    sizing: Sizing,
    seed: u64,
    cfg: &SamplingConfig,
) -> Result<(SelectionReport, SamplePlan)> {
    p.validate()?;
    let g0 = &p.graph;
    let directed = g0.is_directed();
    let factor = if directed { 1 } else { 2 };
    let mut timings = Timings::default();
    let mut warnings = Vec::new();

    let t0 = Instant::now();
    let before = p.coverage(g0);
    timings.record("exact-before", t0);
    let m_u = before.uncovered;
    if m_u == 0 {
        return Err(Error::Sampling("no uncovered pairs (m_u = 0)".into()));
    }

    let plan = SamplePlan::resolve(sizing, p.budget, p.candidates.len(), m_u, factor)?;

    let t0 = Instant::now();
    let mut sample = if sizing == Sizing::Exhaustive {
        exhaustive_sample(g0, &p.targets, &p.pairs)?
    } else {
        sample_uncovered_pairs(g0, &p.targets, &p.pairs, plan.q, seed, cfg)?
    };
    timings.record("sample", t0);

    let heuristic = p
        .candidates
        .iter()
        .filter(|e| !(p.targets.contains(e.0) || p.targets.contains(e.1)))
        .count();
    if heuristic > 0 {
        warnings.push(format!(
            "heuristic: {heuristic} candidates have no target endpoint and are scored 0 by the sampler"
        ));
    }

    let t0 = Instant::now();
    let scale = m_u as f64 / sample.len() as f64;
    let mut current = g0.clone();
    let mut remaining = p.candidates.clone();
    let mut selected = Vec::new();
    let mut iterations = Vec::new();
    for step in 0..p.budget {
        if remaining.is_empty() {
            break;
        }
        if step > 0 {
            let covered = &sample.covered;
            let g = &current;
            par::for_each_mut(&mut sample.pairs, |i, pair| {
                if !covered[i] {
                    let mut queue = Vec::new();
                    pair.refresh(g, &mut queue);
                }
            });
        }
        let scores = score_all(&sample, &remaining, &p.targets, directed);
        let best = par::argmax_first(&scores).expect("non-empty");
        let e = remaining.remove(best);
        if p.targets.contains(e.0) || p.targets.contains(e.1) {
            for (pair, c) in sample.pairs.iter().zip(sample.covered.iter_mut()) {
                if !*c && covers_via(pair, e, directed) {
                    *c = true;
                }
            }
        }
        current = current.with_edges(&[e])?;
        selected.push(e);
        iterations.push(IterationRecord {
            step: step + 1,
            edge: e,
            score: scores[best],
            kind: GainKind::Sampled,
            estimate: Some(scores[best] as f64 * scale),
        });
    }
    timings.record("greedy", t0);

    let t0 = Instant::now();
    let after = exact_after(p, &selected)?;
    timings.record("exact-after", t0);

    let summary = SampleSummary {
        q: sample.len(),
        source: sample.source.as_str().into(),
        draws: sample.draws,
        covered_at_end: sample.covered_count(),
        m_u,
        m_u_ordered: m_u * factor,
        m_u_source: "exact".into(),
        m_u_estimate: sample.estimated_uncovered(p.pairs.size(g0, &p.targets)),
    };
    let report = SelectionReport {
        algorithm: "bus".into(),
        selected,
        iterations,
        coverage_before: (&before).into(),
        coverage_after: (&after).into(),
        samples: Some(summary),
        seed: Some(seed),
        warnings,
        timings,
    };
    Ok((report, plan))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::{PairUniverse, SampleSource};
    use crate::graph::Graph;
    use crate::problem::Setting;

    #[test]
    fn thm4_reference_value() {
        // 12·1000·11·ln 50 / (0.09·1000) = 5737.6...
        assert_eq!(sample_size_thm4(1000, 1, 10, 50, 0.3, 1000.0).unwrap(), 5738);
    }

    #[test]
    fn cor3_reference_values() {
        assert_eq!(sample_size_cor3(1, 10, 50, 0.3).unwrap(), 5738);
        assert_eq!(sample_size_cor3(1, 20, 100, 0.3).unwrap(), 12895);
    }

    #[test]
    fn thm4_with_opt_equal_mu_matches_cor3() {
        for (mu, k, g) in [(500u64, 3usize, 10usize), (77, 5, 40), (10_000, 20, 7)] {
            assert_eq!(
                sample_size_thm4(mu, 2, k, g, 0.2, mu as f64).unwrap(),
                sample_size_cor3(2, k, g, 0.2).unwrap()
            );
        }
    }

    #[test]
    fn halving_epsilon_quadruples_q() {
        let a = 12.0 * 11.0 * 50f64.ln() / 0.09;
        let q1 = sample_size_cor3(1, 10, 50, 0.3).unwrap();
        let q2 = sample_size_cor3(1, 10, 50, 0.15).unwrap();
        assert_eq!(q1, a.ceil() as usize);
        assert_eq!(q2, (4.0 * a).ceil() as usize);
    }

    #[test]
    fn sizing_errors() {
        assert!(sample_size_cor3(1, 1, 1, 0.3).is_err());
        assert!(sample_size_cor3(1, 1, 5, 1.0).is_err());
        assert!(sample_size_cor3(0, 1, 5, 0.5).is_err());
        assert!(sample_size_thm4(100, 1, 1, 5, 0.5, 0.0).is_err());
        assert!(sample_size_thm4(100, 1, 1, 5, 0.5, 101.0).is_err());
    }

    fn p4_instance(k: usize) -> ProblemInstance {
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
    fn p4_scores_and_selection() {
        let p = p4_instance(1);
        let s = exhaustive_sample(&p.graph, &p.targets, &p.pairs).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(score_candidate(&s, Edge(0, 3), &p.targets, false), 1);
        assert_eq!(score_candidate(&s, Edge(0, 2), &p.targets, false), 0);
        let (r, plan) = run_bus(&p, Sizing::Exhaustive, 0).unwrap();
        assert_eq!(r.selected, vec![Edge(0, 3)]);
        assert_eq!(plan.q, 3);
        assert_eq!(r.samples.as_ref().unwrap().source, SampleSource::Exhaustive.as_str());
    }

    #[test]
    fn unreachable_endpoints_score_zero() {
        // X = {4} isolated; samples live in 0-1-2-3; candidate touches 4 and 5 (also isolated)
        let g = Graph::from_edges(6, false, &[Edge(0, 1), Edge(1, 2), Edge(2, 3)]).unwrap();
        let x = TargetSet::new(6, &[4]).unwrap();
        let z = PairUniverse::explicit(&g, &x, &[(0, 2), (1, 3), (0, 3)]).unwrap();
        let s = exhaustive_sample(&g, &x, &z).unwrap();
        assert_eq!(score_candidate(&s, Edge(4, 5), &x, false), 0);
    }

    #[test]
    fn equality_counts_as_covered() {
        // C4 0-1-2-3-0 minus 0-3 is P4; X = {0}, adding (0,3) ties (1,3) at length 2.
        let g = Graph::from_edges(4, false, &[Edge(0, 1), Edge(1, 2), Edge(2, 3)]).unwrap();
        let x = TargetSet::new(4, &[0]).unwrap();
        let z = PairUniverse::explicit(&g, &x, &[(1, 3)]).unwrap();
        let s = exhaustive_sample(&g, &x, &z).unwrap();
        assert_eq!(s.pairs[0].distance(), 2);
        assert!(covers_via(&s.pairs[0], Edge(0, 3), false));
    }

    #[test]
    fn estimator_arithmetic() {
        let p = p4_instance(1);
        let mut s = sample_uncovered_pairs(&p.graph, &p.targets, &p.pairs, 4, 1, &SamplingConfig::default()).unwrap();
        assert_eq!(estimate_coverage(&s, 100.0), 0.0);
        s.covered[2] = true;
        assert_eq!(estimate_coverage(&s, 100.0), 25.0);
    }

    #[test]
    fn exhaustive_estimate_is_exact() {
        let p = p4_instance(1);
        let mut s = exhaustive_sample(&p.graph, &p.targets, &p.pairs).unwrap();
        for (pair, c) in s.pairs.iter().zip(s.covered.iter_mut()) {
            *c = covers_via(pair, Edge(0, 3), false);
        }
        let exact = exact_after(&p, &[Edge(0, 3)]).unwrap().covered - p.coverage(&p.graph).covered;
        assert_eq!(estimate_coverage(&s, s.len() as f64), exact as f64);
    }

    #[test]
    fn single_sample_picks_lowest_covering_index() {
        // Path 0..6, X = {0}; pair must be a single uncovered pair.
        let g = Graph::from_edges(6, false, &(0..5).map(|i| Edge(i, i + 1)).collect::<Vec<_>>()).unwrap();
        let x = TargetSet::new(6, &[0]).unwrap();
        let z = PairUniverse::explicit(&g, &x, &[(2, 5)]).unwrap();
        let p = ProblemInstance {
            candidates: crate::problem::build_candidates(&g, &x, Setting::S1).unwrap(),
            targets: x,
            pairs: z,
            budget: 2,
            setting: Setting::S1,
            enforce_s2: false,
            graph: g,
        };
        // candidates (0,2),(0,3),(0,4),(0,5); only (0,5) covers (2,5): d(2,5) = 3 = d(2,0) + 1 + d(5,5)
        let (r, _) = run_bus(&p, Sizing::Manual(1), 9).unwrap();
        assert_eq!(r.selected[0], Edge(0, 5));
        assert_eq!(r.iterations[0].score, 1);
        // pair flagged; second pick falls back to lowest index
        assert_eq!(r.selected[1], Edge(0, 2));
        assert_eq!(r.iterations[1].score, 0);
    }

    #[test]
    fn batch_scores_match_single_scores() {
        use crate::generators::barabasi_albert;
        use crate::rng::{self, tag};
        let g = barabasi_albert(60, 2, &mut rng::stream(4, tag::GRAPH, 0));
        let x = TargetSet::new(60, &[3, 40]).unwrap();
        let cands = crate::problem::build_candidates(&g, &x, Setting::S0).unwrap();
        let mut s =
            sample_uncovered_pairs(&g, &x, &PairUniverse::AllPairs, 200, 5, &SamplingConfig::default()).unwrap();
        for i in (0..s.len()).step_by(3) {
            s.covered[i] = true;
        }
        let batch = score_all(&s, &cands, &x, false);
        for (e, b) in cands.iter().zip(&batch) {
            assert_eq!(*b, score_candidate(&s, *e, &x, false), "{e}");
        }
        assert!(batch.iter().any(|&b| b > 0));
    }
}
