//! Ground truth for small instances.
//!
//! Coverage here is computed from explicit shortest-path DAGs (BFS with
//! predecessor lists, then a backward sweep from the target) and shares no
//! code with the distance-predicate implementation in `coverage`.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::coverage::{PairUniverse, TargetSet};
use crate::error::{Error, Result};
use crate::generators;
use crate::graph::{Edge, Graph, NodeId};
use crate::par;
use crate::problem::{build_candidates, ProblemInstance, Setting};
use crate::rng;

pub const DAG_MAX_NODES: usize = 200;
pub const SUBSET_LIMIT: u64 = 1_000_000;
/// Largest candidate list `certify_instance_s2` will expand into all subsets.
pub const CERTIFY_MAX_CANDIDATES: usize = 12;

/// BFS layers from `s` with every shortest-path predecessor.
struct PathDag {
    level: Vec<i64>,
    preds: Vec<Vec<NodeId>>,
    order: Vec<NodeId>,
}

impl PathDag {
    fn build(g: &Graph, s: NodeId) -> PathDag {
        let n = g.node_count();
        let mut level = vec![-1i64; n];
        let mut preds = vec![Vec::new(); n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        level[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &w in g.neighbors(u) {
                let w = w as NodeId;
                if level[w] < 0 {
                    level[w] = level[u] + 1;
                    queue.push_back(w);
                }
                if level[w] == level[u] + 1 {
                    preds[w].push(u);
                }
            }
        }
        PathDag { level, preds, order }
    }

    /// Nodes on at least one shortest path to `t`, endpoints included.
    /// `None` when `t` is unreachable.
    fn nodes_to(&self, t: NodeId) -> Option<Vec<bool>> {
        if self.level[t] < 0 {
            return None;
        }
        let mut on = vec![false; self.level.len()];
        let mut stack = vec![t];
        on[t] = true;
        while let Some(v) = stack.pop() {
            for &u in &self.preds[v] {
                if !on[u] {
                    on[u] = true;
                    stack.push(u);
                }
            }
        }
        Some(on)
    }

    fn covered(&self, s: NodeId, t: NodeId, x: &TargetSet) -> bool {
        match self.nodes_to(t) {
            None => false,
            Some(on) => x.nodes().iter().any(|&v| v != s && v != t && on[v]),
        }
    }
}

fn universe_by_source(g: &Graph, x: &TargetSet, z: &PairUniverse) -> Vec<(NodeId, Vec<NodeId>)> {
    let n = g.node_count();
    match z {
        PairUniverse::AllPairs => (0..n)
            .filter(|&s| !x.contains(s))
            .map(|s| {
                let ts = (0..n)
                    .filter(|&t| t != s && !x.contains(t) && (g.is_directed() || t > s))
                    .collect();
                (s, ts)
            })
            .collect(),
        PairUniverse::Explicit(pairs) => {
            let mut out: Vec<(NodeId, Vec<NodeId>)> = Vec::new();
            for &(s, t) in pairs {
                match out.last_mut() {
                    Some((src, ts)) if *src == s => ts.push(t),
                    _ => out.push((s, vec![t])),
                }
            }
            out
        }
    }
}

fn covered_pairs(g: &Graph, x: &TargetSet, z: &PairUniverse) -> Vec<(NodeId, NodeId, bool)> {
    let mut out = Vec::new();
    for (s, ts) in universe_by_source(g, x, z) {
        let dag = PathDag::build(g, s);
        for t in ts {
            out.push((s, t, dag.covered(s, t, x)));
        }
    }
    out
}

/// `C(X)` over `Z` by explicit shortest-path DAGs.
pub fn dag_coverage(g: &Graph, x: &TargetSet, z: &PairUniverse) -> Result<u64> {
    if g.node_count() > DAG_MAX_NODES {
        return Err(Error::Guard(format!(
            "DAG oracle limited to {DAG_MAX_NODES} nodes, graph has {}",
            g.node_count()
        )));
    }
    Ok(covered_pairs(g, x, z).iter().filter(|p| p.2).count() as u64)
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// All index subsets of `0..n` with size `<= k`, in lexicographic order.
fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if cur.len() == k {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Optimal gain over every candidate subset of size at most `k`, and the
/// lexicographically first subset (by candidate index) achieving it.
pub fn brute_force_opt(p: &ProblemInstance) -> Result<(Vec<Edge>, i64)> {
    let gamma = p.candidates.len() as u64;
    let k = p.budget.min(p.candidates.len()) as u64;
    let count: u64 = (0..=k)
        .map(|j| binomial(gamma, j))
        .fold(0u64, |a, b| a.saturating_add(b));
    if count > SUBSET_LIMIT {
        return Err(Error::Guard(format!(
            "{count} candidate subsets exceed the oracle limit {SUBSET_LIMIT}"
        )));
    }
    let base = dag_coverage(&p.graph, &p.targets, &p.pairs)? as i64;
    let subsets = subsets_up_to(p.candidates.len(), k as usize);
    let gains: Vec<Result<i64>> = par::map_slice(&subsets, |idx| {
        let edges: Vec<Edge> = idx.iter().map(|&i| p.candidates[i]).collect();
        let g = p.graph.with_edges(&edges)?;
        Ok(dag_coverage(&g, &p.targets, &p.pairs)? as i64 - base)
    });
    let gains: Vec<i64> = gains.into_iter().collect::<Result<_>>()?;
    let best = gains.iter().copied().max().unwrap_or(0);
    // lexicographic order of index vectors among maximizers
    let arg = subsets
        .iter()
        .zip(&gains)
        .filter(|(_, &g)| g == best)
        .map(|(s, _)| s)
        .min()
        .cloned()
        .unwrap_or_default();
    Ok((arg.iter().map(|&i| p.candidates[i]).collect(), best))
}

/// Largest number of `added` edges on a shortest `s → t` path that visits a
/// target node in its interior, or `None` if no such path exists.
fn max_added_on_covering_path(
    g: &Graph,
    dag: &PathDag,
    s: NodeId,
    t: NodeId,
    x: &TargetSet,
    added: &[Edge],
) -> Option<i64> {
    let on = dag.nodes_to(t)?;
    let n = g.node_count();
    let is_added = |u: NodeId, w: NodeId| {
        added
            .iter()
            .any(|e| e.normalized(g.is_directed()) == Edge(u, w).normalized(g.is_directed()))
    };
    const NONE: i64 = i64::MIN;
    // best[v][hit]: most added edges on a shortest s→v path; hit = passed a target
    let mut best = vec![[NONE, NONE]; n];
    best[s][0] = 0;
    for &v in &dag.order {
        if !on[v] || v == s {
            continue;
        }
        let hit_here = v != t && x.contains(v);
        for &u in &dag.preds[v] {
            if !on[u] {
                continue;
            }
            let w = is_added(u, v) as i64;
            for h in 0..2 {
                if best[u][h] == NONE {
                    continue;
                }
                let nh = if hit_here { 1 } else { h };
                best[v][nh] = best[v][nh].max(best[u][h] + w);
            }
        }
    }
    (best[t][1] != NONE).then_some(best[t][1])
}

/// Whether every pair newly covered by `subset` owes its coverage to a single
/// added edge: exactly one `e` in the subset covers it on its own, and no
/// covering shortest path in `G + subset` uses two added edges.
pub fn certify_s2(p: &ProblemInstance, subset: &[Edge]) -> Result<bool> {
    if p.graph.node_count() > DAG_MAX_NODES {
        return Err(Error::Guard(format!(
            "S2 certification limited to {DAG_MAX_NODES} nodes"
        )));
    }
    if subset.is_empty() {
        return Ok(true);
    }
    let singles: Vec<Vec<(NodeId, NodeId, bool)>> = subset
        .iter()
        .map(|&e| Ok(covered_pairs(&p.graph.with_edges(&[e])?, &p.targets, &p.pairs)))
        .collect::<Result<_>>()?;
    certify_with(p, subset, &singles)
}

fn certify_with(p: &ProblemInstance, subset: &[Edge], singles: &[Vec<(NodeId, NodeId, bool)>]) -> Result<bool> {
    let before = covered_pairs(&p.graph, &p.targets, &p.pairs);
    let g = p.graph.with_edges(subset)?;
    let mut idx = 0usize;
    for (s, ts) in universe_by_source(&g, &p.targets, &p.pairs) {
        let dag = PathDag::build(&g, s);
        for t in ts {
            let was = before[idx].2;
            let single_count = singles.iter().filter(|c| c[idx].2).count();
            idx += 1;
            if was || !dag.covered(s, t, &p.targets) {
                continue;
            }
            if single_count != 1 {
                return Ok(false);
            }
            match max_added_on_covering_path(&g, &dag, s, t, &p.targets, subset) {
                Some(m) if m >= 2 => return Ok(false),
                _ => {}
            }
        }
    }
    Ok(true)
}

/// [`certify_s2`] for every subset of the candidate list.
pub fn certify_instance_s2(p: &ProblemInstance) -> Result<bool> {
    let c = p.candidates.len();
    if c > CERTIFY_MAX_CANDIDATES {
        return Err(Error::Guard(format!(
            "certifying all subsets needs at most {CERTIFY_MAX_CANDIDATES} candidates, got {c}"
        )));
    }
    let singles: Vec<Vec<(NodeId, NodeId, bool)>> = p
        .candidates
        .iter()
        .map(|&e| Ok(covered_pairs(&p.graph.with_edges(&[e])?, &p.targets, &p.pairs)))
        .collect::<Result<_>>()?;
    for mask in 1u32..(1 << c) {
        let members: Vec<usize> = (0..c).filter(|i| mask >> i & 1 == 1).collect();
        if members.len() < 2 {
            // a lone edge always satisfies the single-edge condition
            continue;
        }
        let subset: Vec<Edge> = members.iter().map(|&i| p.candidates[i]).collect();
        let sub_singles: Vec<_> = members.iter().map(|&i| singles[i].clone()).collect();
        if !certify_with(p, &subset, &sub_singles)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A violation of `f(A ∪ {e}) − f(A) ≥ f(B ∪ {e}) − f(B)` with `A ⊂ B`.
#[derive(Clone, Debug)]
pub struct Witness {
    /// Candidates are `B ∪ {e}`.
    pub instance: ProblemInstance,
    pub smaller: Vec<Edge>,
    pub larger: Vec<Edge>,
    pub edge: Edge,
    pub gain_smaller: i64,
    pub gain_larger: i64,
    pub try_index: u64,
}

/// Diminishing-returns check on one triple, using the DAG oracle.
pub fn marginal_pair(p: &ProblemInstance, smaller: &[Edge], larger: &[Edge], e: Edge) -> Result<(i64, i64)> {
    let f =
        |edges: &[Edge]| -> Result<i64> { Ok(dag_coverage(&p.graph.with_edges(edges)?, &p.targets, &p.pairs)? as i64) };
    let with = |base: &[Edge]| {
        let mut v = base.to_vec();
        v.push(e);
        v
    };
    let ga = f(&with(smaller))? - f(smaller)?;
    let gb = f(&with(larger))? - f(larger)?;
    Ok((ga, gb))
}

fn witness_try(setting: Setting, seed: u64, i: u64, certify: bool) -> Option<Witness> {
    let mut rng = rng::stream(seed, rng::tag::WITNESS, i);
    let directed = setting.is_directed();
    let n = rng.gen_range(4..=8);
    let density = rng.gen_range(0.15..0.55);
    let g = generators::erdos_renyi(n, density, directed, &mut rng);
    if g.edge_count() == 0 {
        return None;
    }
    let nx = if rng.gen_bool(0.7) { 1 } else { 2 };
    let targets = generators::random_targets(n, nx, &mut rng);
    let x = TargetSet::new(n, &targets).ok()?;
    let mut gamma = build_candidates(&g, &x, setting).ok()?;
    if gamma.len() < 2 {
        return None;
    }
    gamma.shuffle(&mut rng);
    let e = gamma[0];
    let larger_size = rng.gen_range(1..=(gamma.len() - 1).min(3));
    let larger: Vec<Edge> = gamma[1..=larger_size].to_vec();
    let smaller_size = rng.gen_range(0..larger_size);
    let smaller: Vec<Edge> = larger[..smaller_size].to_vec();

    let mut candidates = larger.clone();
    candidates.push(e);
    candidates.sort_unstable();
    let p = ProblemInstance {
        budget: candidates.len(),
        candidates,
        targets: x,
        pairs: PairUniverse::AllPairs,
        setting,
        enforce_s2: certify,
        graph: g,
    };
    let (ga, gb) = marginal_pair(&p, &smaller, &larger, e).ok()?;
    if ga >= gb {
        return None;
    }
    if certify && !certify_instance_s2(&p).ok()? {
        return None;
    }
    Some(Witness {
        instance: p,
        smaller,
        larger,
        edge: e,
        gain_smaller: ga,
        gain_larger: gb,
        try_index: i,
    })
}

/// Randomized search over graphs with at most 8 nodes for a violation of
/// submodularity under `setting`. With `certify`, only instances whose every
/// candidate subset passes S2 certification count. Returns the witness with
/// the lowest try index, so the result is independent of the worker count.
pub fn find_non_submodular_witness(setting: Setting, seed: u64, max_tries: u64, certify: bool) -> Option<Witness> {
    const BATCH: u64 = 2048;
    let mut start = 0u64;
    while start < max_tries {
        let end = (start + BATCH).min(max_tries);
        let found = par::map_range((end - start) as usize, |j| {
            witness_try(setting, seed, start + j as u64, certify)
        });
        if let Some(w) = found.into_iter().flatten().next() {
            return Some(w);
        }
        start = end;
    }
    None
}
