//! Group coverage: the shortest-path predicate, exact counting over a pair
//! universe, and uniform sampling of uncovered pairs.
//!
//! A pair `(s, t)` is covered by `X` when some `x ∈ X \ {s, t}` satisfies
//! `d(s,x) + d(x,t) = d(s,t) < ∞`. Undirected universes count unordered
//! pairs once; the ordered-convention count (twice that) is exposed where
//! sample-size formulas need it.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{bfs, bfs_into, dist_add, DistanceField, Graph, NodeId, UNREACHABLE};
use crate::par;
use crate::rng::{self, tag};

/// Universes at or below this many pairs may be enumerated in full.
pub const MATERIALIZE_LIMIT: u64 = 1_000_000;

/// The target node set `X`, sorted, with an O(1) membership mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetSet {
    nodes: Vec<NodeId>,
    mask: Vec<bool>,
}

impl TargetSet {
    pub fn new(n: usize, nodes: &[NodeId]) -> Result<TargetSet> {
        let mut mask = vec![false; n];
        for &v in nodes {
            if v >= n {
                return Err(Error::Config(format!("target node {v} out of range (n = {n})")));
            }
            mask[v] = true;
        }
        let nodes = (0..n).filter(|&v| mask[v]).collect();
        Ok(TargetSet { nodes, mask })
    }

    #[inline]
    pub fn contains(&self, v: NodeId) -> bool {
        self.mask[v]
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `V \ X` in id order.
    pub fn outside(&self) -> Vec<NodeId> {
        (0..self.mask.len()).filter(|&v| !self.mask[v]).collect()
    }
}

/// The pair universe `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairUniverse {
    /// Every pair of distinct nodes outside `X`: unordered when undirected,
    /// ordered when directed.
    AllPairs,
    /// An explicit, deduplicated list; undirected pairs stored min-id first.
    Explicit(Vec<(NodeId, NodeId)>),
}

impl PairUniverse {
    /// Validates and normalizes an explicit pair list.
    pub fn explicit(g: &Graph, x: &TargetSet, pairs: &[(NodeId, NodeId)]) -> Result<PairUniverse> {
        let mut out: Vec<(NodeId, NodeId)> = Vec::with_capacity(pairs.len());
        let mut bad = Vec::new();
        for &(s, t) in pairs {
            if s >= g.node_count() || t >= g.node_count() {
                bad.push(format!("pair ({s},{t}) out of range"));
            } else if s == t {
                bad.push(format!("pair ({},{}) has equal endpoints", g.label(s), g.label(t)));
            } else if x.contains(s) || x.contains(t) {
                bad.push(format!("pair ({},{}) touches the target set", g.label(s), g.label(t)));
            } else if g.is_directed() || s < t {
                out.push((s, t));
            } else {
                out.push((t, s));
            }
        }
        if !bad.is_empty() {
            return Err(Error::Invalid(bad));
        }
        out.sort_unstable();
        out.dedup();
        Ok(PairUniverse::Explicit(out))
    }

    /// `|Z|` in the graph's native convention.
    pub fn size(&self, g: &Graph, x: &TargetSet) -> u64 {
        match self {
            PairUniverse::AllPairs => {
                let r = (g.node_count() - x.len()) as u64;
                let ordered = r * r.saturating_sub(1);
                if g.is_directed() {
                    ordered
                } else {
                    ordered / 2
                }
            }
            PairUniverse::Explicit(p) => p.len() as u64,
        }
    }
}

/// Result of an exact coverage count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageState {
    pub covered: u64,
    pub uncovered: u64,
    pub directed: bool,
    /// Per-pair flags, in universe order, for explicit universes.
    pub flags: Option<Vec<bool>>,
}

impl CoverageState {
    pub fn total(&self) -> u64 {
        self.covered + self.uncovered
    }

    fn factor(&self) -> u64 {
        if self.directed {
            1
        } else {
            2
        }
    }

    /// `m_u` counting `(s,t)` and `(t,s)` separately.
    pub fn uncovered_ordered(&self) -> u64 {
        self.uncovered * self.factor()
    }

    pub fn covered_ordered(&self) -> u64 {
        self.covered * self.factor()
    }
}

/// Forward distance fields from every target node: `d(x, ·)`.
#[derive(Clone, Debug)]
pub struct TargetFields {
    fields: Vec<DistanceField>,
}

impl TargetFields {
    pub fn compute(g: &Graph, x: &TargetSet) -> TargetFields {
        TargetFields {
            fields: par::map_slice(x.nodes(), |&v| bfs(g, v, false)),
        }
    }

    /// Whether `(s, t)` is covered given `d(s, ·)`.
    #[inline]
    pub fn covers(&self, s: NodeId, t: NodeId, from_s: &[u32]) -> bool {
        let d = from_s[t];
        if d == UNREACHABLE {
            return false;
        }
        self.fields.iter().any(|fx| {
            let x = fx.source;
            x != s && x != t && dist_add(from_s[x], fx.dist[t]) == d
        })
    }
}

/// The coverage predicate on precomputed fields. `from_s` is `d(s,·)` and
/// `to_t` is `d(·,t)` (the reversed field on directed graphs).
pub fn pair_covered(s: NodeId, t: NodeId, x: &TargetSet, from_s: &DistanceField, to_t: &DistanceField) -> bool {
    let d = from_s.get(t);
    if d == UNREACHABLE || s == t {
        return false;
    }
    x.nodes()
        .iter()
        .any(|&v| v != s && v != t && dist_add(from_s.get(v), to_t.get(v)) == d)
}

/// Exact `C(X)` over `Z`.
pub fn group_coverage(g: &Graph, x: &TargetSet, z: &PairUniverse) -> CoverageState {
    let fields = TargetFields::compute(g, x);
    group_coverage_with(g, x, z, &fields)
}

pub fn group_coverage_with(g: &Graph, x: &TargetSet, z: &PairUniverse, fields: &TargetFields) -> CoverageState {
    let directed = g.is_directed();
    match z {
        PairUniverse::AllPairs => {
            let outside = x.outside();
            let covered = par::sum_range(outside.len(), |i| {
                let s = outside[i];
                let ds = bfs(g, s, false).dist;
                let partners = if directed { &outside[..] } else { &outside[i + 1..] };
                partners.iter().filter(|&&t| t != s && fields.covers(s, t, &ds)).count() as u64
            });
            CoverageState {
                covered,
                uncovered: z.size(g, x) - covered,
                directed,
                flags: None,
            }
        }
        PairUniverse::Explicit(pairs) => {
            let groups = group_by_source(pairs);
            let per_group = par::map_slice(&groups, |&(s, lo, hi)| {
                let ds = bfs(g, s, false).dist;
                pairs[lo..hi]
                    .iter()
                    .map(|&(_, t)| fields.covers(s, t, &ds))
                    .collect::<Vec<bool>>()
            });
            let flags: Vec<bool> = per_group.into_iter().flatten().collect();
            let covered = flags.iter().filter(|&&f| f).count() as u64;
            CoverageState {
                covered,
                uncovered: pairs.len() as u64 - covered,
                directed,
                flags: Some(flags),
            }
        }
    }
}

// (source, start, end) runs over a list sorted by source.
fn group_by_source(pairs: &[(NodeId, NodeId)]) -> Vec<(NodeId, usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let s = pairs[i].0;
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == s {
            j += 1;
        }
        out.push((s, i, j));
        i = j;
    }
    out
}

/// Every uncovered pair of `Z`, sorted. Refuses universes above
/// [`MATERIALIZE_LIMIT`].
pub fn uncovered_pairs(g: &Graph, x: &TargetSet, z: &PairUniverse) -> Result<Vec<(NodeId, NodeId)>> {
    let size = z.size(g, x);
    if size > MATERIALIZE_LIMIT {
        return Err(Error::Guard(format!(
            "pair universe has {size} pairs, above the materialization limit {MATERIALIZE_LIMIT}"
        )));
    }
    let fields = TargetFields::compute(g, x);
    let directed = g.is_directed();
    let rows: Vec<Vec<(NodeId, NodeId)>> = match z {
        PairUniverse::AllPairs => {
            let outside = x.outside();
            par::map_range(outside.len(), |i| {
                let s = outside[i];
                let ds = bfs(g, s, false).dist;
                let partners = if directed { &outside[..] } else { &outside[i + 1..] };
                partners
                    .iter()
                    .filter(|&&t| t != s && !fields.covers(s, t, &ds))
                    .map(|&t| (s, t))
                    .collect()
            })
        }
        PairUniverse::Explicit(pairs) => {
            let groups = group_by_source(pairs);
            par::map_slice(&groups, |&(s, lo, hi)| {
                let ds = bfs(g, s, false).dist;
                pairs[lo..hi]
                    .iter()
                    .filter(|&&(_, t)| !fields.covers(s, t, &ds))
                    .copied()
                    .collect()
            })
        }
    };
    Ok(rows.into_iter().flatten().collect())
}

/// One accepted sample with its stored distance fields.
#[derive(Clone, Debug)]
pub struct SampledPair {
    pub s: NodeId,
    pub t: NodeId,
    /// `d(s, ·)`
    pub from_s: Vec<u32>,
    /// `d(·, t)`; equal to `d(t, ·)` on undirected graphs.
    pub to_t: Vec<u32>,
}

impl SampledPair {
    fn measure(g: &Graph, s: NodeId, t: NodeId) -> SampledPair {
        SampledPair {
            s,
            t,
            from_s: bfs(g, s, false).dist,
            to_t: bfs(g, t, g.is_directed()).dist,
        }
    }

    /// Recompute both fields on `g`, reusing the buffers.
    pub fn refresh(&mut self, g: &Graph, queue: &mut Vec<u32>) {
        bfs_into(g, self.s, false, &mut self.from_s, queue);
        bfs_into(g, self.t, g.is_directed(), &mut self.to_t, queue);
    }

    #[inline]
    pub fn distance(&self) -> u32 {
        self.from_s[self.t]
    }
}

/// How a sample set was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleSource {
    Rejection,
    /// Rejection streak hit the cap; redrawn from the enumerated `M_u`.
    EnumerationFallback,
    /// Every uncovered pair exactly once.
    Exhaustive,
}

impl SampleSource {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleSource::Rejection => "rejection",
            SampleSource::EnumerationFallback => "enumeration-fallback",
            SampleSource::Exhaustive => "exhaustive",
        }
    }
}

/// The sampled uncovered pairs `Q` with their covered flags.
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub pairs: Vec<SampledPair>,
    pub covered: Vec<bool>,
    pub source: SampleSource,
    /// Pair draws from `Z` (accepted + rejected). Zero unless rejection-sampled.
    pub draws: u64,
    /// Exact `|M_u|` when it was enumerated.
    pub enumerated_uncovered: Option<u64>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn covered_count(&self) -> usize {
        self.covered.iter().filter(|&&c| c).count()
    }

    /// `|Z| × acceptance rate`, when rejection sampling ran.
    pub fn estimated_uncovered(&self, universe_size: u64) -> Option<f64> {
        if self.source == SampleSource::Rejection && self.draws > 0 {
            Some(universe_size as f64 * self.pairs.len() as f64 / self.draws as f64)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SamplingConfig {
    /// Consecutive rejections allowed per sample; `None` means `10 · n`.
    pub rejection_cap: Option<usize>,
    pub materialize_limit: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            rejection_cap: None,
            materialize_limit: MATERIALIZE_LIMIT,
        }
    }
}

fn draw_pair<R: Rng>(rng: &mut R, outside: &[NodeId], z: &PairUniverse, directed: bool) -> (NodeId, NodeId) {
    match z {
        PairUniverse::AllPairs => {
            let r = outside.len();
            let i = rng.gen_range(0..r);
            let mut j = rng.gen_range(0..r - 1);
            if j >= i {
                j += 1;
            }
            let (s, t) = (outside[i], outside[j]);
            if directed || s < t {
                (s, t)
            } else {
                (t, s)
            }
        }
        PairUniverse::Explicit(p) => p[rng.gen_range(0..p.len())],
    }
}

/// Draws `q` pairs uniformly with replacement from `M_u` by rejection.
///
/// Sample `i` reads generator stream `i`, so the result is independent of
/// the worker count. If any sample sees `cap` consecutive rejections, the
/// whole set is redrawn from the enumerated `M_u` (when `|Z|` is small enough)
/// or sampling aborts with the observed covered fraction.
pub fn sample_uncovered_pairs(
    g: &Graph,
    x: &TargetSet,
    z: &PairUniverse,
    q: usize,
    seed: u64,
    cfg: &SamplingConfig,
) -> Result<SampleSet> {
    if q == 0 {
        return Err(Error::Config("sample size q must be at least 1".into()));
    }
    let size = z.size(g, x);
    if size == 0 {
        return Err(Error::Sampling("pair universe is empty".into()));
    }
    let cap = cfg.rejection_cap.unwrap_or(10 * g.node_count()).max(1);
    let fields = TargetFields::compute(g, x);
    let outside = x.outside();
    let directed = g.is_directed();

    let attempts: Vec<(Option<(NodeId, NodeId)>, u64)> = par::map_range(q, |i| {
        let mut rng = rng::stream(seed, tag::SAMPLE, i as u64);
        let mut dist = Vec::new();
        let mut queue = Vec::new();
        for k in 0..cap {
            let (s, t) = draw_pair(&mut rng, &outside, z, directed);
            bfs_into(g, s, false, &mut dist, &mut queue);
            if !fields.covers(s, t, &dist) {
                return (Some((s, t)), k as u64 + 1);
            }
        }
        (None, cap as u64)
    });

    let draws: u64 = attempts.iter().map(|a| a.1).sum();
    if attempts.iter().all(|a| a.0.is_some()) {
        let pairs = par::map_slice(&attempts, |a| {
            let (s, t) = a.0.unwrap();
            SampledPair::measure(g, s, t)
        });
        return Ok(SampleSet {
            covered: vec![false; pairs.len()],
            pairs,
            source: SampleSource::Rejection,
            draws,
            enumerated_uncovered: None,
        });
    }

    if size > cfg.materialize_limit {
        let accepted = attempts.iter().filter(|a| a.0.is_some()).count() as f64;
        let covered_frac = 1.0 - accepted / draws as f64;
        return Err(Error::Sampling(format!(
            "rejection streak exceeded {cap}; estimated covered fraction {covered_frac:.6} \
             over {size} pairs is too large to enumerate"
        )));
    }
    let mu = uncovered_pairs(g, x, z)?;
    if mu.is_empty() {
        return Err(Error::Sampling("no uncovered pairs (m_u = 0)".into()));
    }
    let pairs = par::map_range(q, |i| {
        let mut rng = rng::stream(seed, tag::SAMPLE, i as u64);
        let (s, t) = mu[rng.gen_range(0..mu.len())];
        SampledPair::measure(g, s, t)
    });
    Ok(SampleSet {
        covered: vec![false; pairs.len()],
        pairs,
        source: SampleSource::EnumerationFallback,
        draws: 0,
        enumerated_uncovered: Some(mu.len() as u64),
    })
}

/// Every uncovered pair exactly once (`q = m_u`).
pub fn exhaustive_sample(g: &Graph, x: &TargetSet, z: &PairUniverse) -> Result<SampleSet> {
    let mu = uncovered_pairs(g, x, z)?;
    if mu.is_empty() {
        return Err(Error::Sampling("no uncovered pairs (m_u = 0)".into()));
    }
    let pairs = par::map_slice(&mu, |&(s, t)| SampledPair::measure(g, s, t));
    Ok(SampleSet {
        covered: vec![false; pairs.len()],
        pairs,
        source: SampleSource::Exhaustive,
        draws: 0,
        enumerated_uncovered: Some(mu.len() as u64),
    })
}
