//! Immutable graph over dense node ids, BFS distance fields, and
//! copy-on-add edge mutation.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

pub type NodeId = usize;

/// Distance sentinel for unreachable nodes. Strictly greater than any hop
/// count; [`dist_add`] saturates to it.
pub const UNREACHABLE: u32 = u32::MAX;

/// Sentinel-saturating distance addition.
#[inline]
pub fn dist_add(a: u32, b: u32) -> u32 {
    if a == UNREACHABLE || b == UNREACHABLE {
        UNREACHABLE
    } else {
        a + b
    }
}

/// An edge `(u, v)`. For undirected graphs the orientation is irrelevant and
/// [`Edge::normalized`] puts the smaller id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge(pub NodeId, pub NodeId);

impl Edge {
    pub fn normalized(self, directed: bool) -> Edge {
        if directed || self.0 <= self.1 {
            self
        } else {
            Edge(self.1, self.0)
        }
    }

    pub fn touches(&self, v: NodeId) -> bool {
        self.0 == v || self.1 == v
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

/// Counts of lines dropped while loading an edge list.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub duplicates: usize,
    pub self_loops: usize,
}

/// Compressed adjacency: neighbors of `v` are `targets[offsets[v]..offsets[v+1]]`,
/// sorted by id.
#[derive(Clone, Debug, Default)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Csr {
    fn build(n: usize, arcs: impl Iterator<Item = (usize, usize)> + Clone) -> Csr {
        let mut offsets = vec![0usize; n + 1];
        for (u, _) in arcs.clone() {
            offsets[u + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[n]];
        for (u, v) in arcs {
            targets[fill[u]] = v as u32;
            fill[u] += 1;
        }
        for v in 0..n {
            targets[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Csr { offsets, targets }
    }

    #[inline]
    fn neighbors(&self, v: NodeId) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

#[derive(Clone)]
pub struct Graph {
    directed: bool,
    out: Csr,
    // in-neighbors; empty for undirected graphs
    inc: Csr,
    edge_set: HashSet<(u32, u32)>,
    // normalized, sorted
    edge_list: Vec<Edge>,
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.node_count())
            .field("m", &self.edge_count())
            .field("directed", &self.directed)
            .finish()
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.directed == other.directed && self.labels == other.labels && self.edge_list == other.edge_list
    }
}

impl Eq for Graph {}

impl Graph {
    /// Builds a graph on `n` nodes labelled `0..n`. Duplicate edges are
    /// merged; a self-loop is an error.
    pub fn from_edges(n: usize, directed: bool, edges: &[Edge]) -> Result<Graph> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::from_labeled_edges(labels, directed, edges)
    }

    pub fn from_labeled_edges(labels: Vec<String>, directed: bool, edges: &[Edge]) -> Result<Graph> {
        let n = labels.len();
        let mut set = HashSet::with_capacity(edges.len());
        let mut list = Vec::with_capacity(edges.len());
        for &e in edges {
            if e.0 == e.1 {
                return Err(Error::SelfLoop(e.0));
            }
            if e.0 >= n || e.1 >= n {
                return Err(Error::Config(format!("edge {e} references a node >= {n}")));
            }
            let e = e.normalized(directed);
            if set.insert((e.0 as u32, e.1 as u32)) {
                list.push(e);
            }
        }
        list.sort_unstable();
        Ok(Self::assemble(labels, directed, set, list))
    }

    fn assemble(labels: Vec<String>, directed: bool, edge_set: HashSet<(u32, u32)>, edge_list: Vec<Edge>) -> Graph {
        let n = labels.len();
        let (out, inc) = if directed {
            (
                Csr::build(n, edge_list.iter().map(|e| (e.0, e.1))),
                Csr::build(n, edge_list.iter().map(|e| (e.1, e.0))),
            )
        } else {
            let both = edge_list.iter().flat_map(|e| [(e.0, e.1), (e.1, e.0)].into_iter());
            (Csr::build(n, both), Csr::default())
        };
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Graph {
            directed,
            out,
            inc,
            edge_set,
            edge_list,
            labels,
            index,
        }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_list.len()
    }

    /// Normalized edges in sorted order.
    pub fn edges(&self) -> &[Edge] {
        &self.edge_list
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        let e = Edge(u, v).normalized(self.directed);
        self.edge_set.contains(&(e.0 as u32, e.1 as u32))
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.has_edge(e.0, e.1)
    }

    /// Out-neighbors (all neighbors when undirected), sorted by id.
    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[u32] {
        self.out.neighbors(v)
    }

    /// In-neighbors (all neighbors when undirected), sorted by id.
    #[inline]
    pub fn in_neighbors(&self, v: NodeId) -> &[u32] {
        if self.directed {
            self.inc.neighbors(v)
        } else {
            self.out.neighbors(v)
        }
    }

    /// Out-degree plus in-degree for directed graphs.
    pub fn degree(&self, v: NodeId) -> usize {
        if self.directed {
            self.out.neighbors(v).len() + self.inc.neighbors(v).len()
        } else {
            self.out.neighbors(v).len()
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn resolve(&self, label: &str) -> Result<NodeId> {
        self.node_id(label).ok_or_else(|| Error::UnknownNode(label.to_string()))
    }

    /// New graph with `added` inserted; `self` is untouched. Edges already
    /// present (or repeated in `added`) are ignored.
    pub fn with_edges(&self, added: &[Edge]) -> Result<Graph> {
        let n = self.node_count();
        let mut set = self.edge_set.clone();
        let mut list = self.edge_list.clone();
        for &e in added {
            if e.0 == e.1 {
                return Err(Error::SelfLoop(e.0));
            }
            if e.0 >= n || e.1 >= n {
                return Err(Error::Config(format!("edge {e} references a node >= {n}")));
            }
            let e = e.normalized(self.directed);
            if set.insert((e.0 as u32, e.1 as u32)) {
                list.push(e);
            }
        }
        if list.len() == self.edge_list.len() {
            return Ok(self.clone());
        }
        list.sort_unstable();
        Ok(Self::assemble(self.labels.clone(), self.directed, set, list))
    }
}

/// Parses a whitespace-separated edge list. Tokens become dense ids in
/// first-seen order; `#` starts a comment line; tokens past the second are
/// ignored (weights, timestamps).
pub fn load_edge_list<R: BufRead>(reader: R, directed: bool) -> Result<(Graph, LoadStats)> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, NodeId> = HashMap::new();
    let mut intern = |tok: &str, labels: &mut Vec<String>| -> NodeId {
        if let Some(&id) = index.get(tok) {
            return id;
        }
        let id = labels.len();
        labels.push(tok.to_string());
        index.insert(tok.to_string(), id);
        id
    };

    let mut stats = LoadStats::default();
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let (a, b) = match (toks.next(), toks.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected two endpoint tokens, got `{trimmed}`"),
                })
            }
        };
        let u = intern(a, &mut labels);
        let v = intern(b, &mut labels);
        if u == v {
            stats.self_loops += 1;
            continue;
        }
        let e = Edge(u, v).normalized(directed);
        if seen.insert(e) {
            edges.push(e);
        } else {
            stats.duplicates += 1;
        }
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let g = Graph::from_labeled_edges(labels, directed, &edges)?;
    Ok((g, stats))
}

/// Convenience wrapper over [`load_edge_list`] for in-memory text.
pub fn parse_edge_list(text: &str, directed: bool) -> Result<(Graph, LoadStats)> {
    load_edge_list(text.as_bytes(), directed)
}

/// Single-source hop distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceField {
    pub source: NodeId,
    /// `d(source, v)`, or `d(v, source)` for a reversed field.
    pub dist: Vec<u32>,
}

impl DistanceField {
    #[inline]
    pub fn get(&self, v: NodeId) -> u32 {
        self.dist[v]
    }

    pub fn reachable(&self, v: NodeId) -> bool {
        self.dist[v] != UNREACHABLE
    }
}

/// Breadth-first distances from `source`. With `reversed` on a directed graph
/// the search follows in-edges, giving `d(v, source)`.
pub fn bfs(g: &Graph, source: NodeId, reversed: bool) -> DistanceField {
    let mut dist = Vec::new();
    let mut queue = Vec::new();
    bfs_into(g, source, reversed, &mut dist, &mut queue);
    DistanceField { source, dist }
}

/// [`bfs`] writing into caller-owned buffers.
pub fn bfs_into(g: &Graph, source: NodeId, reversed: bool, dist: &mut Vec<u32>, queue: &mut Vec<u32>) {
    let n = g.node_count();
    dist.clear();
    dist.resize(n, UNREACHABLE);
    queue.clear();
    dist[source] = 0;
    queue.push(source as u32);
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head] as usize;
        head += 1;
        let next = dist[u] + 1;
        let nbrs = if reversed { g.in_neighbors(u) } else { g.neighbors(u) };
        for &w in nbrs {
            let w = w as usize;
            if dist[w] == UNREACHABLE {
                dist[w] = next;
                queue.push(w as u32);
            }
        }
    }
}

/// Row-major all-pairs hop distances, `n * n` entries.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    pub fn compute(g: &Graph) -> DistanceMatrix {
        let n = g.node_count();
        let rows = par::map_range(n, |s| bfs(g, s, false).dist);
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            data.extend_from_slice(&r);
        }
        DistanceMatrix { n, data }
    }

    #[inline]
    pub fn get(&self, s: NodeId, t: NodeId) -> u32 {
        self.data[s * self.n + t]
    }

    #[inline]
    pub fn row(&self, s: NodeId) -> &[u32] {
        &self.data[s * self.n..(s + 1) * self.n]
    }

    pub fn node_count(&self) -> usize {
        self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<Edge> = (0..n - 1).map(|i| Edge(i, i + 1)).collect();
        Graph::from_edges(n, false, &edges).unwrap()
    }

    #[test]
    fn load_simple() {
        let (g, stats) = parse_edge_list("0 1\n1 2\n", false).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        assert_eq!(stats, LoadStats::default());
    }

    #[test]
    fn load_drops_duplicates_and_loops() {
        let (g, stats) = parse_edge_list("a b\nb a\na a\n", false).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert_eq!(stats.duplicates, 1);
        assert_eq!(stats.self_loops, 1);
        assert_eq!(g.label(0), "a");
    }

    #[test]
    fn load_directed_keeps_both_orientations() {
        let (g, _) = parse_edge_list("0 1\n1 0\n", true).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 2));
    }

    #[test]
    fn load_comments_and_extra_columns() {
        let (g, _) = parse_edge_list("# header\n\n5 7 0.3\n7 9 1\n", false).unwrap();
        assert_eq!(g.labels(), &["5", "7", "9"]);
        assert!(g.has_edge(g.resolve("9").unwrap(), g.resolve("7").unwrap()));
    }

    #[test]
    fn load_errors() {
        match parse_edge_list("0 1\n2\n", false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_edge_list("# nothing\n", false), Err(Error::EmptyGraph)));
        assert!(matches!(parse_edge_list("a a\n", false), Err(Error::EmptyGraph)));
    }

    #[test]
    fn bfs_path_star_disconnected() {
        assert_eq!(bfs(&path(5), 2, false).dist, vec![2, 1, 0, 1, 2]);

        let star: Vec<Edge> = (1..=5).map(|i| Edge(0, i)).collect();
        let g = Graph::from_edges(6, false, &star).unwrap();
        let d = bfs(&g, 1, false);
        assert_eq!(d.get(0), 1);
        assert!((2..=5).all(|v| d.get(v) == 2));

        let g = Graph::from_edges(4, false, &[Edge(0, 1), Edge(2, 3)]).unwrap();
        let d = bfs(&g, 0, false);
        assert_eq!(d.get(2), UNREACHABLE);
        assert_eq!(d.get(3), UNREACHABLE);
        assert!(!d.reachable(3));
    }

    #[test]
    fn bfs_reversed_directed() {
        let g = Graph::from_edges(3, true, &[Edge(0, 1), Edge(1, 2)]).unwrap();
        assert_eq!(bfs(&g, 2, true).dist, vec![2, 1, 0]);
        assert_eq!(bfs(&g, 2, false).dist, vec![UNREACHABLE, UNREACHABLE, 0]);
    }

    #[test]
    fn with_edges_cases() {
        let p4 = path(4);
        let c4 = p4.with_edges(&[Edge(0, 3)]).unwrap();
        assert_eq!(c4.edge_count(), 4);
        assert_eq!(p4.edge_count(), 3);
        assert_eq!(p4.with_edges(&[Edge(2, 1)]).unwrap(), p4);
        assert_eq!(p4.with_edges(&[Edge(0, 2), Edge(2, 0)]).unwrap().edge_count(), 4);
        assert!(matches!(p4.with_edges(&[Edge(1, 1)]), Err(Error::SelfLoop(1))));
    }

    #[test]
    fn adjacency_sorted_and_symmetric() {
        let g = Graph::from_edges(4, false, &[Edge(3, 0), Edge(0, 2), Edge(1, 0)]).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2, 3]);
        assert_eq!(g.neighbors(3), &[0]);
        assert_eq!(g.degree(0), 3);
    }

    #[test]
    fn sentinel_saturates() {
        assert_eq!(dist_add(UNREACHABLE, 1), UNREACHABLE);
        assert_eq!(dist_add(3, UNREACHABLE), UNREACHABLE);
        assert_eq!(dist_add(3, 4), 7);
    }
}
