//! Seeded random graphs and instances.

use std::collections::HashSet;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, NodeId};

/// G(n, p): each possible edge independently with probability `p`.
pub fn erdos_renyi<R: Rng>(n: usize, p: f64, directed: bool, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        let start = if directed { 0 } else { u + 1 };
        for v in start..n {
            if u != v && rng.gen_bool(p.clamp(0.0, 1.0)) {
                edges.push(Edge(u, v));
            }
        }
    }
    Graph::from_edges(n, directed, &edges).expect("generated edges are valid")
}

/// Preferential attachment: starts from a clique on `attach + 1` nodes, then
/// each new node links to `attach` distinct existing nodes chosen with
/// probability proportional to degree. `m ≈ attach · n`.
pub fn barabasi_albert<R: Rng>(n: usize, attach: usize, rng: &mut R) -> Graph {
    let attach = attach.max(1);
    let seed_nodes = (attach + 1).min(n);
    let mut edges = Vec::with_capacity(n * attach);
    // each endpoint appears once per incident edge
    let mut ends: Vec<NodeId> = Vec::with_capacity(2 * n * attach);
    for u in 0..seed_nodes {
        for v in u + 1..seed_nodes {
            edges.push(Edge(u, v));
            ends.push(u);
            ends.push(v);
        }
    }
    let mut chosen = HashSet::with_capacity(attach);
    let mut picks = Vec::with_capacity(attach);
    for v in seed_nodes..n {
        chosen.clear();
        picks.clear();
        while picks.len() < attach.min(v) {
            let u = if ends.is_empty() {
                rng.gen_range(0..v)
            } else {
                ends[rng.gen_range(0..ends.len())]
            };
            if chosen.insert(u) {
                picks.push(u);
            }
        }
        for &u in &picks {
            edges.push(Edge(u, v));
            ends.push(u);
            ends.push(v);
        }
    }
    Graph::from_edges(n, false, &edges).expect("generated edges are valid")
}

/// Uniform random recursive tree: node `v` attaches to a uniform earlier node.
pub fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Graph {
    let edges: Vec<Edge> = (1..n).map(|v| Edge(rng.gen_range(0..v), v)).collect();
    Graph::from_edges(n, false, &edges).expect("generated edges are valid")
}

/// `count` distinct nodes, sorted.
pub fn random_targets<R: Rng>(n: usize, count: usize, rng: &mut R) -> Vec<NodeId> {
    let mut v = index::sample(rng, n, count.min(n)).into_vec();
    v.sort_unstable();
    v
}

/// Generator spec as written on the command line: `ba:N:ATTACH`,
/// `er:N:P`, `er-directed:N:P`, `tree:N`.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    BarabasiAlbert { n: usize, attach: usize },
    ErdosRenyi { n: usize, p: f64, directed: bool },
    Tree { n: usize },
}

impl GeneratorSpec {
    pub fn generate<R: Rng>(&self, rng: &mut R) -> Graph {
        match *self {
            GeneratorSpec::BarabasiAlbert { n, attach } => barabasi_albert(n, attach, rng),
            GeneratorSpec::ErdosRenyi { n, p, directed } => erdos_renyi(n, p, directed, rng),
            GeneratorSpec::Tree { n } => random_tree(n, rng),
        }
    }

    pub fn is_directed(&self) -> bool {
        matches!(self, GeneratorSpec::ErdosRenyi { directed: true, .. })
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || {
            Error::Config(format!(
                "bad generator `{s}` (expected ba:N:M, er:N:P, er-directed:N:P or tree:N)"
            ))
        };
        let num = |i: usize| parts.get(i).and_then(|p| p.parse::<usize>().ok()).ok_or_else(bad);
        let prob = |i: usize| parts.get(i).and_then(|p| p.parse::<f64>().ok()).ok_or_else(bad);
        match parts.first().copied() {
            Some("ba") if parts.len() == 3 => Ok(GeneratorSpec::BarabasiAlbert {
                n: num(1)?,
                attach: num(2)?,
            }),
            Some("er") if parts.len() == 3 => Ok(GeneratorSpec::ErdosRenyi {
                n: num(1)?,
                p: prob(2)?,
                directed: false,
            }),
            Some("er-directed") if parts.len() == 3 => Ok(GeneratorSpec::ErdosRenyi {
                n: num(1)?,
                p: prob(2)?,
                directed: true,
            }),
            Some("tree") if parts.len() == 2 => Ok(GeneratorSpec::Tree { n: num(1)? }),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn ba_edge_count() {
        let g = barabasi_albert(2000, 3, &mut rng::stream(1, rng::tag::GRAPH, 0));
        assert_eq!(g.node_count(), 2000);
        // 6 clique edges + 3 per later node
        assert_eq!(g.edge_count(), 6 + 3 * 1996);
    }

    #[test]
    fn tree_has_n_minus_one_edges() {
        let g = random_tree(30, &mut rng::stream(2, rng::tag::GRAPH, 0));
        assert_eq!(g.edge_count(), 29);
    }

    #[test]
    fn generators_are_seeded() {
        let a = erdos_renyi(40, 0.1, true, &mut rng::stream(3, rng::tag::GRAPH, 0));
        let b = erdos_renyi(40, 0.1, true, &mut rng::stream(3, rng::tag::GRAPH, 0));
        assert_eq!(a, b);
    }

    #[test]
    fn parse_specs() {
        assert_eq!(
            "ba:2000:3".parse::<GeneratorSpec>().unwrap(),
            GeneratorSpec::BarabasiAlbert { n: 2000, attach: 3 }
        );
        assert_eq!(
            "er-directed:10:0.5".parse::<GeneratorSpec>().unwrap(),
            GeneratorSpec::ErdosRenyi {
                n: 10,
                p: 0.5,
                directed: true
            }
        );
        assert!("ba:10".parse::<GeneratorSpec>().is_err());
        assert!("grid:3:3".parse::<GeneratorSpec>().is_err());
    }
}
