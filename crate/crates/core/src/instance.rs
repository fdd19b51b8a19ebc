//! Instance files and the instance echo embedded in reports.
//!
//! Text format, one directive per line, `#` starts a comment:
//!
//! ```text
//! directed false
//! setting S1
//! budget 1
//! enforce-s2 false
//! nodes a b c d          # optional; fixes id order and allows isolated nodes
//! graph edges.txt        # optional edge-list file, relative to the instance
//! edge a b               # inline edges, repeatable
//! targets a
//! candidates auto        # or repeated `candidate u v`
//! pairs all              # or `pairs file PATH`, or repeated `pair s t`
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coverage::{PairUniverse, TargetSet};
use crate::error::{Error, Result};
use crate::graph::{load_edge_list, Edge, Graph, NodeId};
use crate::problem::{build_candidates, ProblemInstance, Setting};

/// Serializable form of a problem instance, with node labels in place of ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceEcho {
    pub directed: bool,
    pub setting: Setting,
    pub budget: usize,
    pub enforce_s2: bool,
    /// Id → label table; position is the dense id.
    pub nodes: Vec<String>,
    pub targets: Vec<String>,
    pub candidates: Vec<(String, String)>,
    /// `None` means all pairs over `V \ X`.
    pub pairs: Option<Vec<(String, String)>>,
    pub edges: Vec<(String, String)>,
}

impl From<&ProblemInstance> for InstanceEcho {
    fn from(p: &ProblemInstance) -> Self {
        let g = &p.graph;
        let lab = |v: NodeId| g.label(v).to_string();
        let pair = |e: Edge| (lab(e.0), lab(e.1));
        InstanceEcho {
            directed: g.is_directed(),
            setting: p.setting,
            budget: p.budget,
            enforce_s2: p.enforce_s2,
            nodes: g.labels().to_vec(),
            targets: p.targets.nodes().iter().map(|&v| lab(v)).collect(),
            candidates: p.candidates.iter().map(|&e| pair(e)).collect(),
            pairs: match &p.pairs {
                PairUniverse::AllPairs => None,
                PairUniverse::Explicit(v) => Some(v.iter().map(|&(s, t)| pair(Edge(s, t))).collect()),
            },
            edges: g.edges().iter().map(|&e| pair(e)).collect(),
        }
    }
}

impl InstanceEcho {
    pub fn to_instance(&self) -> Result<ProblemInstance> {
        let index: HashMap<&str, NodeId> = self.nodes.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let id = |s: &str| index.get(s).copied().ok_or_else(|| Error::UnknownNode(s.to_string()));
        let edge = |(a, b): &(String, String)| Ok(Edge(id(a)?, id(b)?));
        let edges = self.edges.iter().map(edge).collect::<Result<Vec<_>>>()?;
        let graph = Graph::from_labeled_edges(self.nodes.clone(), self.directed, &edges)?;
        let targets = self.targets.iter().map(|s| id(s)).collect::<Result<Vec<_>>>()?;
        let targets = TargetSet::new(graph.node_count(), &targets)?;
        let candidates = self.candidates.iter().map(edge).collect::<Result<Vec<_>>>()?;
        let pairs = match &self.pairs {
            None => PairUniverse::AllPairs,
            Some(v) => {
                let raw = v
                    .iter()
                    .map(|(s, t)| Ok((id(s)?, id(t)?)))
                    .collect::<Result<Vec<_>>>()?;
                PairUniverse::explicit(&graph, &targets, &raw)?
            }
        };
        let p = ProblemInstance {
            graph,
            targets,
            candidates,
            pairs,
            budget: self.budget,
            setting: self.setting,
            enforce_s2: self.enforce_s2,
        };
        p.validate()?;
        Ok(p)
    }

    /// The instance in the text file format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "directed {}", self.directed);
        let _ = writeln!(s, "setting {}", self.setting);
        let _ = writeln!(s, "budget {}", self.budget);
        let _ = writeln!(s, "enforce-s2 {}", self.enforce_s2);
        let _ = writeln!(s, "nodes {}", self.nodes.join(" "));
        let _ = writeln!(s, "targets {}", self.targets.join(" "));
        for (a, b) in &self.candidates {
            let _ = writeln!(s, "candidate {a} {b}");
        }
        match &self.pairs {
            None => s.push_str("pairs all\n"),
            Some(v) => {
                for (a, b) in v {
                    let _ = writeln!(s, "pair {a} {b}");
                }
            }
        }
        for (a, b) in &self.edges {
            let _ = writeln!(s, "edge {a} {b}");
        }
        s
    }
}

pub fn write_instance(p: &ProblemInstance) -> String {
    InstanceEcho::from(p).to_text()
}

fn parse_bool(line: usize, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse {
            line,
            msg: format!("expected true/false, got `{v}`"),
        }),
    }
}

/// Interns labels in first-seen order.
#[derive(Default)]
struct Labels {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    fixed: bool,
}

impl Labels {
    fn intern(&mut self, s: &str) -> Result<NodeId> {
        if let Some(&i) = self.index.get(s) {
            return Ok(i);
        }
        if self.fixed {
            return Err(Error::UnknownNode(s.to_string()));
        }
        self.names.push(s.to_string());
        self.index.insert(s.to_string(), self.names.len() - 1);
        Ok(self.names.len() - 1)
    }
}

/// Parses the instance text format. `base` resolves relative file paths.
pub fn parse_instance(text: &str, base: Option<&Path>) -> Result<ProblemInstance> {
    let resolve = |p: &str| match base {
        Some(b) => b.join(p),
        None => Path::new(p).to_path_buf(),
    };
    let mut directed = None;
    let mut setting = None;
    let mut budget = None;
    let mut enforce_s2 = false;
    let mut labels = Labels::default();
    let mut edges: Vec<Edge> = Vec::new();
    let mut targets: Vec<String> = Vec::new();
    let mut cand_tokens: Vec<(String, String)> = Vec::new();
    let mut auto_candidates = false;
    let mut pair_tokens: Vec<(String, String)> = Vec::new();
    let mut pair_file = None;
    let mut explicit_pairs = false;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut it = body.split_whitespace();
        let key = it.next().unwrap_or_default();
        let rest: Vec<&str> = it.collect();
        let bad = |msg: &str| Error::Parse {
            line,
            msg: format!("`{key}`: {msg}"),
        };
        let two = || -> Result<(String, String)> {
            match rest.as_slice() {
                [a, b] => Ok((a.to_string(), b.to_string())),
                _ => Err(bad("expected two node tokens")),
            }
        };
        let one = || -> Result<&str> {
            match rest.as_slice() {
                [a] => Ok(*a),
                _ => Err(bad("expected one value")),
            }
        };
        match key {
            "directed" => directed = Some(parse_bool(line, one()?)?),
            "setting" => setting = Some(one()?.parse::<Setting>()?),
            "budget" => budget = Some(one()?.parse::<usize>().map_err(|_| bad("expected an integer"))?),
            "enforce-s2" => enforce_s2 = parse_bool(line, one()?)?,
            "nodes" => {
                if !labels.names.is_empty() {
                    return Err(bad("must come before any edge"));
                }
                for t in &rest {
                    labels.intern(t)?;
                }
                labels.fixed = true;
            }
            "graph" => {
                let path = resolve(one()?);
                let file = fs::File::open(&path)?;
                let (g, _) = load_edge_list(std::io::BufReader::new(file), directed.unwrap_or(false))?;
                for &Edge(a, b) in g.edges() {
                    edges.push(Edge(labels.intern(g.label(a))?, labels.intern(g.label(b))?));
                }
            }
            "edge" => {
                let (a, b) = two()?;
                edges.push(Edge(labels.intern(&a)?, labels.intern(&b)?));
            }
            "targets" => targets.extend(rest.iter().map(|s| s.to_string())),
            "candidates" => match one()?.to_ascii_lowercase().as_str() {
                "auto" => auto_candidates = true,
                s if s.starts_with("auto:") => {
                    auto_candidates = true;
                    setting = Some(s["auto:".len()..].parse()?);
                }
                _ => return Err(bad("expected `auto` or `auto:SETTING`")),
            },
            "candidate" => cand_tokens.push(two()?),
            "pairs" => match rest.as_slice() {
                ["all"] => {}
                ["file", path] => {
                    pair_file = Some(resolve(path));
                    explicit_pairs = true;
                }
                _ => return Err(bad("expected `all` or `file PATH`")),
            },
            "pair" => {
                pair_tokens.push(two()?);
                explicit_pairs = true;
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown directive `{key}`"),
                })
            }
        }
    }

    let directed = directed.unwrap_or_else(|| setting.is_some_and(|s: Setting| s.is_directed()));
    let setting = setting.unwrap_or_else(|| Setting::incident(directed));
    let budget = budget.ok_or_else(|| Error::Config("instance has no `budget`".into()))?;
    // targets and candidates may name isolated nodes when `nodes` is absent
    let target_ids = targets.iter().map(|s| labels.intern(s)).collect::<Result<Vec<_>>>()?;
    let cand = cand_tokens
        .iter()
        .map(|(a, b)| Ok(Edge(labels.intern(a)?, labels.intern(b)?)))
        .collect::<Result<Vec<_>>>()?;
    let graph = Graph::from_labeled_edges(labels.names, directed, &edges)?;
    let x = TargetSet::new(graph.node_count(), &target_ids)?;
    let candidates = if auto_candidates {
        if !cand.is_empty() {
            return Err(Error::Config(
                "both `candidates auto` and explicit candidates given".into(),
            ));
        }
        build_candidates(&graph, &x, setting)?
    } else {
        cand
    };
    let pairs = if explicit_pairs {
        let mut raw = Vec::new();
        for (s, t) in &pair_tokens {
            raw.push((graph.resolve(s)?, graph.resolve(t)?));
        }
        if let Some(path) = pair_file {
            raw.extend(read_node_pairs(&graph, std::io::BufReader::new(fs::File::open(path)?))?);
        }
        PairUniverse::explicit(&graph, &x, &raw)?
    } else {
        PairUniverse::AllPairs
    };
    let p = ProblemInstance {
        graph,
        targets: x,
        candidates,
        pairs,
        budget,
        setting,
        enforce_s2,
    };
    p.validate()?;
    Ok(p)
}

pub fn load_instance(path: &Path) -> Result<ProblemInstance> {
    let text = fs::read_to_string(path)?;
    parse_instance(&text, path.parent())
}

/// Reads `u v` label pairs, one per line, resolved against `g`.
pub fn read_node_pairs<R: BufRead>(g: &Graph, reader: R) -> Result<Vec<(NodeId, NodeId)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let tok: Vec<&str> = body.split_whitespace().collect();
        if tok.len() < 2 {
            return Err(Error::Parse {
                line: i + 1,
                msg: "expected two node tokens".into(),
            });
        }
        out.push((g.resolve(tok[0])?, g.resolve(tok[1])?));
    }
    Ok(out)
}

/// Candidate edges from a file of `u v` lines, in file order.
pub fn read_candidates<R: BufRead>(g: &Graph, reader: R) -> Result<Vec<Edge>> {
    Ok(read_node_pairs(g, reader)?
        .into_iter()
        .map(|(a, b)| Edge(a, b))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const P4: &str = "directed false\nsetting S1\nbudget 1\nedge a b\nedge b c\nedge c d\ntargets a\ncandidates auto\n";

    #[test]
    fn parses_p4() {
        let p = parse_instance(P4, None).unwrap();
        assert_eq!(p.graph.node_count(), 4);
        assert_eq!(p.candidates, vec![Edge(0, 2), Edge(0, 3)]);
        assert_eq!(p.targets.nodes(), &[0]);
        assert_eq!(p.pairs, PairUniverse::AllPairs);
    }

    #[test]
    fn text_round_trip() {
        let p = parse_instance(P4, None).unwrap();
        let q = parse_instance(&write_instance(&p), None).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn echo_round_trip_with_pairs_and_isolated_node() {
        let text = "budget 1\nnodes x a b c\nedge a b\nedge b c\ntargets x\ncandidate x a\ncandidate x c\npair a c\n";
        let p = parse_instance(text, None).unwrap();
        assert_eq!(p.graph.node_count(), 4);
        let echo = InstanceEcho::from(&p);
        let json = serde_json::to_string(&echo).unwrap();
        let back: InstanceEcho = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_instance().unwrap(), p);
    }

    #[test]
    fn errors_are_reported() {
        assert!(matches!(
            parse_instance("budget x\n", None),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(parse_instance("bogus 1\n", None), Err(Error::Parse { .. })));
        let err = parse_instance("budget 5\nedge a b\nedge b c\ntargets a\ncandidate a b\n", None).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("candidate present") && msg.contains("budget exceeds candidates"),
            "{msg}"
        );
        assert!(matches!(
            parse_instance("budget 1\nnodes a b\nedge a z\n", None),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn directed_setting_implies_directed() {
        let p = parse_instance(
            "setting S4\nbudget 1\nedge a b\nedge b c\ntargets c\ncandidates auto\n",
            None,
        )
        .unwrap();
        assert!(p.graph.is_directed());
        assert_eq!(p.candidates, vec![Edge(0, 2), Edge(2, 0), Edge(2, 1)]);
    }
}
