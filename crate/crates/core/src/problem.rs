//! Problem instances (graph, targets, candidates, budget) and the selection
//! report every optimizer returns.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coverage::{group_coverage, CoverageState, PairUniverse, TargetSet};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, NodeId};

/// Which edges may appear in the candidate set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    /// Undirected, any absent edge.
    S0,
    /// Undirected, absent edges with one endpoint in `X`.
    S1,
    /// Directed, any absent edge.
    S3,
    /// Directed, absent edges between `X` and `V \ X`, either orientation.
    S4,
}

impl Setting {
    pub fn is_directed(self) -> bool {
        matches!(self, Setting::S3 | Setting::S4)
    }

    /// Every candidate touches the target set.
    pub fn target_incident(self) -> bool {
        matches!(self, Setting::S1 | Setting::S4)
    }

    /// The target-incident setting for the given direction.
    pub fn incident(directed: bool) -> Setting {
        if directed {
            Setting::S4
        } else {
            Setting::S1
        }
    }

    pub fn unrestricted(directed: bool) -> Setting {
        if directed {
            Setting::S3
        } else {
            Setting::S0
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Setting::S0 => "S0",
            Setting::S1 => "S1",
            Setting::S3 => "S3",
            Setting::S4 => "S4",
        };
        f.write_str(s)
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Setting> {
        match s.to_ascii_uppercase().as_str() {
            "S0" => Ok(Setting::S0),
            "S1" => Ok(Setting::S1),
            "S3" => Ok(Setting::S3),
            "S4" => Ok(Setting::S4),
            other => Err(Error::Config(format!(
                "unknown setting `{other}` (expected S0, S1, S3, S4)"
            ))),
        }
    }
}

/// Absent edges allowed by `setting`, sorted by endpoint ids.
pub fn build_candidates(g: &Graph, x: &TargetSet, setting: Setting) -> Result<Vec<Edge>> {
    if setting.is_directed() != g.is_directed() {
        return Err(Error::Config(format!(
            "setting {setting} does not match a {} graph",
            if g.is_directed() { "directed" } else { "undirected" }
        )));
    }
    let n = g.node_count();
    let mut out = Vec::new();
    match setting {
        Setting::S1 => {
            for &u in x.nodes() {
                for v in (0..n).filter(|&v| !x.contains(v)) {
                    if !g.has_edge(u, v) {
                        out.push(Edge(u, v).normalized(false));
                    }
                }
            }
        }
        Setting::S4 => {
            for &u in x.nodes() {
                for v in (0..n).filter(|&v| !x.contains(v)) {
                    if !g.has_edge(u, v) {
                        out.push(Edge(u, v));
                    }
                    if !g.has_edge(v, u) {
                        out.push(Edge(v, u));
                    }
                }
            }
        }
        Setting::S0 => {
            for u in 0..n {
                for v in u + 1..n {
                    if !g.has_edge(u, v) {
                        out.push(Edge(u, v));
                    }
                }
            }
        }
        Setting::S3 => {
            for u in 0..n {
                for v in 0..n {
                    if u != v && !g.has_edge(u, v) {
                        out.push(Edge(u, v));
                    }
                }
            }
        }
    }
    out.sort_unstable();
    if out.is_empty() {
        return Err(Error::NoCandidates);
    }
    Ok(out)
}

/// Graph, target set `X`, candidates `Γ` (ordered: the index breaks ties),
/// pair universe `Z`, budget `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    pub graph: Graph,
    pub targets: TargetSet,
    pub candidates: Vec<Edge>,
    pub pairs: PairUniverse,
    pub budget: usize,
    pub setting: Setting,
    /// Request S2 certification (small instances only); advisory.
    pub enforce_s2: bool,
}

impl ProblemInstance {
    /// Instance with automatically built candidates for `setting` and all pairs.
    pub fn auto(graph: Graph, targets: &[NodeId], setting: Setting, budget: usize) -> Result<ProblemInstance> {
        let x = TargetSet::new(graph.node_count(), targets)?;
        let candidates = build_candidates(&graph, &x, setting)?;
        let p = ProblemInstance {
            graph,
            targets: x,
            candidates,
            pairs: PairUniverse::AllPairs,
            budget,
            setting,
            enforce_s2: false,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks every instance invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let g = &self.graph;
        let n = g.node_count();
        let mut errs = Vec::new();
        if self.setting.is_directed() != g.is_directed() {
            errs.push(format!("setting {} does not match graph directedness", self.setting));
        }
        if self.targets.is_empty() {
            errs.push("target set is empty".into());
        } else if self.targets.len() >= n {
            errs.push("target set covers every node".into());
        }
        let mut seen = HashSet::new();
        for &e in &self.candidates {
            if e.0 >= n || e.1 >= n {
                errs.push(format!("candidate {e} out of range"));
                continue;
            }
            let name = format!("({},{})", g.label(e.0), g.label(e.1));
            if e.0 == e.1 {
                errs.push(format!("candidate {name} is a self-loop"));
                continue;
            }
            if g.contains(e) {
                errs.push(format!("candidate present: {name} already in the graph"));
            }
            if !seen.insert(e.normalized(g.is_directed())) {
                errs.push(format!("duplicate candidate {name}"));
            }
            if self.setting.target_incident() {
                let (a, b) = (self.targets.contains(e.0), self.targets.contains(e.1));
                if !(a || b) {
                    errs.push(format!("candidate {name} has no endpoint in the target set"));
                } else if a && b {
                    errs.push(format!("candidate {name} joins two target nodes"));
                }
            }
        }
        if self.budget == 0 {
            errs.push("budget must be at least 1".into());
        }
        if self.budget > self.candidates.len() {
            errs.push(format!(
                "budget exceeds candidates: k = {} > |candidates| = {}",
                self.budget,
                self.candidates.len()
            ));
        }
        if let PairUniverse::Explicit(pairs) = &self.pairs {
            for &(s, t) in pairs {
                if s >= n || t >= n {
                    errs.push(format!("pair ({s},{t}) out of range"));
                } else if self.targets.contains(s) || self.targets.contains(t) {
                    errs.push(format!("pair ({},{}) touches the target set", g.label(s), g.label(t)));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(errs))
        }
    }

    pub fn coverage(&self, g: &Graph) -> CoverageState {
        group_coverage(g, &self.targets, &self.pairs)
    }

    pub fn edge_label(&self, e: Edge) -> (String, String) {
        (self.graph.label(e.0).to_string(), self.graph.label(e.1).to_string())
    }
}

/// How an iteration's score was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainKind {
    /// Exact change in coverage.
    Exact,
    /// Newly covered sampled pairs.
    Sampled,
    /// Degree of the non-target endpoint.
    Degree,
    /// Sampled pairs newly covered by the picked node (adaptive).
    AdaptiveCoverage,
    /// No score; uniform pick.
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub step: usize,
    pub edge: Edge,
    pub score: i64,
    pub kind: GainKind,
    /// Sampled score scaled by `m_u / q` (BUS only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub covered: u64,
    pub uncovered: u64,
    pub uncovered_ordered: u64,
}

impl From<&CoverageState> for CoverageSummary {
    fn from(c: &CoverageState) -> Self {
        CoverageSummary {
            covered: c.covered,
            uncovered: c.uncovered,
            uncovered_ordered: c.uncovered_ordered(),
        }
    }
}

/// Wall-clock per phase, in seconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub phases: Vec<(String, f64)>,
}

impl Timings {
    pub fn record(&mut self, name: &str, since: Instant) {
        self.phases.push((name.to_string(), since.elapsed().as_secs_f64()));
    }

    pub fn total(&self) -> f64 {
        self.phases.iter().map(|p| p.1).sum()
    }
}

/// Sampling details attached to BUS and High-ACC reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub q: usize,
    pub source: String,
    pub draws: u64,
    pub covered_at_end: usize,
    /// `m_u` in the universe's own convention, as used for scaling.
    pub m_u: u64,
    pub m_u_ordered: u64,
    pub m_u_source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_u_estimate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub algorithm: String,
    pub selected: Vec<Edge>,
    pub iterations: Vec<IterationRecord>,
    pub coverage_before: CoverageSummary,
    pub coverage_after: CoverageSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub timings: Timings,
}

impl SelectionReport {
    pub fn gain(&self) -> i64 {
        self.coverage_after.covered as i64 - self.coverage_before.covered as i64
    }
}

/// Exact coverage of `X` after adding `selected` to the instance graph.
pub fn exact_after(p: &ProblemInstance, selected: &[Edge]) -> Result<CoverageState> {
    let g = p.graph.with_edges(selected)?;
    Ok(p.coverage(&g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p4() -> Graph {
        Graph::from_edges(4, false, &[Edge(0, 1), Edge(1, 2), Edge(2, 3)]).unwrap()
    }

    #[test]
    fn complete_graph_has_no_candidates() {
        let g = Graph::from_edges(3, false, &[Edge(0, 1), Edge(1, 2), Edge(0, 2)]).unwrap();
        let x = TargetSet::new(3, &[0]).unwrap();
        assert!(matches!(
            build_candidates(&g, &x, Setting::S1),
            Err(Error::NoCandidates)
        ));
    }

    #[test]
    fn s1_candidates_on_p3() {
        let g = Graph::from_edges(3, false, &[Edge(0, 1), Edge(1, 2)]).unwrap();
        let x = TargetSet::new(3, &[0]).unwrap();
        assert_eq!(build_candidates(&g, &x, Setting::S1).unwrap(), vec![Edge(0, 2)]);
    }

    #[test]
    fn s4_candidates_both_orientations() {
        let g = Graph::from_edges(3, true, &[Edge(0, 1), Edge(1, 2)]).unwrap();
        let x = TargetSet::new(3, &[2]).unwrap();
        let c = build_candidates(&g, &x, Setting::S4).unwrap();
        assert_eq!(c, vec![Edge(0, 2), Edge(2, 0), Edge(2, 1)]);
    }

    #[test]
    fn s0_and_s3_enumerate_everything_absent() {
        let g = p4();
        let x = TargetSet::new(4, &[0]).unwrap();
        assert_eq!(build_candidates(&g, &x, Setting::S0).unwrap().len(), 3);
        let d = Graph::from_edges(3, true, &[Edge(0, 1)]).unwrap();
        let x = TargetSet::new(3, &[0]).unwrap();
        assert_eq!(build_candidates(&d, &x, Setting::S3).unwrap().len(), 5);
    }

    #[test]
    fn validate_reports_every_violation() {
        let g = p4();
        let p = ProblemInstance {
            targets: TargetSet::new(4, &[0]).unwrap(),
            candidates: vec![Edge(0, 1), Edge(0, 3)],
            pairs: PairUniverse::AllPairs,
            budget: 3,
            setting: Setting::S1,
            enforce_s2: false,
            graph: g,
        };
        match p.validate() {
            Err(Error::Invalid(errs)) => {
                assert_eq!(errs.len(), 2, "{errs:?}");
                assert!(errs.iter().any(|e| e.contains("candidate present")));
                assert!(errs.iter().any(|e| e.contains("budget exceeds candidates")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validate_accepts_p4_instance() {
        let p = ProblemInstance {
            graph: p4(),
            targets: TargetSet::new(4, &[0]).unwrap(),
            candidates: vec![Edge(0, 2), Edge(0, 3)],
            pairs: PairUniverse::AllPairs,
            budget: 1,
            setting: Setting::S1,
            enforce_s2: false,
        };
        p.validate().unwrap();
    }

    #[test]
    fn validate_rejects_non_incident_candidate_under_s1() {
        let p = ProblemInstance {
            graph: p4(),
            targets: TargetSet::new(4, &[0]).unwrap(),
            candidates: vec![Edge(1, 3)],
            pairs: PairUniverse::AllPairs,
            budget: 1,
            setting: Setting::S1,
            enforce_s2: false,
        };
        assert!(p.validate().is_err());
        let mut q = p.clone();
        q.setting = Setting::S0;
        q.validate().unwrap();
    }

    #[test]
    fn setting_parse_roundtrip() {
        for s in [Setting::S0, Setting::S1, Setting::S3, Setting::S4] {
            assert_eq!(s.to_string().parse::<Setting>().unwrap(), s);
        }
        assert!("S2".parse::<Setting>().is_err());
    }
}
