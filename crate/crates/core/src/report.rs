//! JSON report: instance echo, sampling plan, per-iteration table, exact
//! coverage before and after, optional metrics, environment.
//!
//! Wall-clock timings are left out unless requested, so that equal inputs
//! give byte-identical reports.

use serde::{Deserialize, Serialize};

use crate::bus::SamplePlan;
use crate::error::Result;
use crate::graph::Edge;
use crate::instance::InstanceEcho;
use crate::metrics::MetricsBlock;
use crate::problem::{GainKind, ProblemInstance, SampleSummary, SelectionReport};

pub const SCHEMA: &str = "centrex-report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub step: usize,
    pub edge: (String, String),
    pub score: i64,
    pub kind: GainKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageCounts {
    /// Pairs of `Z` with a shortest path through `X` (unordered when undirected).
    pub covered: u64,
    /// `m_u` in the same convention.
    pub uncovered: u64,
    /// `m_u` counting each ordered pair.
    pub uncovered_ordered: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageSection {
    pub convention: String,
    pub before: CoverageCounts,
    pub after: CoverageCounts,
    pub gain: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct S2Section {
    pub requested: bool,
    /// `None` when the instance is too large to check.
    pub certified: Option<bool>,
    pub guarantees_apply: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub log_base: String,
    pub rng: String,
    pub baseline_pairing: String,
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            version: env!("CARGO_PKG_VERSION").into(),
            log_base: "e".into(),
            rng: "chacha8, one stream per (seed, purpose, index)".into(),
            baseline_pairing: "round-robin over targets sorted by id".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub instance: InstanceEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<SamplePlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleSummary>,
    pub selected: Vec<(String, String)>,
    pub iterations: Vec<IterationRow>,
    pub coverage: CoverageSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s2: Option<S2Section>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsBlock>,
    pub environment: Environment,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<(String, f64)>>,
}

impl Report {
    pub fn new(p: &ProblemInstance, r: &SelectionReport, plan: Option<SamplePlan>) -> Report {
        let label = |e: Edge| p.edge_label(e);
        let counts = |c: &crate::problem::CoverageSummary| CoverageCounts {
            covered: c.covered,
            uncovered: c.uncovered,
            uncovered_ordered: c.uncovered_ordered,
        };
        Report {
            schema: SCHEMA.into(),
            algorithm: r.algorithm.clone(),
            seed: r.seed,
            instance: InstanceEcho::from(p),
            plan,
            samples: r.samples.clone(),
            selected: r.selected.iter().map(|&e| label(e)).collect(),
            iterations: r
                .iterations
                .iter()
                .map(|it| IterationRow {
                    step: it.step,
                    edge: label(it.edge),
                    score: it.score,
                    kind: it.kind,
                    estimate: it.estimate,
                })
                .collect(),
            coverage: CoverageSection {
                convention: if p.graph.is_directed() { "ordered" } else { "unordered" }.into(),
                before: counts(&r.coverage_before),
                after: counts(&r.coverage_after),
                gain: r.gain(),
            },
            s2: None,
            metrics: None,
            environment: Environment::default(),
            warnings: r.warnings.clone(),
            timings: None,
        }
    }

    pub fn with_timings(mut self, r: &SelectionReport) -> Report {
        self.timings = Some(r.timings.phases.clone());
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Report> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ges::run_ges;
    use crate::instance::parse_instance;

    #[test]
    fn report_round_trips_instance() {
        let p = parse_instance(
            "budget 1\nedge a b\nedge b c\nedge c d\ntargets a\ncandidates auto\n",
            None,
        )
        .unwrap();
        let r = run_ges(&p).unwrap();
        let json = Report::new(&p, &r, None).to_json().unwrap();
        let back = Report::from_json(&json).unwrap();
        assert_eq!(back.schema, SCHEMA);
        assert_eq!(back.selected, vec![("a".to_string(), "d".to_string())]);
        assert_eq!(back.coverage.gain, 1);
        assert_eq!(back.instance.to_instance().unwrap(), p);
        assert!(!json.contains("timings"));
    }
}
