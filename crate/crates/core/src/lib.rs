//! Raise the group coverage centrality of a target node set `X` by adding at
//! most `k` edges from a candidate list.
//!
//! A pair `(s, t)` outside `X` is covered when some shortest `s`–`t` path
//! passes through a node of `X`. The crate provides an exact greedy
//! optimizer ([`ges`]), a sampled greedy optimizer with sample-size bounds
//! ([`bus`]), comparison strategies ([`baselines`]), brute-force and
//! shortest-path-DAG oracles ([`oracle`]), side metrics ([`metrics`]) and
//! the property suites behind `centrex verify` ([`verify`]).
//!
//! ```
//! use centrex::{Edge, Graph, ProblemInstance, Setting};
//!
//! // path a-b-c-d, target a
//! let g = Graph::from_edges(4, false, &[Edge(0, 1), Edge(1, 2), Edge(2, 3)]).unwrap();
//! let p = ProblemInstance::auto(g, &[0], Setting::S1, 1).unwrap();
//! let r = centrex::ges::run_ges(&p).unwrap();
//! assert_eq!(r.selected, vec![Edge(0, 3)]);
//! assert_eq!(r.gain(), 1);
//! ```

pub mod algo;
pub mod baselines;
pub mod bus;
pub mod coverage;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod ges;
pub mod graph;
pub mod instance;
pub mod metrics;
pub mod oracle;
pub mod par;
pub mod problem;
pub mod report;
pub mod rng;
pub mod verify;

pub use algo::{run_algorithm, AlgoParams, Algorithm};
pub use bus::{SamplePlan, Sizing};
pub use coverage::{group_coverage, CoverageState, PairUniverse, TargetSet};
pub use error::{Error, Result};
pub use graph::{Edge, Graph, NodeId};
pub use problem::{ProblemInstance, SelectionReport, Setting};
pub use report::Report;
