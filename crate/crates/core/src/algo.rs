//! Algorithm selection shared by the CLI and the experiment harness.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{high_acc, high_degree, random_edges};
use crate::bus::{run_bus, SamplePlan, Sizing};
use crate::error::{Error, Result};
use crate::ges::{run_ges_with, GesOptions};
use crate::problem::{ProblemInstance, SelectionReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Ges,
    Bus,
    HighAcc,
    HighDegree,
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Ges,
        Algorithm::Bus,
        Algorithm::HighAcc,
        Algorithm::HighDegree,
        Algorithm::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ges => "ges",
            Algorithm::Bus => "bus",
            Algorithm::HighAcc => "high-acc",
            Algorithm::HighDegree => "high-degree",
            Algorithm::Random => "random",
        }
    }

    /// Whether the algorithm draws pairs and so has a sample size.
    pub fn samples(self) -> bool {
        matches!(self, Algorithm::Bus | Algorithm::HighAcc)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown algorithm `{s}` (expected ges, bus, high-acc, high-degree, random)"
            ))
        })
    }
}

/// Per-algorithm knobs.
#[derive(Clone, Copy, Debug)]
pub struct AlgoParams {
    /// BUS sample sizing; required for BUS.
    pub sizing: Option<Sizing>,
    /// Pairs drawn by High-ACC.
    pub acc_samples: usize,
    pub ges: GesOptions,
}

impl Default for AlgoParams {
    fn default() -> Self {
        AlgoParams {
            sizing: None,
            acc_samples: 1000,
            ges: GesOptions::default(),
        }
    }
}

pub fn run_algorithm(
    p: &ProblemInstance,
    algo: Algorithm,
    params: &AlgoParams,
    seed: u64,
) -> Result<(SelectionReport, Option<SamplePlan>)> {
    match algo {
        Algorithm::Ges => Ok((run_ges_with(p, &params.ges)?, None)),
        Algorithm::Bus => {
            let sizing = params
                .sizing
                .ok_or_else(|| Error::Config("BUS needs a sample size: give --epsilon or --samples".into()))?;
            let (r, plan) = run_bus(p, sizing, seed)?;
            Ok((r, Some(plan)))
        }
        Algorithm::HighAcc => Ok((high_acc(p, params.acc_samples, seed)?, None)),
        Algorithm::HighDegree => Ok((high_degree(p)?, None)),
        Algorithm::Random => Ok((random_edges(p, seed)?, None)),
    }
}
