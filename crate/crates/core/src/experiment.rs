//! Repeated runs over a sweep of budgets or sample sizes, written as CSV.
//!
//! Repetition `r` uses the same graph and targets for every sweep value, so
//! rows within a repetition are comparable. Timings are written only when
//! requested; without them the CSV is byte-identical for a fixed seed.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use crate::algo::{run_algorithm, AlgoParams, Algorithm};
use crate::bus::Sizing;
use crate::error::{Error, Result};
use crate::generators::{random_targets, GeneratorSpec};
use crate::graph::{load_edge_list, Graph};
use crate::problem::{ProblemInstance, Setting};
use crate::rng::{self, tag};

#[derive(Clone, Debug)]
pub enum GraphSource {
    Generator(GeneratorSpec),
    File { path: PathBuf, directed: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sweep {
    /// Vary `k`, sample size fixed.
    Budget { budgets: Vec<usize>, samples: usize },
    /// Vary the sample size, `k` fixed.
    Samples { samples: Vec<usize>, budget: usize },
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub source: GraphSource,
    pub targets: usize,
    pub sweep: Sweep,
    pub reps: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub config: String,
    pub rep: usize,
    pub algorithm: String,
    pub k: usize,
    pub q: Option<usize>,
    pub gain: i64,
    pub coverage_before: u64,
    pub coverage_after: u64,
    pub time: Option<f64>,
}

fn rep_graph(cfg: &ExperimentConfig, rep: usize, file_graph: Option<&Graph>) -> Graph {
    match (&cfg.source, file_graph) {
        (GraphSource::Generator(spec), _) => spec.generate(&mut rng::stream(cfg.seed, tag::GRAPH, rep as u64)),
        (GraphSource::File { .. }, Some(g)) => g.clone(),
        (GraphSource::File { .. }, None) => unreachable!("file graph loaded up front"),
    }
}

/// Runs every (sweep value, repetition, algorithm) combination.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    if cfg.algorithms.is_empty() {
        return Err(Error::Config("no algorithms selected".into()));
    }
    let file_graph = match &cfg.source {
        GraphSource::File { path, directed } => {
            let f = std::fs::File::open(path)?;
            Some(load_edge_list(std::io::BufReader::new(f), *directed)?.0)
        }
        GraphSource::Generator(_) => None,
    };
    let points: Vec<(String, usize, usize)> = match &cfg.sweep {
        Sweep::Budget { budgets, samples } => budgets.iter().map(|&k| (format!("k={k}"), k, *samples)).collect(),
        Sweep::Samples { samples, budget } => samples.iter().map(|&q| (format!("q={q}"), *budget, q)).collect(),
    };
    let mut rows = Vec::new();
    for rep in 0..cfg.reps {
        let g = rep_graph(cfg, rep, file_graph.as_ref());
        let n = g.node_count();
        let x = random_targets(n, cfg.targets, &mut rng::stream(cfg.seed, tag::TARGETS, rep as u64));
        let setting = Setting::incident(g.is_directed());
        let algo_seed = rng::child_seed(cfg.seed, tag::TRIALS, rep as u64);
        for (label, k, q) in &points {
            let p = ProblemInstance::auto(g.clone(), &x, setting, *k)?;
            let params = AlgoParams {
                sizing: Some(Sizing::Manual(*q)),
                acc_samples: *q,
                ..Default::default()
            };
            for &algo in &cfg.algorithms {
                let t0 = Instant::now();
                let (report, _) = run_algorithm(&p, algo, &params, algo_seed)?;
                let secs = t0.elapsed().as_secs_f64();
                rows.push(Row {
                    config: label.clone(),
                    rep,
                    algorithm: algo.name().into(),
                    k: *k,
                    q: algo.samples().then_some(*q),
                    gain: report.gain(),
                    coverage_before: report.coverage_before.covered,
                    coverage_after: report.coverage_after.covered,
                    time: cfg.timing.then_some(secs),
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(timing: bool) -> ExperimentConfig {
        ExperimentConfig {
            source: GraphSource::Generator("ba:80:2".parse().unwrap()),
            targets: 3,
            sweep: Sweep::Budget {
                budgets: vec![1, 2, 3],
                samples: 50,
            },
            reps: 2,
            seed: 9,
            algorithms: vec![Algorithm::Bus, Algorithm::HighDegree, Algorithm::Random],
            timing,
        }
    }

    #[test]
    fn row_count_and_determinism() {
        let a = run_experiment(&cfg(false)).unwrap();
        assert_eq!(a.len(), 3 * 2 * 3);
        let mut x = Vec::new();
        let mut y = Vec::new();
        write_csv(&a, &mut x).unwrap();
        write_csv(&run_experiment(&cfg(false)).unwrap(), &mut y).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        assert!(text.starts_with("config,rep,algorithm,k,q,gain,coverage_before,coverage_after,time\n"));
    }

    #[test]
    fn sample_sweep() {
        let mut c = cfg(true);
        c.sweep = Sweep::Samples {
            samples: vec![10, 20],
            budget: 2,
        };
        c.algorithms = vec![Algorithm::Bus];
        let rows = run_experiment(&c).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.k == 2 && r.time.is_some()));
        assert_eq!(rows[1].q, Some(20));
    }
}
