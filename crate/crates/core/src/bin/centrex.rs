use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use centrex::algo::{run_algorithm, AlgoParams, Algorithm};
use centrex::bus::Sizing;
use centrex::coverage::{PairUniverse, TargetSet};
use centrex::error::Error;
use centrex::experiment::{run_experiment, write_csv, ExperimentConfig, GraphSource, Sweep};
use centrex::generators::{random_targets, GeneratorSpec};
use centrex::ges::GesOptions;
use centrex::graph::load_edge_list;
use centrex::instance::{load_instance, read_candidates, read_node_pairs};
use centrex::metrics::{compare, MetricsConfig, PairSampling};
use centrex::oracle::{certify_instance_s2, CERTIFY_MAX_CANDIDATES, DAG_MAX_NODES};
use centrex::par;
use centrex::problem::{build_candidates, ProblemInstance, Setting};
use centrex::report::{Report, S2Section};
use centrex::rng::{self, tag};
use centrex::verify::{self, DominanceConfig, SuiteResult};

#[derive(Parser)]
#[command(
    name = "centrex",
    version,
    about = "Add edges to raise the group coverage centrality of a node set"
)]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "CENTREX_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select edges for one instance and write a report.
    Optimize(OptimizeArgs),
    /// Run a property suite against the oracles.
    Verify(VerifyArgs),
    /// Repeated runs over a sweep, written as CSV.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct OptimizeArgs {
    /// Edge-list file (whitespace-separated tokens, `#` comments).
    #[arg(long, required_unless_present = "instance", conflicts_with = "instance")]
    graph: Option<PathBuf>,
    /// Instance file; replaces --graph, targets, candidates, pairs and --k.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, value_parser = parse_algo)]
    algo: Algorithm,
    /// Edge budget.
    #[arg(long, required_unless_present = "instance")]
    k: Option<usize>,
    /// Comma-separated node tokens.
    #[arg(long, value_delimiter = ',', conflicts_with = "target_random")]
    target_nodes: Vec<String>,
    /// Pick this many targets uniformly using --seed.
    #[arg(long)]
    target_random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// auto-s1 (target-incident), auto-s0 (any absent edge) or file:PATH.
    #[arg(long, default_value = "auto-s1")]
    candidates: String,
    #[arg(long)]
    directed: bool,
    /// Accuracy for the sample-size bound.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Confidence exponent l (failure probability |candidates|^-l).
    #[arg(long, default_value_t = 1)]
    confidence_l: u32,
    /// Lower bound on the optimum gain; selects the OPT-dependent bound.
    #[arg(long, requires = "epsilon")]
    opt_bound: Option<f64>,
    /// Sample count N, `exhaustive`, or `paper-cg` (256·k). Overrides --epsilon.
    #[arg(long)]
    samples: Option<String>,
    /// all or file:PATH
    #[arg(long, default_value = "all")]
    pairs: String,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add the side-metrics block.
    #[arg(long)]
    metrics: bool,
    /// Pairs for average distance: N or `exhaustive`.
    #[arg(long, default_value = "1000")]
    metric_pairs: String,
    #[arg(long, default_value_t = 1000)]
    ic_trials: usize,
    #[arg(long, default_value_t = 0.1)]
    ic_p: f64,
    /// GES: stop when the best gain is not positive.
    #[arg(long)]
    stop_on_zero_gain: bool,
    /// Certify S2 on the instance (small instances only).
    #[arg(long)]
    enforce_s2: bool,
    /// Include wall-clock phase timings in the report.
    #[arg(long)]
    timings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    ApproxRatio,
    Submodularity,
    Witness,
    Estimator,
    Concentration,
    BusGes,
    OracleEquivalence,
    Dominance,
    Scaling,
    SideMetrics,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Trials, resamples or graphs, depending on the suite.
    #[arg(long)]
    trials: Option<usize>,
    /// Instance count for instance-based suites.
    #[arg(long)]
    instances: Option<usize>,
    /// Witness setting: s1 or s4.
    #[arg(long, default_value = "s1")]
    setting: String,
    /// Witness: search instead of printing the stored fixture.
    #[arg(long)]
    search: bool,
    /// Witness search: only accept S2-certified instances.
    #[arg(long)]
    certify: bool,
    #[arg(long, default_value_t = 100_000)]
    max_tries: u64,
    /// Write the JSON result here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// ba:N:M, er:N:P, er-directed:N:P or tree:N
    #[arg(long, required_unless_present = "graph", conflicts_with = "graph")]
    generator: Option<String>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    directed: bool,
    #[arg(long, default_value_t = 5)]
    targets: usize,
    /// Budgets (comma-separated); a list sweeps k.
    #[arg(long, value_delimiter = ',', default_value = "10")]
    k: Vec<usize>,
    /// Sample sizes (comma-separated); a list sweeps q at a single k.
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    samples: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', value_parser = parse_algo, default_value = "bus,high-acc,high-degree,random")]
    algos: Vec<Algorithm>,
    /// Add a wall-time column (makes the CSV run-dependent).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Guard(_) => 3,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
            _ => 2,
        };
        let msg = match &e {
            Error::Invalid(list) => format!("invalid instance:\n  {}", list.join("\n  ")),
            other => other.to_string(),
        };
        Failure { code, msg }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            msg: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        msg: msg.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    let result = par::with_threads(threads, || match cli.command {
        Command::Optimize(a) => optimize(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Experiment(a) => experiment(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn sizing(a: &OptimizeArgs) -> Result<Option<Sizing>, Failure> {
    if let Some(s) = &a.samples {
        return Ok(Some(match s.as_str() {
            "exhaustive" => Sizing::Exhaustive,
            "paper-cg" => Sizing::PaperCg,
            n => Sizing::Manual(n.parse().map_err(|_| {
                usage(format!(
                    "--samples expects a count, `exhaustive` or `paper-cg`, got `{n}`"
                ))
            })?),
        }));
    }
    Ok(a.epsilon.map(|epsilon| match a.opt_bound {
        Some(opt_bound) => Sizing::Theorem {
            epsilon,
            l: a.confidence_l,
            opt_bound,
        },
        None => Sizing::Corollary {
            epsilon,
            l: a.confidence_l,
        },
    }))
}

fn build_instance(a: &OptimizeArgs) -> Result<ProblemInstance, Failure> {
    if let Some(path) = &a.instance {
        let mut p = load_instance(path)?;
        if let Some(k) = a.k {
            p.budget = k;
        }
        p.enforce_s2 |= a.enforce_s2;
        p.validate()?;
        return Ok(p);
    }
    let path = a.graph.as_ref().expect("clap requires --graph");
    let file = fs::File::open(path).map_err(|e| Failure {
        code: 2,
        msg: format!("{}: {e}", path.display()),
    })?;
    let (g, stats) = load_edge_list(BufReader::new(file), a.directed)?;
    if stats.duplicates + stats.self_loops > 0 {
        eprintln!(
            "note: dropped {} duplicate edges and {} self-loops",
            stats.duplicates, stats.self_loops
        );
    }
    let n = g.node_count();
    let x = match (a.target_nodes.is_empty(), a.target_random) {
        (false, _) => a
            .target_nodes
            .iter()
            .map(|t| g.resolve(t))
            .collect::<Result<Vec<_>, _>>()?,
        (true, Some(c)) => random_targets(n, c, &mut rng::stream(a.seed, tag::TARGETS, 0)),
        (true, None) => return Err(usage("give --target-nodes or --target-random")),
    };
    let targets = TargetSet::new(n, &x)?;
    let (setting, candidates) = match a.candidates.as_str() {
        "auto-s1" => {
            let s = Setting::incident(a.directed);
            (s, build_candidates(&g, &targets, s)?)
        }
        "auto-s0" => {
            let s = Setting::unrestricted(a.directed);
            (s, build_candidates(&g, &targets, s)?)
        }
        other => match other.strip_prefix("file:") {
            Some(p) => {
                let f = fs::File::open(p)?;
                let c = read_candidates(&g, BufReader::new(f))?;
                let incident = c.iter().all(|e| targets.contains(e.0) != targets.contains(e.1));
                let s = if incident {
                    Setting::incident(a.directed)
                } else {
                    Setting::unrestricted(a.directed)
                };
                (s, c)
            }
            None => {
                return Err(usage(format!(
                    "--candidates expects auto-s1, auto-s0 or file:PATH, got `{other}`"
                )))
            }
        },
    };
    let pairs = match a.pairs.as_str() {
        "all" => PairUniverse::AllPairs,
        other => match other.strip_prefix("file:") {
            Some(p) => {
                let f = fs::File::open(p)?;
                PairUniverse::explicit(&g, &targets, &read_node_pairs(&g, BufReader::new(f))?)?
            }
            None => return Err(usage(format!("--pairs expects all or file:PATH, got `{other}`"))),
        },
    };
    let p = ProblemInstance {
        graph: g,
        targets,
        candidates,
        pairs,
        budget: a.k.expect("clap requires --k"),
        setting,
        enforce_s2: a.enforce_s2,
    };
    p.validate()?;
    Ok(p)
}

fn optimize(a: OptimizeArgs) -> Result<u8, Failure> {
    let t0 = Instant::now();
    let sizing = sizing(&a)?;
    if a.algo == Algorithm::Bus && sizing.is_none() {
        return Err(usage(
            "BUS needs a sample size: give --epsilon (with optional --opt-bound) or --samples",
        ));
    }
    let p = build_instance(&a)?;
    let params = AlgoParams {
        sizing,
        acc_samples: match sizing {
            Some(Sizing::Manual(q)) => q,
            _ => 1000,
        },
        ges: GesOptions {
            stop_on_zero_gain: a.stop_on_zero_gain,
        },
    };
    let (result, plan) = run_algorithm(&p, a.algo, &params, a.seed)?;
    let mut report = Report::new(&p, &result, plan);
    if p.enforce_s2 {
        let small = p.candidates.len() <= CERTIFY_MAX_CANDIDATES && p.graph.node_count() <= DAG_MAX_NODES;
        let certified = if small { Some(certify_instance_s2(&p)?) } else { None };
        if certified.is_none() {
            report
                .warnings
                .push("instance too large to certify S2; guarantees not asserted".into());
        }
        report.s2 = Some(S2Section {
            requested: true,
            certified,
            guarantees_apply: certified == Some(true) && p.setting == Setting::S1,
        });
    }
    if a.metrics {
        let distance_pairs = match a.metric_pairs.as_str() {
            "exhaustive" => PairSampling::Exhaustive,
            n => PairSampling::Sampled(
                n.parse()
                    .map_err(|_| usage(format!("--metric-pairs expects a count or `exhaustive`, got `{n}`")))?,
            ),
        };
        if !(0.0..=1.0).contains(&a.ic_p) {
            return Err(usage("--ic-p must lie in [0, 1]"));
        }
        let cfg = MetricsConfig {
            distance_pairs,
            influence_probability: a.ic_p,
            influence_trials: a.ic_trials.max(1),
        };
        let after = p.graph.with_edges(&result.selected)?;
        report.metrics = Some(compare(&p.graph, &after, &p.targets, &cfg, a.seed));
    }
    if a.timings {
        report = report.with_timings(&result);
    }
    emit(a.out.as_deref(), &report.to_json()?)?;
    let line = format!(
        "{} k={} coverage {} -> {} (+{}) in {:.3}s",
        result.algorithm,
        p.budget,
        result.coverage_before.covered,
        result.coverage_after.covered,
        result.gain(),
        t0.elapsed().as_secs_f64()
    );
    if a.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(0)
}

fn verify_cmd(a: VerifyArgs) -> Result<u8, Failure> {
    let setting: Setting = a.setting.parse()?;
    let mut extra = None;
    let result: SuiteResult = match a.suite {
        Suite::ApproxRatio => verify::approx_ratio(a.instances.or(a.trials).unwrap_or(100), a.seed),
        Suite::Submodularity => verify::submodularity(a.trials.unwrap_or(200), a.seed),
        Suite::Witness => {
            if a.search || a.certify {
                let (r, w) = verify::witness_search(setting, a.seed, a.max_tries, a.certify);
                extra = w;
                r
            } else {
                extra = Some(verify::frozen_witness(setting)?);
                verify::check_frozen_witness(setting)
            }
        }
        Suite::Estimator => verify::estimator(a.trials.unwrap_or(10_000), 50, a.seed),
        Suite::Concentration => verify::concentration(a.trials.unwrap_or(1000), 0.3, a.seed),
        Suite::BusGes => verify::bus_ges(a.instances.or(a.trials).unwrap_or(50), a.seed),
        Suite::OracleEquivalence => verify::oracle_equivalence(a.instances.or(a.trials).unwrap_or(100), a.seed),
        Suite::Dominance => verify::dominance(
            &DominanceConfig {
                graphs: a.instances.or(a.trials).unwrap_or(50),
                ..Default::default()
            },
            a.seed,
        ),
        Suite::Scaling => verify::scaling(a.seed, 2000, &[5, 10, 20, 40], 1000, a.trials.unwrap_or(3)),
        Suite::SideMetrics => verify::side_metrics(a.instances.or(a.trials).unwrap_or(20), a.seed),
    };
    let mut doc = serde_json::to_value(&result).map_err(Error::from)?;
    if let Some(w) = &extra {
        doc["witness"] = serde_json::to_value(w).map_err(Error::from)?;
    }
    let mut text = serde_json::to_string_pretty(&doc).map_err(Error::from)?;
    text.push('\n');
    if let Some(w) = &extra {
        eprint!("{}", w.instance);
        eprintln!("# A = {:?}\n# B = {:?}\n# e = {:?}", w.smaller, w.larger, w.edge);
    }
    if let Some(out) = &a.out {
        fs::write(out, &text)?;
    }
    print!("{text}");
    eprintln!("{}", result.summary_line());
    Ok(if result.passed { 0 } else { 1 })
}

fn experiment(a: ExperimentArgs) -> Result<u8, Failure> {
    let source = match (&a.generator, &a.graph) {
        (Some(g), _) => GraphSource::Generator(g.parse::<GeneratorSpec>()?),
        (None, Some(p)) => GraphSource::File {
            path: p.clone(),
            directed: a.directed,
        },
        (None, None) => return Err(usage("give --generator or --graph")),
    };
    let sweep = match (a.k.as_slice(), a.samples.as_slice()) {
        (ks, [q]) => Sweep::Budget {
            budgets: ks.to_vec(),
            samples: *q,
        },
        ([k], qs) => Sweep::Samples {
            samples: qs.to_vec(),
            budget: *k,
        },
        _ => return Err(usage("sweep either --k or --samples, not both")),
    };
    let cfg = ExperimentConfig {
        source,
        targets: a.targets,
        sweep,
        reps: a.reps,
        seed: a.seed,
        algorithms: a.algos.clone(),
        timing: a.timing,
    };
    let rows = run_experiment(&cfg)?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    emit(a.out.as_deref(), &String::from_utf8_lossy(&buf))?;
    Ok(0)
}
