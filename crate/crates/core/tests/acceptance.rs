//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::fmt::Write as _;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use centrex::generators::barabasi_albert;
use centrex::problem::Setting;
use centrex::rng::{self, tag};
use centrex::verify::{self, DominanceConfig, SuiteResult};

const SEED: u64 = 7;

struct Gate {
    failed: Vec<usize>,
}

impl Gate {
    fn check(&mut self, id: usize, title: &str, ok: bool, detail: String) {
        println!(
            "{} criterion {id:>2} {title}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            self.failed.push(id);
        }
    }

    fn suite(&mut self, id: usize, title: &str, r: &SuiteResult, time_limit: Option<f64>) {
        let in_time = time_limit.is_none_or(|t| r.seconds < t);
        let mut detail = r.summary_line();
        if let Some(t) = time_limit {
            let _ = write!(detail, " limit={t}s");
        }
        if !r.failures.is_empty() {
            let _ = write!(detail, " failures={:?}", r.failures);
        }
        self.check(id, title, r.passed && in_time, detail);
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_centrex")
}

fn run(args: &[&str], threads: usize) -> (i32, Vec<u8>) {
    let out = Command::new(bin())
        .args(args)
        .env("CENTREX_THREADS", threads.to_string())
        .output()
        .expect("run centrex");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn write_ba(path: &Path, n: usize, attach: usize, seed: u64) {
    let g = barabasi_albert(n, attach, &mut rng::stream(seed, tag::GRAPH, 0));
    let mut s = String::new();
    for e in g.edges() {
        let _ = writeln!(s, "v{} v{}", e.0, e.1);
    }
    std::fs::write(path, s).unwrap();
}

fn determinism(gate: &mut Gate) {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("ba.txt");
    write_ba(&graph, 150, 2, 3);
    let g = graph.to_str().unwrap();
    let base = [
        "optimize",
        "--graph",
        g,
        "--k",
        "3",
        "--target-random",
        "3",
        "--seed",
        "5",
    ];
    let with =
        |extra: &[&'static str]| -> Vec<String> { base.iter().chain(extra.iter()).map(|s| s.to_string()).collect() };
    let commands: Vec<Vec<String>> = vec![
        with(&["--algo", "ges"]),
        with(&["--algo", "bus", "--samples", "400", "--metrics"]),
        with(&["--algo", "bus", "--epsilon", "0.3"]),
        with(&["--algo", "high-acc", "--samples", "400"]),
        with(&["--algo", "high-degree"]),
        with(&["--algo", "random"]),
        ["verify", "oracle-equivalence", "--trials", "30"]
            .map(String::from)
            .to_vec(),
        ["verify", "submodularity", "--trials", "30"].map(String::from).to_vec(),
        ["verify", "witness", "--setting", "s4", "--search"]
            .map(String::from)
            .to_vec(),
        [
            "experiment",
            "--generator",
            "ba:200:2",
            "--k",
            "2,4",
            "--samples",
            "200",
            "--reps",
            "2",
            "--seed",
            "3",
        ]
        .map(String::from)
        .to_vec(),
    ];
    let max = std::thread::available_parallelism().map_or(1, |n| n.get()).max(4);
    let mut mismatches = Vec::new();
    for c in &commands {
        let args: Vec<&str> = c.iter().map(String::as_str).collect();
        let (c1, o1) = run(&args, 1);
        let (c2, o2) = run(&args, max);
        let (c3, o3) = run(&args, max);
        if c1 != 0 || o1.is_empty() || (c1, &o1) != (c2, &o2) || o2 != o3 {
            mismatches.push(format!("{} {} (exit {c1}/{c2}/{c3})", args[0], args[1..].join(" ")));
        }
    }
    gate.check(
        11,
        "byte-identical output at 1 and max threads",
        mismatches.is_empty(),
        format!(
            "{} commands, threads 1 vs {max}, mismatches={mismatches:?}",
            commands.len()
        ),
    );
}

fn main() {
    // `cargo test -- <filter>` passes arguments; this target has no filters
    let start = Instant::now();
    let mut gate = Gate { failed: Vec::new() };

    gate.suite(
        1,
        "GES approximation ratio vs brute force",
        &verify::approx_ratio(100, SEED),
        Some(60.0),
    );
    gate.suite(
        2,
        "submodularity and monotonicity on certified instances",
        &verify::submodularity(200, SEED),
        Some(60.0),
    );

    let (s1, _) = verify::witness_search(Setting::S1, SEED, 100_000, false);
    let (s4, _) = verify::witness_search(Setting::S4, SEED, 100_000, false);
    let (cert, _) = verify::witness_search(Setting::S1, SEED, 100_000, true);
    let frozen = [
        verify::check_frozen_witness(Setting::S1),
        verify::check_frozen_witness(Setting::S4),
    ];
    let ok = s1.passed && s4.passed && cert.passed && frozen.iter().all(|r| r.passed);
    gate.check(
        3,
        "non-submodularity witnesses",
        ok,
        format!(
            "{} | {} | {} | {} | {}",
            s1.summary_line(),
            s4.summary_line(),
            cert.summary_line(),
            frozen[0].summary_line(),
            frozen[1].summary_line()
        ),
    );

    gate.suite(
        4,
        "sampled estimator unbiasedness",
        &verify::estimator(10_000, 50, SEED),
        Some(120.0),
    );
    gate.suite(
        5,
        "concentration at the OPT-free sample size",
        &verify::concentration(1000, 0.3, SEED),
        None,
    );
    gate.suite(
        6,
        "BUS with exhaustive samples equals GES",
        &verify::bus_ges(50, SEED),
        None,
    );
    gate.suite(
        7,
        "DAG oracle equals coverage count",
        &verify::oracle_equivalence(100, SEED),
        None,
    );
    gate.suite(
        8,
        "BUS against baselines on BA graphs",
        &verify::dominance(&DominanceConfig::default(), SEED),
        Some(600.0),
    );
    gate.suite(
        9,
        "BUS time linear in k",
        &verify::scaling(SEED, 2000, &[5, 10, 20, 40], 1000, 5),
        None,
    );
    gate.suite(
        10,
        "side-metric directions and cascade extremes",
        &verify::side_metrics(20, SEED),
        None,
    );
    determinism(&mut gate);

    println!(
        "acceptance: {} of 11 criteria passed in {:.1}s",
        11 - gate.failed.len(),
        start.elapsed().as_secs_f64()
    );
    if !gate.failed.is_empty() {
        println!("failed criteria: {:?}", gate.failed);
        std::process::exit(1);
    }
}
