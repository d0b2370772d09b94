//! Acceptance suite. Runs every criterion in order and prints one
//! `PASS`/`FAIL` line per criterion; exits non-zero if any fails.
//!
//! `ACCEPTANCE_ONLY=3,7` restricts the run to the listed criteria.
//! Timing criteria run on their own, after the statistical ones.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;

use common::{check_workload, random_net, random_workload, LocalityChecker};
use ppsim::bench::{fit_loglog_slope, fit_predictor_slope, run_scaling_suite, BenchConfig};
use ppsim::gof::{
    delays, ks_of_ks, ks_test_exp, ks_two_sample, martingale_residuals, node_report, rescale_node,
    test_names, History,
};
use ppsim::graph::gen_erdos_renyi;
use ppsim::hawkes::{Connectivity, HawkesNetwork, InteractionKernel};
use ppsim::localgraph::simulate_localgraph_with;
use ppsim::rng::RngStream;
use ppsim::sampling::get_t_next;
use ppsim::sim::{Algorithm, SimOptions, SimulationResult};
use ppsim::{simulate_fullscan, simulate_localgraph, simulate_naive, DependenceGraph, Scheduler};

type Outcome = Result<String, String>;
type Criterion = (usize, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run_algo(
    algo: Algorithm,
    net: &HawkesNetwork,
    graph: &DependenceGraph,
    horizon: f64,
    rng: &mut RngStream,
) -> SimulationResult {
    let r = match algo {
        Algorithm::FullScan => simulate_fullscan(net, horizon, rng),
        Algorithm::LocalGraph => simulate_localgraph(net, graph, horizon, rng),
        Algorithm::Naive => simulate_naive(net, horizon, rng),
    }
    .expect("simulation failed");
    r.check_invariants().expect("invalid result");
    r
}

// 1. Scheduler algebra against the sorted-array reference.
fn scheduler_algebra() -> Outcome {
    let start = Instant::now();
    let mut rng = RngStream::new(1);
    let mut failures = Vec::new();
    let mut max_len = 0;
    for case in 0..10_000 {
        let (init, ops) = random_workload(&mut rng, 600, 20);
        max_len = max_len.max(init.len());
        if let Err(e) = check_workload(&init, &ops) {
            failures.push(format!("case {case}: {e}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        failures.is_empty(),
        format!("{} failures, first: {:?}", failures.len(), failures.first()),
    )?;
    ensure(secs < 60.0, format!("took {secs:.1}s"))?;
    Ok(format!("10000 sequences, 0 failures, {secs:.1}s"))
}

// 2. get_t_next with constant rates against Exp(rate).
fn sampler_correctness() -> Outcome {
    let start = Instant::now();
    let mut summary = Vec::new();
    for (k, &rate) in [0.5, 1.0, 10.0].iter().enumerate() {
        let q = Scheduler::constant(0.0, rate).unwrap();
        let passes = (0..100u64)
            .into_par_iter()
            .filter(|&rep| {
                let mut rng = RngStream::split(2000 + k as u64, rep);
                let x: Vec<f64> = (0..10_000)
                    .map(|_| get_t_next(&q, &mut rng).unwrap().time().unwrap())
                    .collect();
                ks_test_exp(&x, rate).unwrap().p_value > 0.01
            })
            .count();
        summary.push(format!("rate {rate}: {passes}/100"));
        ensure(
            passes >= 98,
            format!("rate {rate}: only {passes}/100 passed"),
        )?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, format!("took {secs:.1}s"))?;
    Ok(format!("{} ({secs:.1}s)", summary.join(", ")))
}

/// The Erdos-Renyi network with `p = 1/M`, boxcar kernels and `nu = 10`,
/// plus node `a` (no parents, no children) and node `b` (most parents).
fn reference_network() -> (HawkesNetwork, DependenceGraph, usize, usize) {
    let m = 100;
    let mut rng = RngStream::new(2019);
    let edges = gen_erdos_renyi(m, 1.0 / m as f64, true, &mut rng).unwrap();
    let kernel = InteractionKernel::boxcar(5.0, 0.02).unwrap();
    let conn = Connectivity::uniform(m, &edges.edges, kernel).unwrap();
    let net = HawkesNetwork::new(conn, vec![10.0; m]).unwrap();
    let g = DependenceGraph::from_network(&net);
    let a = g.isolated_nodes()[0];
    let b = (0..m)
        .max_by_key(|&i| (g.parents(i).len(), std::cmp::Reverse(i)))
        .unwrap();
    (net, g, a, b)
}

// 3. Tests 1-3 on nodes a and b, uniformity of p-values over 200 runs.
fn statistical_reproduction() -> Outcome {
    let (net, g, a, b) = reference_network();
    let horizon = 150.0;
    let names = test_names();
    let mut lines = Vec::new();
    let mut worst = (1.0f64, String::new());
    let mut failed = Vec::new();
    for (s, algo) in [Algorithm::LocalGraph, Algorithm::FullScan]
        .into_iter()
        .enumerate()
    {
        let reports: Vec<[Vec<f64>; 2]> = (0..200u64)
            .into_par_iter()
            .map(|run| {
                let mut rng = RngStream::split(3000 + s as u64, run);
                let r = run_algo(algo, &net, &g, horizon, &mut rng);
                let h = History::from_result(&r).unwrap();
                [a, b].map(|node| {
                    let rep = node_report(&net, &h, node).unwrap();
                    rep.entries.iter().map(|e| e.p_value).collect()
                })
            })
            .collect();
        for (k, node) in [(0, 'a'), (1, 'b')] {
            let mut row = Vec::new();
            for (t, name) in names.iter().enumerate() {
                let ps: Vec<f64> = reports.iter().map(|r| r[k][t]).collect();
                let p = ks_of_ks(&ps).unwrap().p_value;
                row.push(format!("{p:.3}"));
                let label = format!("{algo}/{node}/{name}");
                if p < worst.0 {
                    worst = (p, label.clone());
                }
                if p <= 0.01 {
                    failed.push(format!("{label} p={p:.4}"));
                }
            }
            lines.push(format!("{algo} node {node}: [{}]", row.join(" ")));
        }
    }
    for l in &lines {
        println!("    {l}");
    }
    ensure(
        failed.is_empty(),
        format!("KS-of-KS <= 0.01: {}", failed.join(", ")),
    )?;
    Ok(format!(
        "44 KS-of-KS p-values > 0.01 (a = node {}, b = node {} with {} parents; min {:.4} at {})",
        a + 1,
        b + 1,
        g.parents(b).len(),
        worst.0,
        worst.1
    ))
}

// 4. Martingale residuals centred at 0 over 40 runs of length 20.
fn martingale_centering() -> Outcome {
    let (net, g, a, b) = reference_network();
    let mut failed = Vec::new();
    let mut count = 0;
    let mut worst = 0.0f64;
    for node in [a, b] {
        let mut sources: Vec<usize> = g.parents(node).to_vec();
        if !sources.contains(&node) {
            sources.push(node);
        }
        sources.sort_unstable();
        let stats: Vec<Vec<(String, f64)>> = (0..40u64)
            .into_par_iter()
            .map(|run| {
                let r = run_algo(
                    Algorithm::LocalGraph,
                    &net,
                    &g,
                    20.0,
                    &mut RngStream::split(4000, run),
                );
                let h = History::from_result(&r).unwrap();
                martingale_residuals(&net, &h, node, &sources, 0.02, 0.04)
                    .unwrap()
                    .into_iter()
                    .map(|(w, x)| (w.label(), x))
                    .collect()
            })
            .collect();
        for k in 0..stats[0].len() {
            let xs: Vec<f64> = stats.iter().map(|s| s[k].1).collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let se = sd / n.sqrt();
            count += 1;
            let ratio = if se > 0.0 {
                mean.abs() / se
            } else if mean == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(ratio);
            if ratio > 3.0 {
                failed.push(format!(
                    "node {} {}: mean {mean:.4}, se {se:.4}",
                    node + 1,
                    stats[0][k].0
                ));
            }
        }
    }
    ensure(failed.is_empty(), failed.join("; "))?;
    Ok(format!("{count} statistics, max |mean|/SE = {worst:.2}"))
}

fn pooled_delays(net: &HawkesNetwork, r: &SimulationResult) -> Vec<f64> {
    let h = History::from_result(r).unwrap();
    (0..net.m())
        .flat_map(|i| delays(&rescale_node(net, &h, i).unwrap()))
        .collect()
}

// 5. Two-sample KS between the three simulators on small random nets.
fn cross_simulator() -> Outcome {
    let mut nets = Vec::new();
    let mut rng = RngStream::new(5000);
    for _ in 0..5 {
        let m = 3 + (rng.uniform() * 8.0) as usize;
        nets.push(random_net(&mut rng, m, 0.35, 0.7));
    }
    let algos = [Algorithm::FullScan, Algorithm::LocalGraph, Algorithm::Naive];
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mut passes = [0usize; 3];
    let mut total = 0;
    for (n, net) in nets.iter().enumerate() {
        let g = DependenceGraph::from_network(net);
        let res: Vec<[bool; 3]> = (0..40u64)
            .into_par_iter()
            .map(|seed| {
                let d: Vec<Vec<f64>> = algos
                    .iter()
                    .enumerate()
                    .map(|(k, &algo)| {
                        let stream = (seed * 3 + k as u64) + 1000 * n as u64;
                        pooled_delays(
                            net,
                            &run_algo(algo, net, &g, 50.0, &mut RngStream::split(5001, stream)),
                        )
                    })
                    .collect();
                pairs.map(|(x, y)| ks_two_sample(&d[x], &d[y]).unwrap().p_value > 0.01)
            })
            .collect();
        total += res.len();
        for r in res {
            for k in 0..3 {
                passes[k] += r[k] as usize;
            }
        }
    }
    let sizes: Vec<usize> = nets.iter().map(|n| n.m()).collect();
    let detail = format!(
        "nets M={sizes:?}; passes per pair (full/local, full/naive, local/naive): {passes:?} of {total}"
    );
    for p in passes {
        ensure(p as f64 >= 0.95 * total as f64, detail.clone())?;
    }
    Ok(detail)
}

// 6. Balanced networks: empirical rates within 3 sigma of the target.
fn mean_intensity_consistency() -> Outcome {
    let horizon = 100.0;
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    for (k, (m, p)) in [(10usize, 0.2), (20, 0.1)].into_iter().enumerate() {
        let mut rng = RngStream::new(6000 + k as u64);
        let net = loop {
            let edges = gen_erdos_renyi(m, p, true, &mut rng).unwrap();
            if let Ok(net) = ppsim::bench::build_balanced_network(&edges, 5.0, 0.02, 10.0) {
                break net;
            }
        };
        let g = DependenceGraph::from_network(&net);
        let mean = net.mean_intensity().unwrap();
        ensure(
            mean.iter().all(|x| (x - 10.0).abs() < 1e-9),
            "balancing missed the target",
        )?;
        // asymptotic count covariance: T (I-H)^-1 diag(m) (I-H)^-T
        let h = net.connectivity().integral_matrix().to_dense();
        let inv = (DMatrix::identity(m, m) - h).try_inverse().unwrap();
        let cov = &inv
            * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(mean.clone()))
            * inv.transpose();
        for algo in [Algorithm::FullScan, Algorithm::LocalGraph] {
            let r = run_algo(
                algo,
                &net,
                &g,
                horizon,
                &mut RngStream::split(6100 + k as u64, algo as u64),
            );
            for (i, &c) in r.counts().iter().enumerate() {
                let rate = c as f64 / horizon;
                let sigma = (cov[(i, i)] / horizon).sqrt();
                let z = (rate - 10.0).abs() / sigma;
                worst = worst.max(z);
                checked += 1;
                if z > 3.0 {
                    failed.push(format!(
                        "{algo} M={m} node {}: rate {rate:.3}, sigma {sigma:.3}",
                        i + 1
                    ));
                }
            }
        }
    }
    ensure(failed.is_empty(), failed.join("; "))?;
    Ok(format!("{checked} node rates, max |z| = {worst:.2}"))
}

fn bench_config(algo: Algorithm, m_values: &[usize]) -> BenchConfig {
    BenchConfig {
        horizon: 10.0,
        repetitions: 10,
        warmup: 1,
        seed: 7,
        max_attempts: 200,
        fullscan_max_m: usize::MAX,
        m_values: m_values.to_vec(),
        algorithms: vec![algo],
        ..BenchConfig::default()
    }
}

// 7. Log-log slope of median wall time against M, mean degree 4.
fn complexity_scaling() -> Outcome {
    let mut out = Vec::new();
    for (algo, ms, target) in [
        (
            Algorithm::FullScan,
            vec![50, 100, 150, 200, 250, 300, 350, 400],
            2.0,
        ),
        (
            Algorithm::LocalGraph,
            vec![50, 100, 200, 400, 800, 1200],
            1.0,
        ),
    ] {
        let config = BenchConfig {
            topologies: vec![ppsim::bench::Topology::ErdosRenyi],
            er_p: "degree:4".parse().unwrap(),
            ..bench_config(algo, &ms)
        };
        let res = run_scaling_suite(&config).map_err(|e| e.to_string())?;
        for r in &res.rows {
            println!(
                "    {algo} M={:<5} edges={:<5} points={:<8} median={:.4}s mean={:.4}s",
                r.m, r.edges, r.points_median, r.wall_median, r.wall_mean
            );
        }
        let fit = fit_loglog_slope(&res.rows, None, algo).map_err(|e| e.to_string())?;
        let msg = format!(
            "{algo} slope {:.3} +- {:.3} (target {target} +- 0.3, {} discarded draws)",
            fit.slope,
            fit.stderr,
            res.discards.len()
        );
        ensure((fit.slope - target).abs() <= 0.3, msg.clone())?;
        out.push(msg);
    }
    Ok(out.join("; "))
}

// 8. Measured time proportional to the predictor over all topologies.
fn predictor_proportionality() -> Outcome {
    let mut out = Vec::new();
    let mut failed = Vec::new();
    for (algo, ms) in [
        (
            Algorithm::FullScan,
            vec![10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 150, 200],
        ),
        (
            Algorithm::LocalGraph,
            vec![10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 150, 200, 400, 800],
        ),
    ] {
        let res = run_scaling_suite(&bench_config(algo, &ms)).map_err(|e| e.to_string())?;
        let fit = fit_predictor_slope(&res.rows, algo).map_err(|e| e.to_string())?;
        let mut per_topology = Vec::new();
        for topo in ["erdos_renyi", "cascade", "sbm"] {
            let rows: Vec<_> = res
                .rows
                .iter()
                .filter(|r| r.topology == topo)
                .cloned()
                .collect();
            if let Ok(f) = fit_predictor_slope(&rows, algo) {
                per_topology.push(format!("{topo} {:.3}", f.slope));
            }
        }
        let msg = format!(
            "{algo} slope {:.3} +- {:.3} over {} rows ({}; {} discarded draws)",
            fit.slope,
            fit.stderr,
            fit.n,
            per_topology.join(", "),
            res.discards.len()
        );
        if (fit.slope - 1.0).abs() > 0.15 {
            failed.push(msg.clone());
        }
        out.push(msg);
    }
    ensure(failed.is_empty(), out.join("; "))?;
    Ok(out.join("; "))
}

// 9. Debug-mode locality check on M = 50.
fn locality_soundness() -> Outcome {
    let mut rng = RngStream::new(9000);
    let net = random_net(&mut rng, 50, 4.0 / 50.0, 0.8);
    let g = DependenceGraph::from_network(&net);
    let mut checker = LocalityChecker::new(&net, &g);
    let r = simulate_localgraph_with(
        &net,
        &g,
        10.0,
        &mut RngStream::new(9001),
        SimOptions { debug_checks: true },
        &mut checker,
    )
    .map_err(|e| e.to_string())?;
    ensure(checker.events == r.len(), "observer missed events")?;
    ensure(!r.is_empty(), "no points")?;
    Ok(format!(
        "{} events, {} edges, max discrepancy {:.2e}",
        r.len(),
        g.edge_count(),
        checker.worst
    ))
}

// 10. Same configuration and seed give byte-identical output, whatever the
// number of threads.
fn determinism() -> Outcome {
    let (net, g, _, _) = reference_network();
    let text = net.to_text();
    let reloaded = HawkesNetwork::from_text(&text).map_err(|e| e.to_string())?;
    let g2 = DependenceGraph::from_network(&reloaded);
    let algos = [Algorithm::FullScan, Algorithm::LocalGraph, Algorithm::Naive];
    let horizon = |a: Algorithm| if a == Algorithm::Naive { 2.0 } else { 5.0 };
    let csvs = |threads: usize, net: &HawkesNetwork, g: &DependenceGraph| -> Vec<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            (0..12u64)
                .into_par_iter()
                .map(|job| {
                    let algo = algos[(job % 3) as usize];
                    let mut rng = RngStream::split(10_000, job);
                    run_algo(algo, net, g, horizon(algo), &mut rng).to_csv()
                })
                .collect()
        })
    };
    let one = csvs(1, &net, &g);
    let again = csvs(1, &reloaded, &g2);
    let four = csvs(4, &net, &g);
    ensure(one == again, "repeated run (reloaded network) differs")?;
    ensure(one == four, "output depends on the thread count")?;
    let bytes: usize = one.iter().map(String::len).sum();
    Ok(format!(
        "12 runs x 3 executions identical ({bytes} bytes of CSV)"
    ))
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [Criterion; 10] = [
        (1, "scheduler algebra", scheduler_algebra),
        (2, "sampler correctness", sampler_correctness),
        (3, "statistical reproduction", statistical_reproduction),
        (4, "martingale residuals", martingale_centering),
        (5, "cross-simulator equivalence", cross_simulator),
        (6, "mean-intensity consistency", mean_intensity_consistency),
        (9, "locality soundness", locality_soundness),
        (10, "determinism", determinism),
        (7, "complexity scaling", complexity_scaling),
        (8, "predictor proportionality", predictor_proportionality),
    ];
    let mut results = Vec::new();
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(o) => o,
            Err(e) => Err(format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            )),
        };
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {id:>2} [{name}]: {tag} ({secs:.1}s) {detail}");
        results.push((id, outcome.is_ok()));
    }
    results.sort();
    let failed: Vec<usize> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" {failed:?}")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
