//! `ppsim` command-line front end: simulate a network, test a node's fit,
//! or run the scaling benchmark.
//!
//! Exit codes: 0 success, 1 I/O or other error, 2 invalid configuration,
//! 3 every generated graph was discarded, 4 internal invariant violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};

use ppsim::bench::{run_scaling_suite, BenchConfig, BenchError};
use ppsim::gof::{node_report, History};
use ppsim::graph::{gen_cascade, gen_erdos_renyi, gen_stochastic_block, BlockModel, EdgeSet};
use ppsim::hawkes::{Connectivity, HawkesNetwork, InteractionKernel, ModelError};
use ppsim::localgraph::simulate_localgraph_with;
use ppsim::rng::RngStream;
use ppsim::sim::{parse_points_csv, Algorithm, NoopObserver, SimError, SimOptions};
use ppsim::{simulate_naive, DependenceGraph};

#[derive(Parser)]
#[command(
    name = "ppsim",
    version,
    about = "Multivariate Hawkes process simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory and write `time,node` CSV.
    Simulate(SimulateArgs),
    /// Goodness-of-fit report for one node of a simulated trajectory.
    Gof(GofArgs),
    /// Run the scaling benchmark described by a key=value config.
    Bench(BenchArgs),
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long, default_value = "localgraph")]
    algo: Algorithm,
    /// Edge-list file, a network file (`--graph net:FILE`), or a generator:
    /// `er:M:p`, `cascade:M`, `sbm:M:preset`.
    #[arg(long)]
    graph: String,
    /// `boxcar:height:width` or `jumps:t,d;t,d;...`. Ignored for `net:` graphs.
    #[arg(long, default_value = "boxcar:5:0.02")]
    kernel: String,
    /// A single rate, a comma-separated list (one per node) or `balance:m`.
    /// Ignored for `net:` graphs.
    #[arg(long, default_value = "10")]
    nu: String,
    #[arg(long)]
    horizon: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Seed for graph generation; defaults to `--seed`.
    #[arg(long)]
    graph_seed: Option<u64>,
    /// Allow `i -> i` edges in generated graphs.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    self_loops: bool,
    /// Cross-check the incremental state while simulating.
    #[arg(long)]
    debug: bool,
    #[arg(long)]
    out: PathBuf,
    /// Also write the network in the textual network format.
    #[arg(long)]
    net_out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct GofArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    net: PathBuf,
    /// 1-based node index.
    #[arg(long)]
    node: usize,
    /// Observation horizon; defaults to the last point time.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            code: 1,
            error: e.into(),
        }
    }
}

fn config_error(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: e.into(),
    }
}

fn model_failure(e: ModelError) -> Failure {
    let code = if e.is_discard() { 3 } else { 2 };
    Failure {
        code,
        error: e.into(),
    }
}

fn sim_failure(e: SimError) -> Failure {
    let code = match &e {
        SimError::InvalidHorizon(_) | SimError::GraphMismatch { .. } => 2,
        SimError::Model(m) if m.is_discard() => 3,
        _ => 4,
    };
    Failure {
        code,
        error: e.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::from)
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::from)
}

fn parse_kernel(spec: &str) -> anyhow::Result<InteractionKernel> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("kernel spec `{spec}`"))?;
    let kernel = match kind {
        "boxcar" => {
            let (h, w) = rest
                .split_once(':')
                .ok_or_else(|| anyhow!("expected boxcar:height:width"))?;
            InteractionKernel::boxcar(h.parse()?, w.parse()?)?
        }
        "jumps" => {
            let mut jumps = Vec::new();
            for pair in rest.split(';').filter(|p| !p.trim().is_empty()) {
                let (t, d) = pair
                    .split_once(',')
                    .ok_or_else(|| anyhow!("expected `t,delta` in `{pair}`"))?;
                jumps.push((t.trim().parse()?, d.trim().parse()?));
            }
            InteractionKernel::from_jumps(&jumps)?
        }
        other => bail!("unknown kernel kind `{other}`"),
    };
    Ok(kernel)
}

fn parse_graph(spec: &str, self_loops: bool, rng: &mut RngStream) -> anyhow::Result<EdgeSet> {
    let parts: Vec<&str> = spec.split(':').collect();
    let size = |s: &str| {
        s.parse::<usize>()
            .with_context(|| format!("node count `{s}`"))
    };
    let edges = match parts.as_slice() {
        ["er", m, p] => gen_erdos_renyi(size(m)?, p.parse()?, self_loops, rng)?,
        ["cascade", m] => gen_cascade(size(m)?)?,
        ["sbm", m, preset] => {
            let m = size(m)?;
            let model = BlockModel::preset(preset.parse()?, m)?;
            gen_stochastic_block(m, &model, self_loops, rng)?
        }
        _ => EdgeSet::from_text(
            &fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?,
        )?,
    };
    Ok(edges)
}

fn build_network(args: &SimulateArgs) -> Result<HawkesNetwork, Failure> {
    if let Some(path) = args.graph.strip_prefix("net:") {
        return HawkesNetwork::from_text(&read(Path::new(path))?).map_err(config_error);
    }
    let mut rng = RngStream::new(args.graph_seed.unwrap_or(args.seed));
    let edges = parse_graph(&args.graph, args.self_loops, &mut rng).map_err(config_error)?;
    let kernel = parse_kernel(&args.kernel).map_err(config_error)?;
    let conn = Connectivity::uniform(edges.m, &edges.edges, kernel).map_err(model_failure)?;
    if let Some(target) = args.nu.strip_prefix("balance:") {
        let target: f64 = target.parse().map_err(config_error)?;
        return HawkesNetwork::balanced(conn, target).map_err(model_failure);
    }
    let values: Vec<f64> = args
        .nu
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(config_error)?;
    let nu = match values.as_slice() {
        [v] => vec![*v; edges.m],
        _ => values,
    };
    HawkesNetwork::new(conn, nu).map_err(model_failure)
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let net = build_network(&args)?;
    if let Some(path) = &args.net_out {
        write(path, &net.to_text())?;
    }
    let mut rng = RngStream::new(args.seed);
    let options = SimOptions {
        debug_checks: args.debug,
    };
    let result = match args.algo {
        Algorithm::FullScan => ppsim::fullscan::simulate_fullscan_with(
            &net,
            args.horizon,
            &mut rng,
            options,
            &mut NoopObserver,
        ),
        Algorithm::LocalGraph => {
            let graph = DependenceGraph::from_network(&net);
            simulate_localgraph_with(
                &net,
                &graph,
                args.horizon,
                &mut rng,
                options,
                &mut NoopObserver,
            )
        }
        Algorithm::Naive => simulate_naive(&net, args.horizon, &mut rng),
    }
    .map_err(sim_failure)?;
    if args.debug {
        result.check_invariants().map_err(sim_failure)?;
    }
    write(&args.out, &result.to_csv())?;
    let meta = &result.meta;
    eprintln!(
        "{}: {} points on {} nodes, {} iterations, {} tie warnings, {:.3}s",
        meta.algorithm,
        result.len(),
        result.m,
        meta.iterations,
        meta.tie_warnings,
        meta.wall_seconds
    );
    Ok(())
}

fn gof(args: GofArgs) -> Result<(), Failure> {
    let net = HawkesNetwork::from_text(&read(&args.net)?).map_err(config_error)?;
    let (times, marks) =
        parse_points_csv(&read(&args.points)?).map_err(|e| config_error(anyhow!(e)))?;
    if args.node == 0 || args.node > net.m() {
        return Err(config_error(anyhow!(
            "node {} out of range 1..={}",
            args.node,
            net.m()
        )));
    }
    let horizon = args
        .horizon
        .or_else(|| times.last().copied())
        .ok_or_else(|| config_error(anyhow!("no points and no --horizon")))?;
    let history = History::new(net.m(), horizon, &times, &marks).map_err(config_error)?;
    let report = node_report(&net, &history, args.node - 1).map_err(config_error)?;
    write(&args.out, &report.to_csv())?;
    print!("{}", report.to_key_value());
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let config = BenchConfig::parse(&read(&args.config)?).map_err(config_error)?;
    let outcome = run_scaling_suite(&config).map_err(|e| match e {
        BenchError::Sim(s) => sim_failure(s),
        BenchError::Model(m) => model_failure(m),
        other => config_error(other),
    })?;
    eprint!("{}", outcome.summary());
    write(&args.out, &outcome.to_csv())?;
    if outcome.rows.is_empty() && !outcome.discards.is_empty() {
        return Err(Failure {
            code: 3,
            error: anyhow!(
                "all {} generated graphs were discarded",
                outcome.discards.len()
            ),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Gof(a) => gof(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
