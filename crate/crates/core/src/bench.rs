//! Scaling experiments and cost predictors.
//!
//! With `m` the mean intensity vector and `R` the adjacency matrix
//! (`R[i][j] = 1` when `j -> i`), the expected work over `[0, T]` is about
//!
//! * full scan: `T |m|_1 (M + |Rm|_1) ln(M + |Rm|_1)`,
//! * local graph: `T (m'Rm + ln(M) |m|_1 + m'R'Rm + ln(M) |Rm|_1)`.
//!
//! Logarithm arguments are clamped to at least 2 so the predictors stay
//! positive on degenerate inputs.
//!
//! [`run_scaling_suite`] generates graphs over a grid of sizes, attaches the
//! boxcar kernel to every edge, balances the spontaneous rates to a common
//! mean intensity, and times both simulators.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::fullscan::simulate_fullscan;
use crate::graph::{
    gen_cascade, gen_erdos_renyi, gen_stochastic_block, BlockModel, DependenceGraph, EdgeSet,
    GraphError,
};
use crate::hawkes::{Connectivity, HawkesNetwork, InteractionKernel, ModelError, SparseMatrix};
use crate::localgraph::simulate_localgraph;
use crate::rng::RngStream;
use crate::sim::{Algorithm, SimError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("need at least {needed} distinct sizes for a slope fit, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn clamped_ln(x: f64) -> f64 {
    x.max(2.0).ln()
}

fn adjacency_of(graph: &DependenceGraph) -> SparseMatrix {
    let mut r = SparseMatrix::zeros(graph.m());
    for i in 0..graph.m() {
        for &j in graph.parents(i) {
            r.add(i, j, 1.0);
        }
    }
    r
}

fn check_sizes(net: &HawkesNetwork, graph: &DependenceGraph) -> Result<(), BenchError> {
    if net.m() != graph.m() {
        return Err(BenchError::Invalid(format!(
            "graph has {} nodes, network {}",
            graph.m(),
            net.m()
        )));
    }
    Ok(())
}

/// `T |m|_1 (M + |Rm|_1) ln(M + |Rm|_1)`.
pub fn predict_fullscan(
    net: &HawkesNetwork,
    graph: &DependenceGraph,
    horizon: f64,
) -> Result<f64, BenchError> {
    check_sizes(net, graph)?;
    let m = net.mean_intensity()?;
    let rm = adjacency_of(graph).mul_vec(&m);
    let m1: f64 = m.iter().sum();
    let size = net.m() as f64 + rm.iter().sum::<f64>();
    Ok(horizon * m1 * size * clamped_ln(size))
}

/// `T (m'Rm + ln(M) |m|_1 + m'R'Rm + ln(M) |Rm|_1)`.
pub fn predict_localgraph(
    net: &HawkesNetwork,
    graph: &DependenceGraph,
    horizon: f64,
) -> Result<f64, BenchError> {
    check_sizes(net, graph)?;
    let m = net.mean_intensity()?;
    let rm = adjacency_of(graph).mul_vec(&m);
    let ln_m = clamped_ln(net.m() as f64);
    let m_rm: f64 = m.iter().zip(&rm).map(|(a, b)| a * b).sum();
    let rm_rm: f64 = rm.iter().map(|x| x * x).sum();
    let m1: f64 = m.iter().sum();
    let rm1: f64 = rm.iter().sum();
    Ok(horizon * (m_rm + ln_m * m1 + rm_rm + ln_m * rm1))
}

pub fn predict(
    algo: Algorithm,
    net: &HawkesNetwork,
    graph: &DependenceGraph,
    horizon: f64,
) -> Result<f64, BenchError> {
    match algo {
        Algorithm::FullScan => predict_fullscan(net, graph, horizon),
        Algorithm::LocalGraph => predict_localgraph(net, graph, horizon),
        Algorithm::Naive => Err(BenchError::Invalid(
            "no predictor for the naive simulator".into(),
        )),
    }
}

/// Edge probability rule for Erdos-Renyi graphs.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbabilitySpec {
    /// `{0, 1/M, 2/M, ...}` up to `(ln M - 1)/M`.
    Grid,
    /// `p = d / M`.
    MeanDegree(f64),
    Fixed(Vec<f64>),
}

impl ProbabilitySpec {
    pub fn values(&self, m: usize) -> Vec<f64> {
        let mf = m as f64;
        match self {
            ProbabilitySpec::Grid => {
                let top = mf.ln() - 1.0;
                let mut v = Vec::new();
                let mut k = 0.0;
                while k <= top + 1e-12 {
                    v.push((k / mf).min(1.0));
                    k += 1.0;
                }
                if v.is_empty() {
                    v.push(0.0);
                }
                v
            }
            ProbabilitySpec::MeanDegree(d) => vec![(d / mf).min(1.0)],
            ProbabilitySpec::Fixed(v) => v.clone(),
        }
    }
}

impl FromStr for ProbabilitySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "grid" {
            return Ok(ProbabilitySpec::Grid);
        }
        if let Some(d) = s.strip_prefix("degree:") {
            let d: f64 = d.trim().parse().map_err(|e| format!("bad degree: {e}"))?;
            if !(d >= 0.0 && d.is_finite()) {
                return Err(format!("bad degree {d}"));
            }
            return Ok(ProbabilitySpec::MeanDegree(d));
        }
        let v = parse_list::<f64>(s)?;
        if v.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err("probabilities must lie in [0, 1]".into());
        }
        Ok(ProbabilitySpec::Fixed(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Topology {
    ErdosRenyi,
    Cascade,
    StochasticBlock,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::ErdosRenyi => "erdos_renyi",
            Topology::Cascade => "cascade",
            Topology::StochasticBlock => "sbm",
        }
    }
}

impl FromStr for Topology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "erdos_renyi" | "er" => Ok(Topology::ErdosRenyi),
            "cascade" => Ok(Topology::Cascade),
            "sbm" | "stochastic_block" => Ok(Topology::StochasticBlock),
            other => Err(format!("unknown topology `{other}`")),
        }
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|e| format!("`{x}`: {e}")))
        .collect()
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected a boolean, got `{other}`")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub horizon: f64,
    pub repetitions: usize,
    pub warmup: usize,
    pub seed: u64,
    pub target_rate: f64,
    pub kernel_height: f64,
    pub kernel_width: f64,
    pub self_loops: bool,
    /// Graph draws per `(topology, M, p)` point.
    pub graphs: usize,
    /// Graph draws tried per slot before giving up on discards.
    pub max_attempts: usize,
    pub threads: usize,
    pub fullscan_max_m: usize,
    pub m_values: Vec<usize>,
    pub topologies: Vec<Topology>,
    pub er_p: ProbabilitySpec,
    pub sbm_presets: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            repetitions: 10,
            warmup: 1,
            seed: 1,
            target_rate: 10.0,
            kernel_height: 5.0,
            kernel_width: 0.02,
            self_loops: true,
            graphs: 1,
            max_attempts: 1,
            threads: 1,
            fullscan_max_m: 400,
            m_values: vec![10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 200, 400, 800, 1200],
            topologies: vec![
                Topology::ErdosRenyi,
                Topology::Cascade,
                Topology::StochasticBlock,
            ],
            er_p: ProbabilitySpec::Grid,
            sbm_presets: vec![1, 2, 3],
            algorithms: vec![Algorithm::FullScan, Algorithm::LocalGraph],
        }
    }
}

impl BenchConfig {
    /// `key = value` lines; `#` starts a comment. Missing keys keep their
    /// defaults.
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut c = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| BenchError::Config {
                line: idx + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim().trim_matches('"'));
            let num = |v: &str| v.parse::<f64>().map_err(|e| err(format!("{key}: {e}")));
            let int = |v: &str| v.parse::<usize>().map_err(|e| err(format!("{key}: {e}")));
            match key {
                "horizon" => c.horizon = num(value)?,
                "repetitions" => c.repetitions = int(value)?,
                "warmup" => c.warmup = int(value)?,
                "seed" => c.seed = value.parse().map_err(|e| err(format!("seed: {e}")))?,
                "target_rate" => c.target_rate = num(value)?,
                "kernel_height" => c.kernel_height = num(value)?,
                "kernel_width" => c.kernel_width = num(value)?,
                "self_loops" => c.self_loops = parse_bool(value).map_err(err)?,
                "graphs" => c.graphs = int(value)?,
                "max_attempts" => c.max_attempts = int(value)?,
                "threads" => c.threads = int(value)?,
                "fullscan_max_m" => c.fullscan_max_m = int(value)?,
                "m_values" => c.m_values = parse_list(value).map_err(err)?,
                "topologies" => c.topologies = parse_list(value).map_err(err)?,
                "er_p" => c.er_p = value.parse().map_err(err)?,
                "sbm_presets" => c.sbm_presets = parse_list(value).map_err(err)?,
                "algorithms" => c.algorithms = parse_list(value).map_err(err)?,
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Invalid(m.to_string()));
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("horizon must be positive");
        }
        if self.repetitions == 0 || self.graphs == 0 || self.max_attempts == 0 {
            return bad("repetitions, graphs and max_attempts must be at least 1");
        }
        if !(self.target_rate > 0.0 && self.kernel_height > 0.0 && self.kernel_width > 0.0) {
            return bad("target_rate and kernel parameters must be positive");
        }
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return bad("m_values must be nonempty and positive");
        }
        if self.topologies.is_empty() || self.algorithms.is_empty() {
            return bad("topologies and algorithms must be nonempty");
        }
        if self.algorithms.contains(&Algorithm::Naive) {
            return bad("the naive simulator is not benchmarked");
        }
        if self.sbm_presets.iter().any(|p| !(1..=3).contains(p)) {
            return bad("sbm presets are 1, 2 or 3");
        }
        Ok(())
    }
}

/// One `(topology, M, parameter, graph draw)` cell of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub index: u64,
    pub topology: Topology,
    pub m: usize,
    /// Edge probability for Erdos-Renyi, preset number for blocks.
    pub param: String,
    pub graph_draw: usize,
}

fn instances(config: &BenchConfig) -> Vec<(Instance, Option<f64>, Option<usize>)> {
    let mut out = Vec::new();
    let mut index = 0u64;
    let mut push = |topology, m, param: String, p, preset, out: &mut Vec<_>| {
        for graph_draw in 0..config.graphs {
            out.push((
                Instance {
                    index,
                    topology,
                    m,
                    param: param.clone(),
                    graph_draw,
                },
                p,
                preset,
            ));
            index += 1;
        }
    };
    for &topology in &config.topologies {
        for &m in &config.m_values {
            match topology {
                Topology::ErdosRenyi => {
                    for p in config.er_p.values(m) {
                        push(topology, m, format!("{p:?}"), Some(p), None, &mut out);
                    }
                }
                Topology::Cascade => {
                    if m >= 2 {
                        push(topology, m, "-".into(), None, None, &mut out);
                    }
                }
                Topology::StochasticBlock => {
                    for &preset in &config.sbm_presets {
                        push(
                            topology,
                            m,
                            preset.to_string(),
                            None,
                            Some(preset),
                            &mut out,
                        );
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub topology: String,
    pub m: usize,
    pub param: String,
    /// Stream id of the accepted graph draw.
    pub seed: u64,
    pub algo: Algorithm,
    pub edges: usize,
    pub points_median: f64,
    pub points_mean: f64,
    pub wall_median: f64,
    pub wall_mean: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discard {
    pub topology: String,
    pub m: usize,
    pub param: String,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    pub discards: Vec<Discard>,
}

impl BenchOutcome {
    /// `topology,M,p_or_preset,seed,algo,points,wall_seconds,predicted`, with
    /// medians over repetitions.
    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("topology,M,p_or_preset,seed,algo,points,wall_seconds,predicted\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{:?},{:?}",
                r.topology,
                r.m,
                r.param,
                r.seed,
                r.algo,
                r.points_median,
                r.wall_median,
                r.predicted
            );
        }
        s
    }

    /// Human-readable table with both median and mean timings, followed by
    /// the discarded graphs.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<12} {:>6} {:>22} {:>10} {:>6} {:>12} {:>12} {:>12} {:>14}",
            "topology",
            "M",
            "p_or_preset",
            "algo",
            "edges",
            "points",
            "median_s",
            "mean_s",
            "predicted"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<12} {:>6} {:>22} {:>10} {:>6} {:>12.1} {:>12.6} {:>12.6} {:>14.4e}",
                r.topology,
                r.m,
                r.param,
                r.algo,
                r.edges,
                r.points_mean,
                r.wall_median,
                r.wall_mean,
                r.predicted
            );
        }
        let _ = writeln!(s, "discarded graphs: {}", self.discards.len());
        for d in &self.discards {
            let _ = writeln!(
                s,
                "  {} M={} {} seed={}: {}",
                d.topology, d.m, d.param, d.seed, d.reason
            );
        }
        s
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Boxcar kernel on every edge, rates balanced to `target`.
pub fn build_balanced_network(
    edges: &EdgeSet,
    height: f64,
    width: f64,
    target: f64,
) -> Result<HawkesNetwork, ModelError> {
    let kernel = InteractionKernel::boxcar(height, width)?;
    let conn = Connectivity::uniform(edges.m, &edges.edges, kernel)?;
    HawkesNetwork::balanced(conn, target)
}

const GRAPH_SALT: u64 = 0x6a09_e667_f3bc_c908;
const SIM_SALT: u64 = 0xbb67_ae85_84ca_a73b;

fn generate(
    config: &BenchConfig,
    inst: &Instance,
    p: Option<f64>,
    preset: Option<usize>,
    rng: &mut RngStream,
) -> Result<EdgeSet, GraphError> {
    match inst.topology {
        Topology::ErdosRenyi => gen_erdos_renyi(inst.m, p.unwrap_or(0.0), config.self_loops, rng),
        Topology::Cascade => gen_cascade(inst.m),
        Topology::StochasticBlock => {
            let model = BlockModel::preset(preset.unwrap_or(1), inst.m)?;
            gen_stochastic_block(inst.m, &model, config.self_loops, rng)
        }
    }
}

fn graph_stream(inst: &Instance, attempt: usize) -> u64 {
    (inst.index << 20) | attempt as u64
}

/// Draws graphs for `inst` until one survives balancing, recording every
/// discarded draw.
pub fn accepted_network(
    config: &BenchConfig,
    inst: &Instance,
    p: Option<f64>,
    preset: Option<usize>,
    discards: &mut Vec<Discard>,
) -> Result<Option<(u64, HawkesNetwork)>, BenchError> {
    for attempt in 0..config.max_attempts {
        let stream = graph_stream(inst, attempt);
        let mut rng = RngStream::split(config.seed ^ GRAPH_SALT, stream);
        let edges = generate(config, inst, p, preset, &mut rng)?;
        match build_balanced_network(
            &edges,
            config.kernel_height,
            config.kernel_width,
            config.target_rate,
        ) {
            Ok(net) => return Ok(Some((stream, net))),
            Err(e) if e.is_discard() => discards.push(Discard {
                topology: inst.topology.name().into(),
                m: inst.m,
                param: inst.param.clone(),
                seed: stream,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(None)
}

/// Simulates `net` once and returns `(points, wall_seconds)`.
pub fn timed_run(
    algo: Algorithm,
    net: &HawkesNetwork,
    graph: &DependenceGraph,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<(usize, f64), BenchError> {
    let r = match algo {
        Algorithm::FullScan => simulate_fullscan(net, horizon, rng)?,
        Algorithm::LocalGraph => simulate_localgraph(net, graph, horizon, rng)?,
        Algorithm::Naive => return Err(BenchError::Invalid("naive is not benchmarked".into())),
    };
    Ok((r.len(), r.meta.wall_seconds))
}

fn run_instance(
    config: &BenchConfig,
    inst: &Instance,
    p: Option<f64>,
    preset: Option<usize>,
) -> Result<BenchOutcome, BenchError> {
    let mut out = BenchOutcome::default();
    let Some((stream, net)) = accepted_network(config, inst, p, preset, &mut out.discards)? else {
        return Ok(out);
    };
    let graph = DependenceGraph::from_network(&net);
    for (a, &algo) in config.algorithms.iter().enumerate() {
        if algo == Algorithm::FullScan && inst.m > config.fullscan_max_m {
            continue;
        }
        let predicted = predict(algo, &net, &graph, config.horizon)?;
        let master = config.seed ^ SIM_SALT ^ ((a as u64) << 56);
        for w in 0..config.warmup {
            let mut rng = RngStream::split(master, (stream << 12) | (4095 - w as u64));
            timed_run(algo, &net, &graph, config.horizon, &mut rng)?;
        }
        let mut points = Vec::with_capacity(config.repetitions);
        let mut walls = Vec::with_capacity(config.repetitions);
        for rep in 0..config.repetitions {
            let mut rng = RngStream::split(master, (stream << 12) | rep as u64);
            let (n, wall) = timed_run(algo, &net, &graph, config.horizon, &mut rng)?;
            points.push(n as f64);
            walls.push(wall);
        }
        out.rows.push(BenchRow {
            topology: inst.topology.name().into(),
            m: inst.m,
            param: inst.param.clone(),
            seed: stream,
            algo,
            edges: graph.edge_count(),
            points_median: median(&points),
            points_mean: mean(&points),
            wall_median: median(&walls),
            wall_mean: mean(&walls),
            predicted,
        });
    }
    Ok(out)
}

/// Runs the whole grid. Instances are spread over `config.threads` workers;
/// the output order only depends on the configuration.
pub fn run_scaling_suite(config: &BenchConfig) -> Result<BenchOutcome, BenchError> {
    config.validate()?;
    let work = instances(config);
    let results: Vec<Result<BenchOutcome, BenchError>> = if config.threads <= 1 {
        work.iter()
            .map(|(inst, p, preset)| run_instance(config, inst, *p, *preset))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| BenchError::Invalid(e.to_string()))?;
        pool.install(|| {
            work.par_iter()
                .map(|(inst, p, preset)| run_instance(config, inst, *p, *preset))
                .collect()
        })
    };
    let mut outcome = BenchOutcome::default();
    for r in results {
        let r = r?;
        outcome.rows.extend(r.rows);
        outcome.discards.extend(r.discards);
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub n: usize,
}

/// Least-squares fit of `ln y` against `ln x`. Needs `min_distinct`
/// distinct `x` values.
pub fn loglog_fit(xs: &[f64], ys: &[f64], min_distinct: usize) -> Result<SlopeFit, BenchError> {
    if xs.len() != ys.len() {
        return Err(BenchError::Invalid("x and y differ in length".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(BenchError::Invalid(
            "log-log fit needs positive finite values".into(),
        ));
    }
    let mut distinct: Vec<f64> = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < min_distinct.max(2) {
        return Err(BenchError::InsufficientPoints {
            needed: min_distinct.max(2),
            got: distinct.len(),
        });
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if lx.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(SlopeFit {
        slope,
        stderr,
        intercept,
        n: lx.len(),
    })
}

/// Slope of `ln(median wall time)` against `ln M` over the rows of one
/// algorithm, optionally restricted to one topology. Rows sharing `M` are
/// aggregated by their median first.
pub fn fit_loglog_slope(
    rows: &[BenchRow],
    topology: Option<&str>,
    algo: Algorithm,
) -> Result<SlopeFit, BenchError> {
    let mut by_m: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in rows
        .iter()
        .filter(|r| r.algo == algo && topology.is_none_or(|t| r.topology == t))
    {
        by_m.entry(r.m).or_default().push(r.wall_median);
    }
    let xs: Vec<f64> = by_m.keys().map(|&m| m as f64).collect();
    let ys: Vec<f64> = by_m.values().map(|v| median(v)).collect();
    loglog_fit(&xs, &ys, 5)
}

/// Slope of `ln(measured)` against `ln(predicted)` for one algorithm.
pub fn fit_predictor_slope(rows: &[BenchRow], algo: Algorithm) -> Result<SlopeFit, BenchError> {
    let sel: Vec<&BenchRow> = rows.iter().filter(|r| r.algo == algo).collect();
    let xs: Vec<f64> = sel.iter().map(|r| r.predicted).collect();
    let ys: Vec<f64> = sel.iter().map(|r| r.wall_median).collect();
    loglog_fit(&xs, &ys, 5)
}
