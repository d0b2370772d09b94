//! Linear multivariate Hawkes processes with piecewise-constant kernels.
//!
//! The intensity of node `i` is
//! `lambda_i(t) = nu_i + sum_j sum_{T in N_j, T < t} h_{j->i}(t - T)`.
//! Kernels are nonnegative step functions with finite support, stored both as
//! a sorted jump list and pre-encoded as a [`Scheduler`] ending with the jump
//! back to zero, so that applying a point is a shift followed by a union.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::scheduler::{Scheduler, SchedulerError};

const KERNEL_TOLERANCE: f64 = 1e-12;
const POWER_TOLERANCE: f64 = 1e-10;
const POWER_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("node {node} out of range for a network of {m} nodes")]
    NodeOutOfRange { node: usize, m: usize },
    #[error("expected {expected} spontaneous rates, got {got}")]
    RateCount { expected: usize, got: usize },
    #[error("spontaneous rate of node {node} is invalid: {value}")]
    InvalidRate { node: usize, value: f64 },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("duplicate kernel for edge {parent} -> {target}")]
    DuplicateEdge { parent: usize, target: usize },
    #[error("spectral radius {radius} is not below 1; the process explodes")]
    Explosive { radius: f64 },
    #[error("balancing gives a negative spontaneous rate {rate} at node {node}")]
    NegativeRate { node: usize, rate: f64 },
    #[error("I - H is singular")]
    Singular,
    #[error("power iteration did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("point at {time} precedes the current time {current} of node {node}")]
    Causality {
        node: usize,
        time: f64,
        current: f64,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
}

impl ModelError {
    /// Conditions under which a generated graph is thrown away rather than
    /// treated as a failure.
    pub fn is_discard(&self) -> bool {
        matches!(
            self,
            ModelError::Explosive { .. } | ModelError::NegativeRate { .. }
        )
    }
}

/// `(source, target, jumps, header line)` while parsing a network file.
type ParsedKernel = (usize, usize, Vec<(f64, f64)>, usize);

/// Nonnegative piecewise-constant interaction function with finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionKernel {
    jumps: Vec<(f64, f64)>,
    encoded: Scheduler,
    support: f64,
    integral: f64,
    max_level: f64,
}

impl InteractionKernel {
    /// Builds a kernel from `(delay, jump)` pairs. Jumps at equal delays are
    /// merged; every level must be nonnegative and the last one zero.
    pub fn from_jumps(jumps: &[(f64, f64)]) -> Result<Self, ModelError> {
        if jumps.is_empty() {
            return Err(ModelError::InvalidKernel("no breakpoints".into()));
        }
        let mut merged: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
        for &(t, d) in jumps {
            if !t.is_finite() || t < 0.0 {
                return Err(ModelError::InvalidKernel(format!("bad delay {t}")));
            }
            if !d.is_finite() {
                return Err(ModelError::InvalidKernel(format!("bad jump {d} at {t}")));
            }
            let t = t + 0.0;
            // nonnegative floats order like their bit patterns
            merged.entry(t.to_bits()).or_insert((t, 0.0)).1 += d;
        }
        let jumps: Vec<(f64, f64)> = merged.into_values().collect();

        let mut level = 0.0;
        let mut max_level = 0.0f64;
        let mut integral = 0.0;
        for w in jumps.windows(2) {
            level += w[0].1;
            if level < -KERNEL_TOLERANCE {
                return Err(ModelError::InvalidKernel(format!(
                    "negative level {level} at delay {}",
                    w[0].0
                )));
            }
            max_level = max_level.max(level);
            integral += level.max(0.0) * (w[1].0 - w[0].0);
        }
        let (support, last) = *jumps.last().unwrap();
        level += last;
        if jumps.len() == 1 || level.abs() > KERNEL_TOLERANCE * max_level.max(1.0) {
            return Err(ModelError::InvalidKernel(format!(
                "kernel must return to 0, final level is {level}"
            )));
        }
        let encoded = Scheduler::from_events(jumps.iter().copied())?;
        Ok(Self {
            jumps,
            encoded,
            support,
            integral,
            max_level,
        })
    }

    /// `height` on `[0, width)`, zero afterwards.
    pub fn boxcar(height: f64, width: f64) -> Result<Self, ModelError> {
        if !(height >= 0.0 && width > 0.0) {
            return Err(ModelError::InvalidKernel(format!(
                "boxcar needs height >= 0 and width > 0, got {height}, {width}"
            )));
        }
        Self::from_jumps(&[(0.0, height), (width, -height)])
    }

    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    pub fn encoded(&self) -> &Scheduler {
        &self.encoded
    }

    /// Delay after which the kernel is identically zero.
    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn max_level(&self) -> f64 {
        self.max_level
    }

    /// Number of breakpoints.
    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    /// `h(x)`, zero for negative delays.
    pub fn value_at(&self, x: f64) -> f64 {
        let mut level = 0.0;
        for &(t, d) in &self.jumps {
            if t > x {
                break;
            }
            level += d;
        }
        level
    }

    /// `integral_0^x h`, zero for `x <= 0`.
    pub fn primitive(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.support {
            return self.integral;
        }
        let mut level = 0.0;
        let mut acc = 0.0;
        let mut prev = 0.0;
        for &(t, d) in &self.jumps {
            if t >= x {
                break;
            }
            acc += level * (t - prev);
            level += d;
            prev = t;
        }
        acc + level * (x - prev)
    }
}

/// Sparse square matrix with nonnegative entries, stored by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    m.rows[i].push((j, v));
                }
            }
        }
        m
    }

    /// Adds `value` at `(row, col)`.
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        match self.rows[row].iter_mut().find(|(c, _)| *c == col) {
            Some(entry) => entry.1 += value,
            None => self.rows[row].push((col, value)),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                out[j] += v * x[i];
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                d[(i, j)] += v;
            }
        }
        d
    }

    /// Largest eigenvalue modulus (the Perron root).
    ///
    /// The matrix is split into strongly connected components; single nodes
    /// contribute their diagonal entry, plain cycles the geometric mean of
    /// their weights, and every other block is handled by power iteration on
    /// `B + I` (primitive for an irreducible nonnegative `B`) until the
    /// Collatz-Wielandt bounds agree to a relative 1e-10.
    pub fn spectral_radius(&self) -> Result<f64, ModelError> {
        let mut graph = DiGraph::<(), ()>::with_capacity(self.n, 0);
        let nodes: Vec<_> = (0..self.n).map(|_| graph.add_node(())).collect();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                if v != 0.0 {
                    graph.add_edge(nodes[j], nodes[i], ());
                }
            }
        }
        let mut radius = 0.0f64;
        for comp in tarjan_scc(&graph) {
            let members: Vec<usize> = comp.iter().map(|n| n.index()).collect();
            radius = radius.max(self.block_radius(&members)?);
        }
        Ok(radius)
    }

    fn block_radius(&self, members: &[usize]) -> Result<f64, ModelError> {
        let k = members.len();
        let mut local = vec![usize::MAX; self.n];
        for (pos, &i) in members.iter().enumerate() {
            local[i] = pos;
        }
        let block: Vec<Vec<(usize, f64)>> = members
            .iter()
            .map(|&i| {
                self.rows[i]
                    .iter()
                    .filter(|(j, v)| local[*j] != usize::MAX && *v != 0.0)
                    .map(|&(j, v)| (local[j], v.abs()))
                    .collect()
            })
            .collect();

        if k == 1 {
            return Ok(block[0].iter().map(|&(_, v)| v).sum());
        }
        if block.iter().all(|row| row.len() == 1) {
            // every node has a single in-block predecessor: a simple cycle
            let log_sum: f64 = block.iter().map(|row| row[0].1.ln()).sum();
            return Ok((log_sum / k as f64).exp());
        }

        let mut x = vec![1.0; k];
        for _ in 0..POWER_MAX_ITERATIONS {
            let y: Vec<f64> = block
                .iter()
                .zip(&x)
                .map(|(row, xi)| xi + row.iter().map(|&(j, v)| v * x[j]).sum::<f64>())
                .collect();
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for (yi, xi) in y.iter().zip(&x) {
                let r = yi / xi;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            let rho = 0.5 * (lo + hi) - 1.0;
            if hi - lo <= POWER_TOLERANCE * rho.max(f64::MIN_POSITIVE) {
                return Ok(rho);
            }
            let scale = y.iter().cloned().fold(0.0, f64::max);
            x = y.into_iter().map(|v| v / scale).collect();
        }
        Err(ModelError::NonConvergence(POWER_MAX_ITERATIONS))
    }
}

/// Kernel structure of a network without the spontaneous rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Connectivity {
    m: usize,
    // out[j]: (target, kernel) sorted by target
    out: Vec<Vec<(usize, Arc<InteractionKernel>)>>,
    // inc[i]: (source, kernel) sorted by source
    inc: Vec<Vec<(usize, Arc<InteractionKernel>)>>,
    edge_count: usize,
}

impl Connectivity {
    pub fn empty(m: usize) -> Self {
        Self {
            m,
            out: vec![Vec::new(); m],
            inc: vec![Vec::new(); m],
            edge_count: 0,
        }
    }

    /// Every listed edge `source -> target` gets the same kernel.
    pub fn uniform(
        m: usize,
        edges: &[(usize, usize)],
        kernel: InteractionKernel,
    ) -> Result<Self, ModelError> {
        let kernel = Arc::new(kernel);
        let mut c = Self::empty(m);
        for &(j, i) in edges {
            c.add_shared(j, i, Arc::clone(&kernel))?;
        }
        Ok(c)
    }

    /// Adds `kernel` on the edge `source -> target`. Kernels with zero
    /// integral are ignored: they are identically zero.
    pub fn add(
        &mut self,
        source: usize,
        target: usize,
        kernel: InteractionKernel,
    ) -> Result<(), ModelError> {
        self.add_shared(source, target, Arc::new(kernel))
    }

    pub fn add_shared(
        &mut self,
        source: usize,
        target: usize,
        kernel: Arc<InteractionKernel>,
    ) -> Result<(), ModelError> {
        for node in [source, target] {
            if node >= self.m {
                return Err(ModelError::NodeOutOfRange { node, m: self.m });
            }
        }
        if kernel.integral() == 0.0 {
            return Ok(());
        }
        let out = &mut self.out[source];
        match out.binary_search_by_key(&target, |(t, _)| *t) {
            Ok(_) => {
                return Err(ModelError::DuplicateEdge {
                    parent: source,
                    target,
                })
            }
            Err(pos) => out.insert(pos, (target, Arc::clone(&kernel))),
        }
        let inc = &mut self.inc[target];
        let pos = inc.binary_search_by_key(&source, |(s, _)| *s).unwrap_err();
        inc.insert(pos, (source, kernel));
        self.edge_count += 1;
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn kernel(&self, source: usize, target: usize) -> Option<&InteractionKernel> {
        let out = &self.out[source];
        out.binary_search_by_key(&target, |(t, _)| *t)
            .ok()
            .map(|pos| out[pos].1.as_ref())
    }

    /// `(target, kernel)` for every edge leaving `source`, by target.
    pub fn outgoing(&self, source: usize) -> &[(usize, Arc<InteractionKernel>)] {
        &self.out[source]
    }

    /// `(source, kernel)` for every edge entering `target`, by source.
    pub fn incoming(&self, target: usize) -> &[(usize, Arc<InteractionKernel>)] {
        &self.inc[target]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &InteractionKernel)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(j, row)| row.iter().map(move |(i, k)| (j, *i, k.as_ref())))
    }

    /// `H[i][j] = integral of h_{j->i}`.
    pub fn integral_matrix(&self) -> SparseMatrix {
        let mut h = SparseMatrix::zeros(self.m);
        for (j, i, k) in self.edges() {
            h.add(i, j, k.integral());
        }
        h
    }

    /// `R[i][j] = 1` when the edge `j -> i` is present.
    pub fn adjacency(&self) -> SparseMatrix {
        let mut r = SparseMatrix::zeros(self.m);
        for (j, i, _) in self.edges() {
            r.add(i, j, 1.0);
        }
        r
    }

    pub fn spectral_radius(&self) -> Result<f64, ModelError> {
        self.integral_matrix().spectral_radius()
    }

    /// Spontaneous rates `nu = (I - H) m` that make `target` the stationary
    /// mean intensity. Fails with a discard signal when the structure is
    /// explosive or some rate comes out negative.
    pub fn balance_rates(&self, target: &[f64]) -> Result<Vec<f64>, ModelError> {
        balance_rates(&self.integral_matrix(), target)
    }

    /// Largest breakpoint count over all kernels.
    pub fn max_kernel_len(&self) -> usize {
        self.edges().map(|(_, _, k)| k.len()).max().unwrap_or(0)
    }

    pub fn max_support(&self) -> f64 {
        self.edges()
            .map(|(_, _, k)| k.support())
            .fold(0.0, f64::max)
    }

    pub fn max_kernel_level(&self) -> f64 {
        self.edges()
            .map(|(_, _, k)| k.max_level())
            .fold(0.0, f64::max)
    }
}

/// `nu = (I - H) target`; errors on an explosive `H` or a negative rate.
pub fn balance_rates(h: &SparseMatrix, target: &[f64]) -> Result<Vec<f64>, ModelError> {
    if target.len() != h.dim() {
        return Err(ModelError::RateCount {
            expected: h.dim(),
            got: target.len(),
        });
    }
    let radius = h.spectral_radius()?;
    if radius >= 1.0 {
        return Err(ModelError::Explosive { radius });
    }
    let hm = h.mul_vec(target);
    let nu: Vec<f64> = target.iter().zip(&hm).map(|(m, x)| m - x).collect();
    if let Some((node, &rate)) = nu.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(ModelError::NegativeRate { node, rate });
    }
    Ok(nu)
}

/// Largest eigenvalue modulus of a nonnegative matrix.
pub fn spectral_radius(h: &SparseMatrix) -> Result<f64, ModelError> {
    h.spectral_radius()
}

/// A validated Hawkes network: kernels plus spontaneous rates, with the
/// integral matrix below the explosion threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct HawkesNetwork {
    connectivity: Connectivity,
    nu: Vec<f64>,
    radius: f64,
}

impl HawkesNetwork {
    pub fn new(connectivity: Connectivity, nu: Vec<f64>) -> Result<Self, ModelError> {
        let m = connectivity.m();
        if nu.len() != m {
            return Err(ModelError::RateCount {
                expected: m,
                got: nu.len(),
            });
        }
        if let Some((node, &value)) = nu
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(ModelError::InvalidRate { node, value });
        }
        let radius = connectivity.spectral_radius()?;
        if radius >= 1.0 {
            return Err(ModelError::Explosive { radius });
        }
        Ok(Self {
            connectivity,
            nu,
            radius,
        })
    }

    /// Balances `connectivity` so that every node has stationary rate `target`.
    pub fn balanced(connectivity: Connectivity, target: f64) -> Result<Self, ModelError> {
        let nu = connectivity.balance_rates(&vec![target; connectivity.m()])?;
        Self::new(connectivity, nu)
    }

    /// Independent homogeneous Poisson processes.
    pub fn poisson(rates: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(Connectivity::empty(rates.len()), rates)
    }

    pub fn m(&self) -> usize {
        self.connectivity.m()
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn connectivity(&self) -> &Connectivity {
        &self.connectivity
    }

    pub fn spectral_radius(&self) -> f64 {
        self.radius
    }

    pub fn kernel(&self, source: usize, target: usize) -> Option<&InteractionKernel> {
        self.connectivity.kernel(source, target)
    }

    /// Stationary mean intensity `m = (I - H)^{-1} nu`, by LU with partial
    /// pivoting.
    pub fn mean_intensity(&self) -> Result<Vec<f64>, ModelError> {
        mean_intensity(&self.connectivity.integral_matrix(), &self.nu)
    }

    /// Serialises to the textual network format (1-based node indices).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "M {}", self.m());
        for (i, nu) in self.nu.iter().enumerate() {
            let _ = writeln!(s, "nu {} {:?}", i + 1, nu);
        }
        for (j, i, k) in self.connectivity.edges() {
            let _ = writeln!(s, "kernel {} {}", j + 1, i + 1);
            for &(t, d) in k.jumps() {
                let _ = writeln!(s, "{t:?} {d:?}");
            }
            s.push('\n');
        }
        s
    }

    /// Parses the textual network format written by [`HawkesNetwork::to_text`].
    ///
    /// ```text
    /// M 2
    /// nu 1 10.0
    /// nu 2 10.0
    /// kernel 1 2
    /// 0.0 5.0
    /// 0.02 -5.0
    /// ```
    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let err = |line: usize, message: String| ModelError::Parse { line, message };
        let mut m: Option<usize> = None;
        let mut nu: Vec<Option<f64>> = Vec::new();
        let mut kernels: Vec<ParsedKernel> = Vec::new();
        let mut in_kernel = false;

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                in_kernel = false;
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "M" => {
                    if m.is_some() {
                        return Err(err(lineno, "duplicate header".into()));
                    }
                    let count = fields
                        .get(1)
                        .and_then(|v| v.parse::<usize>().ok())
                        .ok_or_else(|| err(lineno, "expected `M <count>`".into()))?;
                    m = Some(count);
                    nu = vec![None; count];
                    in_kernel = false;
                }
                "nu" => {
                    let count = m.ok_or_else(|| err(lineno, "`nu` before header".into()))?;
                    let (node, value) = match fields.as_slice() {
                        [_, n, v] => (
                            parse_node(n, count).map_err(|e| err(lineno, e))?,
                            v.parse::<f64>()
                                .map_err(|e| err(lineno, format!("bad rate: {e}")))?,
                        ),
                        _ => return Err(err(lineno, "expected `nu <node> <rate>`".into())),
                    };
                    if nu[node].replace(value).is_some() {
                        return Err(err(
                            lineno,
                            format!("rate of node {} given twice", node + 1),
                        ));
                    }
                    in_kernel = false;
                }
                "kernel" => {
                    let count = m.ok_or_else(|| err(lineno, "`kernel` before header".into()))?;
                    let (j, i) = match fields.as_slice() {
                        [_, j, i] => (
                            parse_node(j, count).map_err(|e| err(lineno, e))?,
                            parse_node(i, count).map_err(|e| err(lineno, e))?,
                        ),
                        _ => return Err(err(lineno, "expected `kernel <from> <to>`".into())),
                    };
                    kernels.push((j, i, Vec::new(), lineno));
                    in_kernel = true;
                }
                _ if in_kernel => {
                    let pair = match fields.as_slice() {
                        [t, d] => (
                            t.parse::<f64>()
                                .map_err(|e| err(lineno, format!("bad delay: {e}")))?,
                            d.parse::<f64>()
                                .map_err(|e| err(lineno, format!("bad jump: {e}")))?,
                        ),
                        _ => return Err(err(lineno, "expected `<delay> <jump>`".into())),
                    };
                    kernels.last_mut().unwrap().2.push(pair);
                }
                other => return Err(err(lineno, format!("unexpected `{other}`"))),
            }
        }

        let m = m.ok_or_else(|| err(0, "missing `M <count>` header".into()))?;
        let nu: Vec<f64> = nu
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| err(0, format!("missing rate for node {}", i + 1))))
            .collect::<Result<_, _>>()?;
        let mut connectivity = Connectivity::empty(m);
        for (j, i, jumps, lineno) in kernels {
            let kernel =
                InteractionKernel::from_jumps(&jumps).map_err(|e| err(lineno, e.to_string()))?;
            connectivity
                .add(j, i, kernel)
                .map_err(|e| err(lineno, e.to_string()))?;
        }
        Self::new(connectivity, nu)
    }
}

fn parse_node(field: &str, m: usize) -> Result<usize, String> {
    let n: usize = field
        .parse()
        .map_err(|_| format!("bad node index `{field}`"))?;
    if n == 0 || n > m {
        return Err(format!("node {n} outside 1..={m}"));
    }
    Ok(n - 1)
}

/// Solves `(I - H) m = nu`.
pub fn mean_intensity(h: &SparseMatrix, nu: &[f64]) -> Result<Vec<f64>, ModelError> {
    let n = h.dim();
    if nu.len() != n {
        return Err(ModelError::RateCount {
            expected: n,
            got: nu.len(),
        });
    }
    let radius = h.spectral_radius()?;
    if radius >= 1.0 {
        return Err(ModelError::Explosive { radius });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let a = DMatrix::<f64>::identity(n, n) - h.to_dense();
    let b = DVector::from_column_slice(nu);
    let x = a.lu().solve(&b).ok_or(ModelError::Singular)?;
    Ok(x.iter().copied().collect())
}

/// Piecewise-constant intensity trajectories `L[i]`, one scheduler per node,
/// each describing `lambda_i` on `[t_i, +inf)` if no further point occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityState {
    lambdas: Vec<Scheduler>,
}

impl IntensityState {
    /// Every node starts at time 0 with its spontaneous rate.
    pub fn new(net: &HawkesNetwork) -> Self {
        let lambdas = net
            .nu()
            .iter()
            .map(|&nu| Scheduler::constant(0.0, nu).expect("0 is finite"))
            .collect();
        Self { lambdas }
    }

    pub fn from_schedulers(lambdas: Vec<Scheduler>) -> Self {
        Self { lambdas }
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn intensity(&self, node: usize) -> &Scheduler {
        &self.lambdas[node]
    }

    pub fn intensities(&self) -> &[Scheduler] {
        &self.lambdas
    }

    /// Start time of `L[node]`.
    pub fn current_time(&self, node: usize) -> f64 {
        self.lambdas[node].first().map_or(0.0, |e| e.time)
    }

    /// Intensity at the start of `L[node]`.
    pub fn start_level(&self, node: usize) -> f64 {
        self.lambdas[node].start_level().unwrap_or(0.0)
    }

    /// Piecewise-prunes `L[node]` to `t`.
    pub fn advance(&mut self, node: usize, t: f64) -> Result<(), ModelError> {
        let current = self.current_time(node);
        if t < current {
            return Err(ModelError::Causality {
                node,
                time: t,
                current,
            });
        }
        self.lambdas[node].prune_pcw(t)?;
        Ok(())
    }

    /// Registers a point of `source` at time `t` on each node of `targets`:
    /// `L[i]` is piecewise-pruned to `t` and, when the edge `source -> i`
    /// exists, the kernel shifted to `t` is added.
    pub fn apply_point(
        &mut self,
        net: &HawkesNetwork,
        source: usize,
        t: f64,
        targets: &[usize],
    ) -> Result<(), ModelError> {
        for &i in targets {
            if i >= self.len() {
                return Err(ModelError::NodeOutOfRange {
                    node: i,
                    m: self.len(),
                });
            }
            self.advance(i, t)?;
            if let Some(kernel) = net.kernel(source, i) {
                self.lambdas[i].union_shifted(kernel.encoded(), t)?;
            }
        }
        Ok(())
    }

    /// [`IntensityState::apply_point`] on every node.
    pub fn apply_point_all(
        &mut self,
        net: &HawkesNetwork,
        source: usize,
        t: f64,
    ) -> Result<(), ModelError> {
        for i in 0..self.len() {
            self.advance(i, t)?;
        }
        self.excite_children(net, source, t)
    }

    /// Adds every kernel leaving `source`, shifted to `t`, without pruning.
    pub fn excite_children(
        &mut self,
        net: &HawkesNetwork,
        source: usize,
        t: f64,
    ) -> Result<(), ModelError> {
        for (i, kernel) in net.connectivity().outgoing(source) {
            let current = self.current_time(*i);
            if t < current {
                return Err(ModelError::Causality {
                    node: *i,
                    time: t,
                    current,
                });
            }
            self.lambdas[*i].union_shifted(kernel.encoded(), t)?;
        }
        Ok(())
    }
}
