//! Local independence graphs and random topology generators.
//!
//! Nodes are 0-indexed here; the text format is 1-indexed.

use std::fmt::Write as _;

use thiserror::Error;

use crate::hawkes::{Connectivity, HawkesNetwork};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("edge {parent} -> {target} out of range for {m} nodes")]
    NodeOutOfRange {
        parent: usize,
        target: usize,
        m: usize,
    },
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("block sizes sum to {sum}, expected {m}")]
    BlockSizes { sum: usize, m: usize },
    #[error("probability matrix must be {blocks}x{blocks}")]
    ProbabilityShape { blocks: usize },
    #[error("a cascade needs at least 2 nodes, got {0}")]
    CascadeTooSmall(usize),
    #[error("unknown stochastic-block preset {0}")]
    UnknownPreset(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Directed edges `(source, target)`, sorted and without duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    pub m: usize,
    pub edges: Vec<(usize, usize)>,
}

impl EdgeSet {
    pub fn new(m: usize, mut edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        if let Some(&(source, target)) = edges.iter().find(|(j, i)| *j >= m || *i >= m) {
            return Err(GraphError::NodeOutOfRange {
                parent: source,
                target,
                m,
            });
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self { m, edges })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `M <count>` header then one `j i` line per edge, 1-based.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "M {}", self.m);
        for &(j, i) in &self.edges {
            let _ = writeln!(s, "{} {}", j + 1, i + 1);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, GraphError> {
        let err = |line: usize, message: String| GraphError::Parse { line, message };
        let mut m = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["M", count] => {
                    if m.is_some() {
                        return Err(err(lineno, "duplicate header".into()));
                    }
                    m = Some(
                        count
                            .parse::<usize>()
                            .map_err(|_| err(lineno, format!("bad node count `{count}`")))?,
                    );
                }
                [j, i] => {
                    let count = m.ok_or_else(|| err(lineno, "edge before `M` header".into()))?;
                    let parse = |f: &str| -> Result<usize, GraphError> {
                        match f.parse::<usize>() {
                            Ok(n) if n >= 1 && n <= count => Ok(n - 1),
                            _ => Err(err(lineno, format!("bad node `{f}`"))),
                        }
                    };
                    edges.push((parse(j)?, parse(i)?));
                }
                _ => return Err(err(lineno, format!("cannot parse `{line}`"))),
            }
        }
        let m = m.ok_or_else(|| err(0, "missing `M <count>` header".into()))?;
        Self::new(m, edges)
    }
}

/// Children and parents of every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependenceGraph {
    children: Vec<Vec<usize>>,
    parents: Vec<Vec<usize>>,
}

impl DependenceGraph {
    pub fn from_edges(edges: &EdgeSet) -> Self {
        let mut children = vec![Vec::new(); edges.m];
        let mut parents = vec![Vec::new(); edges.m];
        for &(j, i) in &edges.edges {
            children[j].push(i);
            parents[i].push(j);
        }
        for list in children.iter_mut().chain(parents.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        Self { children, parents }
    }

    /// Edge `j -> i` exactly when `h_{j->i}` has a nonzero integral.
    pub fn from_connectivity(c: &Connectivity) -> Self {
        let children = (0..c.m())
            .map(|j| c.outgoing(j).iter().map(|(i, _)| *i).collect())
            .collect();
        let parents = (0..c.m())
            .map(|i| c.incoming(i).iter().map(|(j, _)| *j).collect())
            .collect();
        Self { children, parents }
    }

    pub fn from_network(net: &HawkesNetwork) -> Self {
        Self::from_connectivity(net.connectivity())
    }

    pub fn m(&self) -> usize {
        self.children.len()
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        self.children[source].binary_search(&target).is_ok()
    }

    /// Nodes with neither parents nor children (self-loops excluded).
    pub fn isolated_nodes(&self) -> Vec<usize> {
        (0..self.m())
            .filter(|&n| {
                self.children[n].iter().all(|&c| c == n) && self.parents[n].iter().all(|&p| p == n)
            })
            .collect()
    }

    pub fn edges(&self) -> EdgeSet {
        let edges = self
            .children
            .iter()
            .enumerate()
            .flat_map(|(j, ch)| ch.iter().map(move |&i| (j, i)))
            .collect();
        EdgeSet { m: self.m(), edges }
    }

    /// Checks that `i` is a child of `j` exactly when `j` is a parent of `i`.
    pub fn is_consistent(&self) -> bool {
        let forward: usize = self.children.iter().map(Vec::len).sum();
        let backward: usize = self.parents.iter().map(Vec::len).sum();
        forward == backward
            && self.children.iter().enumerate().all(|(j, ch)| {
                ch.iter()
                    .all(|&i| self.parents[i].binary_search(&j).is_ok())
            })
    }
}

/// Every ordered pair `(j, i)` independently with probability `p`. Self-pairs
/// are drawn too when `self_loops` is set.
pub fn gen_erdos_renyi(
    m: usize,
    p: f64,
    self_loops: bool,
    rng: &mut RngStream,
) -> Result<EdgeSet, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::Probability(p));
    }
    let mut edges = Vec::new();
    for j in 0..m {
        for i in 0..m {
            if i == j && !self_loops {
                continue;
            }
            if rng.uniform() < p {
                edges.push((j, i));
            }
        }
    }
    Ok(EdgeSet { m, edges })
}

/// Chain `0 -> 1 -> ... -> m-1`.
pub fn gen_cascade(m: usize) -> Result<EdgeSet, GraphError> {
    if m < 2 {
        return Err(GraphError::CascadeTooSmall(m));
    }
    Ok(EdgeSet {
        m,
        edges: (0..m - 1).map(|j| (j, j + 1)).collect(),
    })
}

/// Block sizes and the probability `probs[b][b2]` of an edge from a node of
/// block `b` to a node of block `b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockModel {
    pub sizes: Vec<usize>,
    pub probs: Vec<Vec<f64>>,
}

impl BlockModel {
    /// The three two-block configurations used for scaling runs:
    /// 1. halves, intra-block only, `p = (2/M) ln(M/2)`;
    /// 2. halves, inter-block only, same `p`;
    /// 3. sizes `(c, M - c)` with `c = ceil(ln M)`, inter-block only, with
    ///    `ln(c)/c` from the small block and `ln(M-c)/(M-c)` from the large one.
    pub fn preset(preset: usize, m: usize) -> Result<Self, GraphError> {
        let mf = m as f64;
        match preset {
            1 | 2 => {
                let half = m / 2;
                let p = (2.0 / mf) * (mf / 2.0).ln();
                let p = p.clamp(0.0, 1.0);
                let probs = if preset == 1 {
                    vec![vec![p, 0.0], vec![0.0, p]]
                } else {
                    vec![vec![0.0, p], vec![p, 0.0]]
                };
                Ok(Self {
                    sizes: vec![half, m - half],
                    probs,
                })
            }
            3 => {
                let c = (mf.ln().ceil() as usize).clamp(1, m.saturating_sub(1).max(1));
                let rest = m - c;
                let ratio = |n: usize| {
                    if n <= 1 {
                        0.0
                    } else {
                        ((n as f64).ln() / n as f64).clamp(0.0, 1.0)
                    }
                };
                Ok(Self {
                    sizes: vec![c, rest],
                    probs: vec![vec![0.0, ratio(c)], vec![ratio(rest), 0.0]],
                })
            }
            other => Err(GraphError::UnknownPreset(other)),
        }
    }

    fn validate(&self, m: usize) -> Result<(), GraphError> {
        let sum: usize = self.sizes.iter().sum();
        if sum != m {
            return Err(GraphError::BlockSizes { sum, m });
        }
        let blocks = self.sizes.len();
        if self.probs.len() != blocks || self.probs.iter().any(|r| r.len() != blocks) {
            return Err(GraphError::ProbabilityShape { blocks });
        }
        if let Some(&p) = self
            .probs
            .iter()
            .flatten()
            .find(|p| !(0.0..=1.0).contains(*p))
        {
            return Err(GraphError::Probability(p));
        }
        Ok(())
    }
}

/// Erdos-Renyi by block. Self-pairs are drawn when `self_loops` is set.
pub fn gen_stochastic_block(
    m: usize,
    model: &BlockModel,
    self_loops: bool,
    rng: &mut RngStream,
) -> Result<EdgeSet, GraphError> {
    model.validate(m)?;
    let block_of: Vec<usize> = model
        .sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &n)| std::iter::repeat_n(b, n))
        .collect();
    let mut edges = Vec::new();
    for j in 0..m {
        for i in 0..m {
            if i == j && !self_loops {
                continue;
            }
            if rng.uniform() < model.probs[block_of[j]][block_of[i]] {
                edges.push((j, i));
            }
        }
    }
    Ok(EdgeSet { m, edges })
}
