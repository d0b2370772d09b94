//! Types shared by the simulators: run output, options, and the per-point
//! observer hook used by debug checks.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::hawkes::{IntensityState, ModelError};
use crate::sampling::SamplingError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("graph has {graph} nodes but the network has {net}")]
    GraphMismatch { graph: usize, net: usize },
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    FullScan,
    LocalGraph,
    Naive,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::FullScan => "fullscan",
            Algorithm::LocalGraph => "localgraph",
            Algorithm::Naive => "naive",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fullscan" | "full" => Ok(Algorithm::FullScan),
            "localgraph" | "local" => Ok(Algorithm::LocalGraph),
            "naive" => Ok(Algorithm::Naive),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub stream: u64,
    pub horizon: f64,
    /// Main-loop iterations.
    pub iterations: u64,
    /// Intensity schedulers updated, summed over points.
    pub node_updates: u64,
    /// Exact time ties that had to be redrawn (expected 0).
    pub tie_warnings: u64,
    /// The total intensity vanished before the horizon.
    pub truncated: bool,
    pub wall_seconds: f64,
}

/// Points in increasing time order with their 0-based node marks.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub m: usize,
    pub times: Vec<f64>,
    pub marks: Vec<usize>,
    pub meta: RunMeta,
}

impl SimulationResult {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.meta.horizon
    }

    /// Point times of one node.
    pub fn node_times(&self, node: usize) -> Vec<f64> {
        self.times
            .iter()
            .zip(&self.marks)
            .filter(|(_, &n)| n == node)
            .map(|(&t, _)| t)
            .collect()
    }

    /// Point times of every node.
    pub fn per_node(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new(); self.m];
        for (&t, &n) in self.times.iter().zip(&self.marks) {
            out[n].push(t);
        }
        out
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.m];
        for &n in &self.marks {
            out[n] += 1;
        }
        out
    }

    /// `time,node` CSV with 1-based nodes and round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(24 * self.len() + 16);
        s.push_str("time,node\n");
        for (t, n) in self.times.iter().zip(&self.marks) {
            let _ = writeln!(s, "{:?},{}", t, n + 1);
        }
        s
    }

    pub fn check_invariants(&self) -> Result<(), SimError> {
        if self.times.len() != self.marks.len() {
            return Err(SimError::Invariant(
                "times and marks differ in length".into(),
            ));
        }
        if let Some(w) = self.times.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(SimError::Invariant(format!(
                "times not strictly increasing: {} then {}",
                w[0], w[1]
            )));
        }
        if let Some(&t) = self
            .times
            .iter()
            .find(|t| !(t.is_finite() && **t >= 0.0 && **t <= self.meta.horizon))
        {
            return Err(SimError::Invariant(format!(
                "time {t} outside [0, horizon]"
            )));
        }
        if let Some(&n) = self.marks.iter().find(|&&n| n >= self.m) {
            return Err(SimError::Invariant(format!("mark {n} out of range")));
        }
        Ok(())
    }
}

/// Parses `time,node` CSV back into `(times, 0-based marks)`.
pub fn parse_points_csv(text: &str) -> Result<(Vec<f64>, Vec<usize>), String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "time,node" => {}
        _ => return Err("expected `time,node` header".into()),
    }
    let mut times = Vec::new();
    let mut marks = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (t, n) = line
            .split_once(',')
            .ok_or_else(|| format!("line {}: expected `time,node`", idx + 1))?;
        let t: f64 = t
            .parse()
            .map_err(|e| format!("line {}: bad time: {e}", idx + 1))?;
        let n: usize = n
            .parse()
            .map_err(|e| format!("line {}: bad node: {e}", idx + 1))?;
        if n == 0 {
            return Err(format!("line {}: nodes are 1-based", idx + 1));
        }
        times.push(t);
        marks.push(n - 1);
    }
    Ok((times, marks))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SimOptions {
    /// Extra internal consistency checks (slow).
    pub debug_checks: bool,
}

/// What a simulator reports after applying a point.
pub struct PointEvent<'a> {
    pub index: usize,
    pub time: f64,
    pub node: usize,
    /// Nodes whose intensity scheduler was updated, ascending.
    pub touched: &'a [usize],
    pub state: &'a IntensityState,
}

/// Hook called by the scheduler-based simulators.
pub trait Observer {
    fn on_start(&mut self, _state: &IntensityState) -> Result<(), String> {
        Ok(())
    }

    fn on_point(&mut self, _event: &PointEvent<'_>) -> Result<(), String> {
        Ok(())
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct NoopObserver;

impl Observer for NoopObserver {}

pub(crate) fn check_horizon(horizon: f64) -> Result<(), SimError> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(SimError::InvalidHorizon(horizon))
    }
}
