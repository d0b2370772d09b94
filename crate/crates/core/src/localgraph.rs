//! Local-graph simulation.
//!
//! Every node keeps its own pending next point in a queue. After a point on
//! node `j` only `j` and its children can have a different future, so only
//! their schedulers are updated and only their next points are redrawn.

use std::collections::BTreeSet;
use std::time::Instant;

use crate::graph::DependenceGraph;
use crate::hawkes::{HawkesNetwork, IntensityState};
use crate::rng::RngStream;
use crate::sampling::{get_t_next, NextPoint};
use crate::scheduler::TimeKey;
use crate::sim::{
    check_horizon, Algorithm, NoopObserver, Observer, PointEvent, RunMeta, SimError, SimOptions,
    SimulationResult,
};

/// Pending next points, one per node at most, ordered by `(time, node)`.
///
/// Nodes whose next point is "never" have no entry. Equal times from
/// different nodes are kept side by side and pop in node order.
#[derive(Debug, Clone, Default)]
pub struct NextPointQueue {
    queue: BTreeSet<(TimeKey, usize)>,
    pending: Vec<Option<TimeKey>>,
    ties: u64,
}

impl NextPointQueue {
    pub fn new(m: usize) -> Self {
        Self {
            queue: BTreeSet::new(),
            pending: vec![None; m],
            ties: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn pending(&self, node: usize) -> Option<f64> {
        self.pending[node].map(TimeKey::get)
    }

    /// Number of insertions that landed on a time already pending for
    /// another node.
    pub fn ties(&self) -> u64 {
        self.ties
    }

    /// Replaces the pending entry of `node`, dropping the stale one.
    pub fn replace(&mut self, node: usize, next: NextPoint) -> Result<(), SimError> {
        if let Some(old) = self.pending[node].take() {
            self.queue.remove(&(old, node));
        }
        if let NextPoint::At(t) = next {
            let key = TimeKey::new(t).map_err(crate::hawkes::ModelError::from)?;
            if self
                .queue
                .range((key, 0)..=(key, usize::MAX))
                .next()
                .is_some()
            {
                self.ties += 1;
            }
            self.queue.insert((key, node));
            self.pending[node] = Some(key);
        }
        Ok(())
    }

    pub fn peek(&self) -> Option<(f64, usize)> {
        self.queue.first().map(|&(k, n)| (k.get(), n))
    }

    pub fn pop(&mut self) -> Option<(f64, usize)> {
        let (k, n) = self.queue.pop_first()?;
        self.pending[n] = None;
        Some((k.get(), n))
    }
}

pub fn simulate_localgraph(
    net: &HawkesNetwork,
    graph: &DependenceGraph,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<SimulationResult, SimError> {
    simulate_localgraph_with(
        net,
        graph,
        horizon,
        rng,
        SimOptions::default(),
        &mut NoopObserver,
    )
}

pub fn simulate_localgraph_with(
    net: &HawkesNetwork,
    graph: &DependenceGraph,
    horizon: f64,
    rng: &mut RngStream,
    options: SimOptions,
    observer: &mut dyn Observer,
) -> Result<SimulationResult, SimError> {
    check_horizon(horizon)?;
    let m = net.m();
    if graph.m() != m {
        return Err(SimError::GraphMismatch {
            graph: graph.m(),
            net: m,
        });
    }
    if options.debug_checks && *graph != DependenceGraph::from_network(net) {
        return Err(SimError::Invariant(
            "dependence graph does not match the network's kernels".into(),
        ));
    }
    let start = Instant::now();
    let mut state = IntensityState::new(net);
    let mut queue = NextPointQueue::new(m);
    let mut touched: Vec<usize> = (0..m).collect();
    let mut times = Vec::new();
    let mut marks = Vec::new();
    let mut iterations = 0u64;
    let mut node_updates = 0u64;
    let mut tie_warnings = 0u64;
    let mut truncated = false;
    let mut last = f64::NEG_INFINITY;

    observer.on_start(&state).map_err(SimError::Invariant)?;

    loop {
        iterations += 1;
        for &i in &touched {
            let next = get_t_next(state.intensity(i), rng)?;
            queue.replace(i, next)?;
        }
        let Some((t, j)) = queue.pop() else {
            truncated = true;
            break;
        };
        if t > horizon {
            break;
        }
        if t <= last {
            // Exact tie with the previous point: redraw this node from there.
            tie_warnings += 1;
            state.advance(j, last)?;
            touched.clear();
            touched.push(j);
            continue;
        }

        touched.clear();
        touched.extend_from_slice(graph.children(j));
        if let Err(pos) = touched.binary_search(&j) {
            touched.insert(pos, j);
        }
        state.apply_point(net, j, t, &touched)?;
        node_updates += touched.len() as u64;
        times.push(t);
        marks.push(j);
        last = t;

        observer
            .on_point(&PointEvent {
                index: times.len() - 1,
                time: t,
                node: j,
                touched: &touched,
                state: &state,
            })
            .map_err(SimError::Invariant)?;
    }

    Ok(SimulationResult {
        m,
        times,
        marks,
        meta: RunMeta {
            algorithm: Algorithm::LocalGraph,
            seed: rng.seed(),
            stream: rng.stream(),
            horizon,
            iterations,
            node_updates,
            tie_warnings: tie_warnings + queue.ties(),
            truncated,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    })
}
