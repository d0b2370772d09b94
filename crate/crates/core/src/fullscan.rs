//! Full-scan simulation: every point triggers a scan of all `M` intensities.
//!
//! Each iteration rebuilds the cumulated union of the per-node schedulers,
//! draws the next point from it, selects the node by the intensity ratios at
//! that time, then prunes every scheduler and adds the fired node's kernels.
//! The union is rebuilt from scratch on purpose: this is the reference cost
//! model the local algorithm is compared against.

use std::time::Instant;

use crate::hawkes::{HawkesNetwork, IntensityState};
use crate::rng::RngStream;
use crate::sampling::{checked_level, get_t_next, NextPoint};
use crate::scheduler::Scheduler;
use crate::sim::{
    check_horizon, Algorithm, NoopObserver, Observer, PointEvent, RunMeta, SimError, SimOptions,
    SimulationResult,
};

pub fn simulate_fullscan(
    net: &HawkesNetwork,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<SimulationResult, SimError> {
    simulate_fullscan_with(net, horizon, rng, SimOptions::default(), &mut NoopObserver)
}

pub fn simulate_fullscan_with(
    net: &HawkesNetwork,
    horizon: f64,
    rng: &mut RngStream,
    options: SimOptions,
    observer: &mut dyn Observer,
) -> Result<SimulationResult, SimError> {
    check_horizon(horizon)?;
    let start = Instant::now();
    let m = net.m();
    let mut state = IntensityState::new(net);
    let all_nodes: Vec<usize> = (0..m).collect();
    let mut cumulative = vec![0.0; m];
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
        let total = cumulated_union(&state);
        if options.debug_checks {
            check_union(&total, &state)?;
        }
        let t = match get_t_next(&total, rng)? {
            NextPoint::At(t) => t,
            NextPoint::Never => {
                truncated = true;
                break;
            }
        };
        if t > horizon {
            break;
        }

        for j in 0..m {
            state.advance(j, t)?;
        }
        node_updates += m as u64;
        if t <= last {
            // Drawn increment below the time resolution; redraw from here.
            tie_warnings += 1;
            continue;
        }

        let mut acc = 0.0;
        for (j, c) in cumulative.iter_mut().enumerate() {
            acc += checked_level(t, state.start_level(j))?;
            *c = acc;
        }
        if !(acc > 0.0) {
            return Err(SimError::Invariant(format!(
                "total intensity vanishes at drawn point {t}"
            )));
        }
        let threshold = rng.uniform() * acc;
        let node = select_node(&cumulative, threshold);

        state.excite_children(net, node, t)?;
        times.push(t);
        marks.push(node);
        last = t;

        observer
            .on_point(&PointEvent {
                index: times.len() - 1,
                time: t,
                node,
                touched: &all_nodes,
                state: &state,
            })
            .map_err(SimError::Invariant)?;
    }

    Ok(SimulationResult {
        m,
        times,
        marks,
        meta: RunMeta {
            algorithm: Algorithm::FullScan,
            seed: rng.seed(),
            stream: rng.stream(),
            horizon,
            iterations,
            node_updates,
            tie_warnings,
            truncated,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

/// `L[1] U ... U L[M]`, built by successive unions.
fn cumulated_union(state: &IntensityState) -> Scheduler {
    let lambdas = state.intensities();
    let mut total = lambdas[0].clone();
    for l in &lambdas[1..] {
        total.union_with(l);
    }
    total
}

/// Smallest index whose cumulated intensity reaches `threshold`, skipping
/// nodes with zero intensity.
pub fn select_node(cumulative: &[f64], threshold: f64) -> usize {
    let mut prev = 0.0;
    for (j, &c) in cumulative.iter().enumerate() {
        if c > prev && c >= threshold {
            return j;
        }
        prev = c;
    }
    // threshold rounding above the total: last node with positive mass
    let mut prev_level = 0.0;
    let mut chosen = 0;
    for (j, &c) in cumulative.iter().enumerate() {
        if c > prev_level {
            chosen = j;
        }
        prev_level = c;
    }
    chosen
}

fn check_union(total: &Scheduler, state: &IntensityState) -> Result<(), SimError> {
    let start = total.first().map_or(0.0, |e| e.time);
    let probes: Vec<f64> = total
        .iter()
        .map(|e| e.time)
        .chain(std::iter::once(start + 1e6))
        .collect();
    for s in probes {
        let lhs = total.evaluate(s).map_err(crate::hawkes::ModelError::from)?;
        let mut rhs = 0.0;
        for l in state.intensities() {
            rhs += l.evaluate(s).map_err(crate::hawkes::ModelError::from)?;
        }
        if (lhs - rhs).abs() > 1e-9 * (1.0 + rhs.abs()) {
            return Err(SimError::Invariant(format!(
                "cumulated union {lhs} differs from the sum {rhs} at {s}"
            )));
        }
    }
    Ok(())
}
