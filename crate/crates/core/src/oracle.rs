//! Brute-force reference simulator.
//!
//! Intensities are recomputed from the whole point history at every candidate
//! time, straight from the kernel jump lists, and points are generated by
//! thinning against a global bound. Nothing here goes through the scheduler
//! machinery, so it fails independently of the fast simulators.

use std::time::Instant;

use crate::hawkes::{HawkesNetwork, InteractionKernel};
use crate::rng::RngStream;
use crate::sim::{check_horizon, Algorithm, RunMeta, SimError, SimulationResult};

/// `h(x)` from the jump list.
fn kernel_value(kernel: &InteractionKernel, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    kernel
        .jumps()
        .iter()
        .take_while(|&&(t, _)| t <= x)
        .map(|&(_, d)| d)
        .sum()
}

/// `lambda_i(s)` given the full history (per-node sorted times), counting
/// only points strictly before `s`.
pub fn history_intensity(net: &HawkesNetwork, history: &[Vec<f64>], node: usize, s: f64) -> f64 {
    let mut value = net.nu()[node];
    for (source, kernel) in net.connectivity().incoming(node) {
        let points = &history[*source];
        let hi = points.partition_point(|&p| p < s);
        let lo = points[..hi].partition_point(|&p| p < s - kernel.support());
        for &p in &points[lo..hi] {
            value += kernel_value(kernel, s - p);
        }
    }
    value
}

pub fn simulate_naive(
    net: &HawkesNetwork,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<SimulationResult, SimError> {
    check_horizon(horizon)?;
    let start = Instant::now();
    let m = net.m();
    let base: f64 = net.nu().iter().sum();
    let conn = net.connectivity();
    let max_level = conn.max_kernel_level();
    let window = conn.max_support();

    let mut history = vec![Vec::new(); m];
    let mut times: Vec<f64> = Vec::new();
    let mut marks = Vec::new();
    let mut lambdas = vec![0.0; m];
    let mut iterations = 0u64;
    let mut truncated = false;
    let mut t = 0.0;

    loop {
        iterations += 1;
        let recent = times.len() - times.partition_point(|&p| p < t - window);
        let bound = base + max_level * recent as f64 * m as f64;
        if !(bound > 0.0) {
            truncated = true;
            break;
        }
        t += rng.exp1() / bound;
        if t > horizon {
            break;
        }
        let mut total = 0.0;
        for (i, l) in lambdas.iter_mut().enumerate() {
            *l = history_intensity(net, &history, i, t);
            total += *l;
        }
        if total > bound * (1.0 + 1e-12) {
            return Err(SimError::Invariant(format!(
                "oracle bound {bound} below total intensity {total} at {t}"
            )));
        }
        if rng.uniform() * bound > total {
            continue;
        }
        if times.last().is_some_and(|&p| p >= t) {
            return Err(SimError::Invariant(format!("non-increasing point at {t}")));
        }
        let threshold = rng.uniform() * total;
        let mut acc = 0.0;
        let mut node = m - 1;
        for (i, &l) in lambdas.iter().enumerate() {
            acc += l;
            if l > 0.0 && acc >= threshold {
                node = i;
                break;
            }
        }
        history[node].push(t);
        times.push(t);
        marks.push(node);
    }

    Ok(SimulationResult {
        m,
        times,
        marks,
        meta: RunMeta {
            algorithm: Algorithm::Naive,
            seed: rng.seed(),
            stream: rng.stream(),
            horizon,
            iterations,
            node_updates: 0,
            tie_warnings: 0,
            truncated,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    })
}
