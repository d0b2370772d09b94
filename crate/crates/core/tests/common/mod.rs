//! Reference implementations shared by the integration tests.
#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use ppsim::gof::{intensity_at, History};
use ppsim::hawkes::{Connectivity, HawkesNetwork, InteractionKernel};
use ppsim::rng::RngStream;
use ppsim::Scheduler;

/// Sorted-vector scheduler: every operation is a plain linear scan.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RefScheduler {
    pub events: Vec<(f64, f64)>,
}

impl RefScheduler {
    pub fn insert(&mut self, t: f64, v: f64) {
        let t = if t == 0.0 { 0.0 } else { t };
        match self.events.iter().position(|&(s, _)| s >= t) {
            Some(i) if self.events[i].0 == t => self.events[i].1 += v,
            Some(i) => self.events.insert(i, (t, v)),
            None => self.events.push((t, v)),
        }
    }

    pub fn remove(&mut self, t: f64) -> Option<f64> {
        let i = self.events.iter().position(|&(s, _)| s == t)?;
        Some(self.events.remove(i).1)
    }

    pub fn prune(&mut self, t: f64) {
        self.events.retain(|&(s, _)| s > t);
    }

    pub fn prune_pcw(&mut self, t: f64) {
        let level: f64 = self
            .events
            .iter()
            .filter(|&&(s, _)| s <= t)
            .map(|&(_, v)| v)
            .sum();
        self.prune(t);
        self.events
            .insert(0, (if t == 0.0 { 0.0 } else { t }, level));
    }

    pub fn union(&mut self, other: &RefScheduler) {
        for &(t, v) in &other.events {
            self.insert(t, v);
        }
    }

    pub fn shift(&mut self, dt: f64) {
        let old = std::mem::take(&mut self.events);
        for (t, v) in old {
            self.insert(t + dt, v);
        }
    }

    pub fn evaluate(&self, s: f64) -> f64 {
        self.events
            .iter()
            .take_while(|&&(t, _)| t <= s)
            .map(|&(_, v)| v)
            .sum()
    }

    pub fn lower_bound(&self, t: f64) -> Option<usize> {
        self.events.iter().rposition(|&(s, _)| s <= t)
    }

    pub fn upper_bound(&self, t: f64) -> Option<usize> {
        self.events.iter().position(|&(s, _)| s > t)
    }

    pub fn to_scheduler(&self) -> Scheduler {
        Scheduler::from_events(self.events.iter().copied()).unwrap()
    }
}

pub fn events_of(q: &Scheduler) -> Vec<(f64, f64)> {
    q.iter().map(|e| (e.time, e.value)).collect()
}

pub fn boxcar() -> InteractionKernel {
    InteractionKernel::boxcar(5.0, 0.02).unwrap()
}

/// Network with the boxcar kernel on every edge and common rate `nu`.
pub fn uniform_net(m: usize, edges: &[(usize, usize)], nu: f64) -> HawkesNetwork {
    let conn = Connectivity::uniform(m, edges, boxcar()).unwrap();
    HawkesNetwork::new(conn, vec![nu; m]).unwrap()
}

/// Small random network with two-level kernels, rescaled to spectral
/// radius at most `max_radius`.
pub fn random_net(rng: &mut RngStream, m: usize, p: f64, max_radius: f64) -> HawkesNetwork {
    let mut specs = Vec::new();
    for j in 0..m {
        for i in 0..m {
            if rng.uniform() < p {
                let a = 1.0 + 4.0 * rng.uniform();
                let b = 1.0 + 4.0 * rng.uniform();
                let w1 = 0.01 + 0.05 * rng.uniform();
                let w2 = w1 + 0.01 + 0.05 * rng.uniform();
                specs.push((j, i, a, b, w1, w2));
            }
        }
    }
    let nu: Vec<f64> = (0..m).map(|_| 0.5 + 1.5 * rng.uniform()).collect();
    let build = |scale: f64| {
        let mut conn = Connectivity::empty(m);
        for &(j, i, a, b, w1, w2) in &specs {
            let k = InteractionKernel::from_jumps(&[
                (0.0, scale * a),
                (w1, scale * (b - a)),
                (w2, -scale * b),
            ])
            .unwrap();
            conn.add(j, i, k).unwrap();
        }
        conn
    };
    let radius = build(1.0).spectral_radius().unwrap();
    let scale = if radius > max_radius {
        max_radius / radius
    } else {
        1.0
    };
    HawkesNetwork::new(build(scale), nu).unwrap()
}

/// Checks every scheduler against the intensity recomputed from the points
/// so far, at the midpoints between breakpoints and past the last one.
pub fn max_state_discrepancy(
    net: &HawkesNetwork,
    state: &ppsim::hawkes::IntensityState,
    times: &[f64],
    marks: &[usize],
    now: f64,
) -> f64 {
    let history = History::new(net.m(), f64::MAX, times, marks).unwrap();
    let mut worst = 0.0f64;
    for i in 0..net.m() {
        let q = state.intensity(i);
        let ts: Vec<f64> = q.iter().map(|e| e.time).collect();
        let mut probes: Vec<f64> = ts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        probes.push(ts.last().copied().unwrap_or(now) + 1.0);
        for s in probes {
            if s <= now {
                continue;
            }
            let lhs = q.evaluate(s).unwrap();
            let rhs = intensity_at(net, &history, i, s);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// One step of a random scheduler workload.
#[derive(Debug, Clone)]
pub enum Op {
    Insert(f64, f64),
    Remove(f64),
    RemoveFirst,
    Prune(f64),
    PrunePcw(f64),
    Union(Vec<(f64, f64)>),
    UnionShifted(Vec<(f64, f64)>, f64),
    Shift(f64),
}

fn grid_time(rng: &mut RngStream) -> f64 {
    // a coarse grid makes equal times (and thus merges) frequent
    if rng.uniform() < 0.7 {
        (rng.uniform() * 800.0).floor() / 8.0
    } else {
        rng.uniform() * 100.0
    }
}

fn value(rng: &mut RngStream) -> f64 {
    (rng.uniform() * 20.0 - 10.0).round() / 4.0
}

pub fn random_events(rng: &mut RngStream, n: usize) -> Vec<(f64, f64)> {
    (0..n).map(|_| (grid_time(rng), value(rng))).collect()
}

/// Random initial events (up to `max_events`) followed by `n_ops` operations.
pub fn random_workload(
    rng: &mut RngStream,
    max_events: usize,
    n_ops: usize,
) -> (Vec<(f64, f64)>, Vec<Op>) {
    let n = (rng.uniform() * (max_events + 1) as f64) as usize;
    let init = random_events(rng, n.min(max_events));
    let mut ops = Vec::with_capacity(n_ops);
    for _ in 0..n_ops {
        let k = (rng.uniform() * 8.0) as usize;
        let op = match k {
            0 => Op::Insert(grid_time(rng), value(rng)),
            1 => Op::Remove(grid_time(rng)),
            2 => Op::RemoveFirst,
            3 => Op::Prune(grid_time(rng) * 0.5),
            4 => Op::PrunePcw(grid_time(rng)),
            5 => {
                let m = (rng.uniform() * 20.0) as usize;
                Op::Union(random_events(rng, m))
            }
            6 => {
                let m = (rng.uniform() * 10.0) as usize;
                Op::UnionShifted(random_events(rng, m), (rng.uniform() * 80.0).floor() / 8.0)
            }
            _ => Op::Shift((rng.uniform() * 16.0 - 8.0).floor() / 8.0),
        };
        ops.push(op);
    }
    (init, ops)
}

fn probes(q: &RefScheduler, from: f64) -> Vec<f64> {
    let mut v: Vec<f64> = q
        .events
        .iter()
        .map(|e| e.0)
        .filter(|&t| t >= from)
        .collect();
    v.push(from);
    if let Some(&(t, _)) = q.events.last() {
        v.push(t + 1.0);
    }
    v
}

/// Runs `ops` on both a [`Scheduler`] and the reference, checking after
/// every step: strictly increasing times, identical events, pointwise sum
/// for unions, and function preservation for piecewise prunes.
pub fn check_workload(init: &[(f64, f64)], ops: &[Op]) -> Result<(), String> {
    let mut q = Scheduler::from_events(init.iter().copied()).map_err(|e| e.to_string())?;
    let mut r = RefScheduler::default();
    for &(t, v) in init {
        r.insert(t, v);
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
    for (step, op) in ops.iter().enumerate() {
        let before = r.clone();
        match op {
            Op::Insert(t, v) => {
                q.insert(*t, *v).map_err(|e| e.to_string())?;
                r.insert(*t, *v);
            }
            Op::Remove(t) => {
                if q.remove(*t) != r.remove(*t) {
                    return Err(format!("step {step}: remove({t}) disagrees"));
                }
            }
            Op::RemoveFirst => {
                let got = q.remove_first().ok().map(|e| (e.time, e.value));
                let want = (!r.events.is_empty()).then(|| r.events.remove(0));
                if got != want {
                    return Err(format!("step {step}: remove_first {got:?} vs {want:?}"));
                }
            }
            Op::Prune(t) => {
                q.prune(*t);
                r.prune(*t);
            }
            Op::PrunePcw(t) => {
                let start = r.events.first().map(|e| e.0);
                match start {
                    Some(s) if *t >= s => {
                        q.prune_pcw(*t).map_err(|e| e.to_string())?;
                        r.prune_pcw(*t);
                        for s in probes(&r, *t) {
                            let (a, b) = (before.evaluate(s), q.evaluate(s).unwrap());
                            if !close(a, b) {
                                return Err(format!(
                                    "step {step}: prune_pcw({t}) changed f({s}) from {a} to {b}"
                                ));
                            }
                        }
                    }
                    _ => {
                        if q.prune_pcw(*t).is_ok() {
                            return Err(format!("step {step}: prune_pcw({t}) should fail"));
                        }
                    }
                }
            }
            Op::Union(ev) | Op::UnionShifted(ev, _) => {
                let dt = if let Op::UnionShifted(_, dt) = op {
                    *dt
                } else {
                    0.0
                };
                let mut other = RefScheduler::default();
                for &(t, v) in ev {
                    other.insert(t, v);
                }
                if dt == 0.0 {
                    q.union_with(&other.to_scheduler());
                } else {
                    q.union_shifted(&other.to_scheduler(), dt)
                        .map_err(|e| e.to_string())?;
                    other.shift(dt);
                }
                r.union(&other);
                let from = r.events.first().map_or(0.0, |e| e.0);
                let checked = if r.events.is_empty() {
                    Vec::new()
                } else {
                    probes(&r, from)
                };
                for s in checked {
                    let want = before.evaluate(s) + other.evaluate(s);
                    let got = q.evaluate(s).unwrap();
                    if !close(want, got) {
                        return Err(format!("step {step}: union value at {s}: {got} vs {want}"));
                    }
                }
            }
            Op::Shift(dt) => {
                q.shift(*dt).map_err(|e| e.to_string())?;
                r.shift(*dt);
            }
        }
        let got = events_of(&q);
        if got.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(format!("step {step}: times not strictly increasing"));
        }
        if got != r.events {
            return Err(format!(
                "step {step} ({op:?}): events differ from reference\n{got:?}\n{:?}",
                r.events
            ));
        }
        for s in [0.0, 10.0, 50.0, 99.0] {
            if q.lower_bound(s) != r.lower_bound(s) || q.upper_bound(s) != r.upper_bound(s) {
                return Err(format!("step {step}: bounds at {s} disagree"));
            }
        }
    }
    Ok(())
}

/// Observer for the local simulator: after every point, untouched
/// schedulers must be unchanged, the touched set must be `ch(j) U {j}`,
/// and every scheduler must agree with the intensity recomputed from the
/// history.
pub struct LocalityChecker<'a> {
    pub net: &'a HawkesNetwork,
    pub graph: &'a ppsim::DependenceGraph,
    pub snapshot: Vec<Scheduler>,
    pub times: Vec<f64>,
    pub marks: Vec<usize>,
    pub worst: f64,
    pub events: usize,
    pub full_check: bool,
}

impl<'a> LocalityChecker<'a> {
    pub fn new(net: &'a HawkesNetwork, graph: &'a ppsim::DependenceGraph) -> Self {
        Self {
            net,
            graph,
            snapshot: Vec::new(),
            times: Vec::new(),
            marks: Vec::new(),
            worst: 0.0,
            events: 0,
            full_check: true,
        }
    }
}

impl ppsim::sim::Observer for LocalityChecker<'_> {
    fn on_start(&mut self, state: &ppsim::hawkes::IntensityState) -> Result<(), String> {
        self.snapshot = state.intensities().to_vec();
        Ok(())
    }

    fn on_point(&mut self, ev: &ppsim::sim::PointEvent<'_>) -> Result<(), String> {
        let mut expected: Vec<usize> = self.graph.children(ev.node).to_vec();
        if !expected.contains(&ev.node) {
            expected.push(ev.node);
        }
        expected.sort_unstable();
        if ev.touched != expected.as_slice() {
            return Err(format!(
                "point {} on node {}: touched {:?}, expected {:?}",
                ev.index, ev.node, ev.touched, expected
            ));
        }
        for (i, q) in ev.state.intensities().iter().enumerate() {
            if expected.binary_search(&i).is_err() && *q != self.snapshot[i] {
                return Err(format!("untouched node {i} changed at point {}", ev.index));
            }
        }
        self.times.push(ev.time);
        self.marks.push(ev.node);
        if self.full_check {
            let d = max_state_discrepancy(self.net, ev.state, &self.times, &self.marks, ev.time);
            self.worst = self.worst.max(d);
            if d > 1e-9 {
                return Err(format!("intensity discrepancy {d} at point {}", ev.index));
            }
        }
        for &i in ev.touched {
            self.snapshot[i] = ev.state.intensity(i).clone();
        }
        self.events += 1;
        Ok(())
    }
}
