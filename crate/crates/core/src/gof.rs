//! Goodness-of-fit battery for simulated Hawkes output.
//!
//! Points of one node are mapped through the compensator
//! `Lambda_i(t) = integral_0^t lambda_i`, recomputed from the point history.
//! Under the true model the rescaled points form a rate-1 Poisson process,
//! which is checked by:
//!
//! * Test 1: the rescaled delays against Exp(1) (one-sample KS);
//! * Test 2: the rescaled times against U[0, Lambda_i(T)] (one-sample KS);
//! * Test 3: lag-`l` autocorrelation of the delays, `l = 1..9`.
//!
//! Repeated runs yield p-values that should be uniform; [`ks_of_ks`] checks
//! that. [`martingale_residual`] computes `integral psi (dN - dLambda)` for
//! predictable weights built from window counts.

use std::fmt::Write as _;

use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::hawkes::HawkesNetwork;
use crate::sim::SimulationResult;

pub const MIN_KS_SAMPLE: usize = 5;
pub const MIN_KS_OF_KS_SAMPLE: usize = 50;
pub const MAX_LAG: usize = 9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GofError {
    #[error("need at least {needed} values, got {got}")]
    InsufficientSample { needed: usize, got: usize },
    #[error("degenerate sample: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub n: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutocorrResult {
    pub lag: usize,
    pub r: f64,
    pub z: f64,
    pub p_value: f64,
}

/// `P(K > lambda)` for the Kolmogorov distribution.
///
/// The alternating series converges fast for large `lambda`; below 1 the
/// equivalent theta-function form is used instead. The result is clamped to
/// `[0, 1]`.
pub fn kolmogorov_p(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 1.0;
    }
    let p = if lambda < 1.0 {
        let c = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for k in 1..=100 {
            let odd = (2 * k - 1) as f64;
            let term = (c * odd * odd).exp();
            cdf += term;
            if term < 1e-16 {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * cdf
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-12 {
                break;
            }
        }
        2.0 * sum
    };
    p.clamp(0.0, 1.0)
}

fn require(n: usize, needed: usize) -> Result<(), GofError> {
    if n < needed {
        Err(GofError::InsufficientSample { needed, got: n })
    } else {
        Ok(())
    }
}

fn sorted(sample: &[f64]) -> Result<Vec<f64>, GofError> {
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(GofError::InvalidArgument("non-finite sample value".into()));
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// `sup |F_n - F|` for a continuous `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64, GofError> {
    let s = sorted(sample)?;
    let n = s.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// One-sample KS test against `cdf`, asymptotic p-value.
pub fn ks_test<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<KsResult, GofError> {
    require(sample.len(), MIN_KS_SAMPLE)?;
    let d = ks_statistic(sample, cdf)?;
    let n = sample.len();
    Ok(KsResult {
        statistic: d,
        n,
        p_value: kolmogorov_p((n as f64).sqrt() * d),
    })
}

pub fn ks_test_exp1(delays: &[f64]) -> Result<KsResult, GofError> {
    ks_test(delays, |x| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() })
}

/// Exponential with the given rate.
pub fn ks_test_exp(sample: &[f64], rate: f64) -> Result<KsResult, GofError> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(GofError::InvalidArgument(format!("rate {rate}")));
    }
    ks_test(
        sample,
        |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() },
    )
}

/// Uniform on `[0, horizon]`.
pub fn ks_test_uniform(points: &[f64], horizon: f64) -> Result<KsResult, GofError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(GofError::InvalidArgument(format!("horizon {horizon}")));
    }
    ks_test(points, |x| (x / horizon).clamp(0.0, 1.0))
}

/// Two-sample KS test with the asymptotic p-value at effective size
/// `n m / (n + m)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult, GofError> {
    require(a.len(), MIN_KS_SAMPLE)?;
    require(b.len(), MIN_KS_SAMPLE)?;
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = na * nb / (na + nb);
    Ok(KsResult {
        statistic: d,
        n: a.len() + b.len(),
        p_value: kolmogorov_p(en.sqrt() * d),
    })
}

/// Uniformity of a collection of p-values.
pub fn ks_of_ks(p_values: &[f64]) -> Result<KsResult, GofError> {
    require(p_values.len(), MIN_KS_OF_KS_SAMPLE)?;
    ks_test_uniform(p_values, 1.0)
}

/// Lag-`lag` sample autocorrelation with the normal approximation
/// `z = r sqrt(n)`.
pub fn autocorr_test(delays: &[f64], lag: usize) -> Result<AutocorrResult, GofError> {
    if lag == 0 {
        return Err(GofError::InvalidArgument("lag must be at least 1".into()));
    }
    require(delays.len(), lag + 6)?;
    let n = delays.len();
    let mean = delays.iter().sum::<f64>() / n as f64;
    let var: f64 = delays.iter().map(|x| (x - mean).powi(2)).sum();
    if !(var > 0.0) {
        return Err(GofError::Degenerate("zero variance".into()));
    }
    let cov: f64 = delays
        .windows(lag + 1)
        .map(|w| (w[0] - mean) * (w[lag] - mean))
        .sum();
    let r = cov / var;
    let z = r * (n as f64).sqrt();
    let normal = Normal::standard();
    let p = (2.0 * (1.0 - normal.cdf(z.abs()))).clamp(0.0, 1.0);
    Ok(AutocorrResult {
        lag,
        r,
        z,
        p_value: p,
    })
}

/// `{Lambda(T_i)}` for increasing `points`. `lambda_path` must be
/// nondecreasing.
pub fn time_rescale<F>(points: &[f64], mut lambda_path: F) -> Result<Vec<f64>, GofError>
where
    F: FnMut(f64) -> f64,
{
    let mut out = Vec::with_capacity(points.len());
    let mut prev_t = f64::NEG_INFINITY;
    let mut prev = 0.0;
    for &t in points {
        if t < prev_t {
            return Err(GofError::InvalidArgument(
                "points are not increasing".into(),
            ));
        }
        let v = lambda_path(t);
        if !(v >= prev) {
            return Err(GofError::InvalidArgument(format!(
                "compensator decreases at {t}: {prev} then {v}"
            )));
        }
        out.push(v);
        prev = v;
        prev_t = t;
    }
    Ok(out)
}

/// Successive differences, starting from 0.
pub fn delays(rescaled: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    rescaled
        .iter()
        .map(|&x| {
            let d = x - prev;
            prev = x;
            d
        })
        .collect()
}

/// Point history split by node, each list increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub horizon: f64,
    pub points: Vec<Vec<f64>>,
}

impl History {
    pub fn new(m: usize, horizon: f64, times: &[f64], marks: &[usize]) -> Result<Self, GofError> {
        if times.len() != marks.len() {
            return Err(GofError::InvalidArgument(
                "times and marks differ in length".into(),
            ));
        }
        let mut points = vec![Vec::new(); m];
        for (&t, &n) in times.iter().zip(marks) {
            if n >= m {
                return Err(GofError::InvalidArgument(format!("mark {n} out of range")));
            }
            if !(t >= 0.0 && t <= horizon) {
                return Err(GofError::InvalidArgument(format!(
                    "time {t} outside [0, {horizon}]"
                )));
            }
            points[n].push(t);
        }
        for p in &points {
            if p.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(GofError::InvalidArgument("times are not increasing".into()));
            }
        }
        Ok(Self { horizon, points })
    }

    pub fn from_result(result: &SimulationResult) -> Result<Self, GofError> {
        Self::new(result.m, result.horizon(), &result.times, &result.marks)
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    /// `N_node([lo, hi))`.
    pub fn count(&self, node: usize, lo: f64, hi: f64) -> usize {
        let p = &self.points[node];
        p.partition_point(|&x| x < hi) - p.partition_point(|&x| x < lo)
    }

    fn check_net(&self, net: &HawkesNetwork) -> Result<(), GofError> {
        if net.m() != self.m() {
            return Err(GofError::InvalidArgument(format!(
                "network has {} nodes, history {}",
                net.m(),
                self.m()
            )));
        }
        Ok(())
    }
}

/// `lambda_node(t)` from the history, counting points strictly before `t`.
pub fn intensity_at(net: &HawkesNetwork, history: &History, node: usize, t: f64) -> f64 {
    let mut value = net.nu()[node];
    for (source, kernel) in net.connectivity().incoming(node) {
        let p = &history.points[*source];
        let hi = p.partition_point(|&x| x < t);
        let lo = p[..hi].partition_point(|&x| x < t - kernel.support());
        value += p[lo..hi]
            .iter()
            .map(|&x| kernel.value_at(t - x))
            .sum::<f64>();
    }
    value
}

/// `Lambda_node(t) = nu t + sum_j sum_{T < t} H_j(t - T)` with the kernel
/// primitives `H_j`.
pub fn compensator(net: &HawkesNetwork, history: &History, node: usize, t: f64) -> f64 {
    let t = t.max(0.0);
    let mut value = net.nu()[node] * t;
    for (source, kernel) in net.connectivity().incoming(node) {
        let p = &history.points[*source];
        let hi = p.partition_point(|&x| x < t);
        let lo = p[..hi].partition_point(|&x| x <= t - kernel.support());
        value += lo as f64 * kernel.integral();
        value += p[lo..hi]
            .iter()
            .map(|&x| kernel.primitive(t - x))
            .sum::<f64>();
    }
    value
}

/// Rescaled points `Lambda_node(T_k)` of one node.
pub fn rescale_node(
    net: &HawkesNetwork,
    history: &History,
    node: usize,
) -> Result<Vec<f64>, GofError> {
    history.check_net(net)?;
    if node >= history.m() {
        return Err(GofError::InvalidArgument(format!(
            "node {node} out of range"
        )));
    }
    time_rescale(&history.points[node], |t| {
        compensator(net, history, node, t)
    })
}

/// Predictable weight `psi_t` of a martingale residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    /// `psi = 1`.
    One,
    /// `psi_t = N_source([t - far, t - near))`.
    Window { source: usize, near: f64, far: f64 },
}

impl Weight {
    pub fn label(&self) -> String {
        match self {
            Weight::One => "X1".to_string(),
            Weight::Window { source, near, far } => {
                format!("X_{}[{near},{far})", source + 1)
            }
        }
    }
}

/// `X = integral_0^T psi_t (dN_node(t) - dLambda_node(t))`.
///
/// `integral psi dN` sums the weight over the node's points. For a window
/// weight, `integral psi dLambda` equals
/// `sum_{s in N_source} Lambda([s + near, s + far] within [0, T])`,
/// which is exact since `psi` counts the source points whose shifted window
/// covers `t`.
pub fn martingale_residual(
    net: &HawkesNetwork,
    history: &History,
    node: usize,
    weight: Weight,
) -> Result<f64, GofError> {
    history.check_net(net)?;
    if node >= history.m() {
        return Err(GofError::InvalidArgument(format!(
            "node {node} out of range"
        )));
    }
    let horizon = history.horizon;
    let lam = |t: f64| compensator(net, history, node, t.min(horizon));
    match weight {
        Weight::One => Ok(history.points[node].len() as f64 - lam(horizon)),
        Weight::Window { source, near, far } => {
            if source >= history.m() || !(0.0 <= near && near < far) {
                return Err(GofError::InvalidArgument(format!(
                    "bad window weight {weight:?}"
                )));
            }
            let dn: f64 = history.points[node]
                .iter()
                .map(|&t| history.count(source, t - far, t - near) as f64)
                .sum();
            let mut dl = 0.0;
            for &s in &history.points[source] {
                if s + near >= horizon {
                    break;
                }
                dl += lam(s + far) - lam(s + near);
            }
            Ok(dn - dl)
        }
    }
}

/// `X1` plus the two window statistics `[t-near, t)` and `[t-far, t-near)`
/// for each node of `sources`.
pub fn martingale_residuals(
    net: &HawkesNetwork,
    history: &History,
    node: usize,
    sources: &[usize],
    near: f64,
    far: f64,
) -> Result<Vec<(Weight, f64)>, GofError> {
    let mut weights = vec![Weight::One];
    for &source in sources {
        weights.push(Weight::Window {
            source,
            near: 0.0,
            far: near,
        });
        weights.push(Weight::Window { source, near, far });
    }
    weights
        .into_iter()
        .map(|w| martingale_residual(net, history, node, w).map(|x| (w, x)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestEntry {
    pub test: String,
    pub statistic: f64,
    pub n: usize,
    pub p_value: f64,
}

/// Tests 1-3 on one node.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub node: usize,
    pub entries: Vec<TestEntry>,
}

impl TestReport {
    pub fn p_value(&self, test: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.test == test)
            .map(|e| e.p_value)
    }

    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "node = {}", self.node + 1);
        for e in &self.entries {
            let _ = writeln!(s, "{}.n = {}", e.test, e.n);
            let _ = writeln!(s, "{}.statistic = {:?}", e.test, e.statistic);
            let _ = writeln!(s, "{}.p_value = {:?}", e.test, e.p_value);
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("test,node,p_value\n");
        for e in &self.entries {
            let _ = writeln!(s, "{},{},{:?}", e.test, self.node + 1, e.p_value);
        }
        s
    }
}

pub const TEST_EXP: &str = "exp_delays";
pub const TEST_UNIFORM: &str = "uniform_times";

pub fn autocorr_name(lag: usize) -> String {
    format!("autocorr_lag{lag}")
}

/// Names of all entries of a complete report, in order.
pub fn test_names() -> Vec<String> {
    let mut v = vec![TEST_EXP.to_string(), TEST_UNIFORM.to_string()];
    v.extend((1..=MAX_LAG).map(autocorr_name));
    v
}

/// Tests 1-3 from already rescaled points on `[0, total]`, where `total`
/// is the compensator at the horizon.
pub fn report_from_rescaled(
    node: usize,
    rescaled: &[f64],
    total: f64,
) -> Result<TestReport, GofError> {
    let d = delays(rescaled);
    let mut entries = Vec::with_capacity(2 + MAX_LAG);
    let t1 = ks_test_exp1(&d)?;
    entries.push(TestEntry {
        test: TEST_EXP.into(),
        statistic: t1.statistic,
        n: t1.n,
        p_value: t1.p_value,
    });
    let t2 = ks_test_uniform(rescaled, total)?;
    entries.push(TestEntry {
        test: TEST_UNIFORM.into(),
        statistic: t2.statistic,
        n: t2.n,
        p_value: t2.p_value,
    });
    for lag in 1..=MAX_LAG {
        let a = autocorr_test(&d, lag)?;
        entries.push(TestEntry {
            test: autocorr_name(lag),
            statistic: a.z,
            n: d.len(),
            p_value: a.p_value,
        });
    }
    Ok(TestReport { node, entries })
}

/// Rescales one node through the network's compensator and runs Tests 1-3.
pub fn node_report(
    net: &HawkesNetwork,
    history: &History,
    node: usize,
) -> Result<TestReport, GofError> {
    let rescaled = rescale_node(net, history, node)?;
    let total = compensator(net, history, node, history.horizon);
    report_from_rescaled(node, &rescaled, total)
}
