//! Next-point generation for a single intensity.
//!
//! [`get_t_next`] inverts the cumulative intensity of a piecewise-constant
//! trajectory encoded in a [`Scheduler`]: it draws one uniform `V` and walks
//! the segments until the accumulated integral reaches `-ln V`.
//! [`thin_next`] is the rejection alternative for arbitrary intensities
//! dominated by a constant rate.

use std::cmp::Ordering;

use thiserror::Error;

use crate::rng::RngStream;
use crate::scheduler::Scheduler;

/// Negative levels down to `-NEGATIVE_LEVEL_TOLERANCE` are read as zero.
pub const NEGATIVE_LEVEL_TOLERANCE: f64 = 1e-12;

/// Rejections allowed in [`thin_next`] before giving up.
pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("intensity scheduler is empty")]
    EmptyIntensity,
    #[error("intensity level {level} at time {time} is negative")]
    CorruptedIntensity { time: f64, level: f64 },
    #[error("dominating rate must be positive and finite, got {0}")]
    InvalidBound(f64),
    #[error("intensity {lambda} at {time} exceeds the dominating rate {bound}")]
    BoundViolated { time: f64, lambda: f64, bound: f64 },
    #[error("no candidate accepted after {0} rejections")]
    RejectionCapExceeded(u64),
}

/// Time of the next point, or `Never` when the intensity vanishes for good.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NextPoint {
    At(f64),
    Never,
}

impl NextPoint {
    pub fn time(self) -> Option<f64> {
        match self {
            NextPoint::At(t) => Some(t),
            NextPoint::Never => None,
        }
    }

    pub fn is_never(self) -> bool {
        matches!(self, NextPoint::Never)
    }
}

impl PartialOrd for NextPoint {
    /// `Never` sorts after every finite time.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (NextPoint::At(a), NextPoint::At(b)) => a.partial_cmp(b),
            (NextPoint::At(_), NextPoint::Never) => Some(Ordering::Less),
            (NextPoint::Never, NextPoint::At(_)) => Some(Ordering::Greater),
            (NextPoint::Never, NextPoint::Never) => Some(Ordering::Equal),
        }
    }
}

pub(crate) fn checked_level(time: f64, level: f64) -> Result<f64, SamplingError> {
    if level >= 0.0 {
        Ok(level)
    } else if level >= -NEGATIVE_LEVEL_TOLERANCE {
        Ok(0.0)
    } else {
        Err(SamplingError::CorruptedIntensity { time, level })
    }
}

/// Draws the next point of the intensity encoded by `q` after its start time.
///
/// Consumes exactly one uniform from `rng`.
pub fn get_t_next(q: &Scheduler, rng: &mut RngStream) -> Result<NextPoint, SamplingError> {
    if q.is_empty() {
        return Err(SamplingError::EmptyIntensity);
    }
    let target = rng.exp1();
    next_point_for_target(q, target)
}

/// Smallest `t` with `integral_{t0}^{t} lambda = target`, where `t0` is the
/// first event time of `q`. Past the last breakpoint the final level is
/// extrapolated; if that level is zero and the target was not reached the
/// answer is `Never`.
pub fn next_point_for_target(q: &Scheduler, target: f64) -> Result<NextPoint, SamplingError> {
    let mut events = q.iter();
    let first = events.next().ok_or(SamplingError::EmptyIntensity)?;
    let mut time = first.time;
    let mut level = first.value;
    let mut integral = 0.0;

    for next in events {
        let lvl = checked_level(time, level)?;
        let piece = (next.time - time) * lvl;
        if integral + piece > target {
            let t = time + (target - integral) / lvl;
            return Ok(NextPoint::At(t.min(next.time)));
        }
        integral += piece;
        level += next.value;
        time = next.time;
    }

    let lvl = checked_level(time, level)?;
    if lvl > 0.0 {
        Ok(NextPoint::At(time + (target - integral) / lvl))
    } else {
        Ok(NextPoint::Never)
    }
}

/// Thinning: candidates at constant rate `lambda_star` after `t0`, each kept
/// with probability `lambda(t*) / lambda_star`.
pub fn thin_next<F>(
    lambda: F,
    lambda_star: f64,
    t0: f64,
    rng: &mut RngStream,
) -> Result<NextPoint, SamplingError>
where
    F: FnMut(f64) -> f64,
{
    thin_next_capped(lambda, lambda_star, t0, rng, DEFAULT_REJECTION_CAP)
}

pub fn thin_next_capped<F>(
    mut lambda: F,
    lambda_star: f64,
    t0: f64,
    rng: &mut RngStream,
    cap: u64,
) -> Result<NextPoint, SamplingError>
where
    F: FnMut(f64) -> f64,
{
    if !(lambda_star > 0.0 && lambda_star.is_finite()) {
        return Err(SamplingError::InvalidBound(lambda_star));
    }
    let mut t = t0;
    for _ in 0..=cap {
        t += rng.exp1() / lambda_star;
        let u = rng.uniform();
        let value = lambda(t);
        if value > lambda_star * (1.0 + 1e-12) {
            return Err(SamplingError::BoundViolated {
                time: t,
                lambda: value,
                bound: lambda_star,
            });
        }
        if u <= value / lambda_star {
            return Ok(NextPoint::At(t));
        }
    }
    Err(SamplingError::RejectionCapExceeded(cap))
}
