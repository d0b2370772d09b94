//! Time-ordered event sets.
//!
//! A [`Scheduler`] holds events `(time, value)` in strictly increasing time
//! order. Inserting at a time that is already present adds the new value to
//! the existing one, so the same structure doubles as an encoding of a
//! piecewise-constant function on `[t0, +inf)`: the first event carries the
//! level at `t0` and every later event carries the jump at its own time.
//! Under that reading [`Scheduler::union_with`] is pointwise addition and
//! [`Scheduler::prune_pcw`] restricts the function to a later start time.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Errors raised by scheduler operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchedulerError {
    #[error("event time must be finite, got {0}")]
    NonFiniteTime(f64),
    #[error("operation requires a non-empty scheduler")]
    Empty,
    #[error("time {time} precedes the first event at {start}")]
    BeforeStart { time: f64, start: f64 },
}

/// A single `(time, value)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub value: f64,
}

impl Event {
    pub fn new(time: f64, value: f64) -> Self {
        Self { time, value }
    }
}

impl From<(f64, f64)> for Event {
    fn from((time, value): (f64, f64)) -> Self {
        Self { time, value }
    }
}

/// Finite `f64` with a total order, usable as an ordered-map key.
///
/// `-0.0` is normalised to `+0.0` so that keys compare equal exactly when the
/// floats do.
#[derive(Debug, Clone, Copy)]
pub struct TimeKey(f64);

impl TimeKey {
    pub fn new(time: f64) -> Result<Self, SchedulerError> {
        if time.is_finite() {
            Ok(Self(time + 0.0))
        } else {
            Err(SchedulerError::NonFiniteTime(time))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl PartialEq for TimeKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for TimeKey {}

impl PartialOrd for TimeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

// Probe key for range queries; any float is acceptable there since the
// ordering is total.
fn probe(t: f64) -> TimeKey {
    TimeKey(t + 0.0)
}

/// Ordered event set backed by a B-tree.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scheduler {
    events: BTreeMap<TimeKey, f64>,
}

impl Scheduler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a scheduler by inserting every event in turn (so equal times merge).
    pub fn from_events<I, E>(events: I) -> Result<Self, SchedulerError>
    where
        I: IntoIterator<Item = E>,
        E: Into<Event>,
    {
        let mut q = Self::new();
        for e in events {
            q.insert_event(e.into())?;
        }
        Ok(q)
    }

    /// Scheduler encoding the constant function `level` on `[time, +inf)`.
    pub fn constant(time: f64, level: f64) -> Result<Self, SchedulerError> {
        let mut q = Self::new();
        q.insert(time, level)?;
        Ok(q)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Inserts `(time, value)`; if an event already sits at exactly `time`,
    /// its value is increased by `value` instead.
    pub fn insert(&mut self, time: f64, value: f64) -> Result<(), SchedulerError> {
        let key = TimeKey::new(time)?;
        *self.events.entry(key).or_insert(0.0) += value;
        Ok(())
    }

    pub fn insert_event(&mut self, e: Event) -> Result<(), SchedulerError> {
        self.insert(e.time, e.value)
    }

    /// Deletes the event at exactly `time`, returning its value.
    pub fn remove(&mut self, time: f64) -> Option<f64> {
        if !time.is_finite() {
            return None;
        }
        self.events.remove(&probe(time))
    }

    pub fn first(&self) -> Option<Event> {
        self.events
            .first_key_value()
            .map(|(k, v)| Event::new(k.get(), *v))
    }

    pub fn last(&self) -> Option<Event> {
        self.events
            .last_key_value()
            .map(|(k, v)| Event::new(k.get(), *v))
    }

    /// Removes and returns the earliest event.
    pub fn remove_first(&mut self) -> Result<Event, SchedulerError> {
        self.events
            .pop_first()
            .map(|(k, v)| Event::new(k.get(), v))
            .ok_or(SchedulerError::Empty)
    }

    /// Drops every event with time `<= t`.
    pub fn prune(&mut self, t: f64) {
        if t.is_nan() {
            return;
        }
        match self.events.last_key_value() {
            None => return,
            Some((last, _)) if last.get() <= t => {
                self.events.clear();
                return;
            }
            _ => {}
        }
        self.events = self.split_after(t);
    }

    /// Piecewise prune: drops events with time `<= t` and inserts at `t` the
    /// accumulated value of everything dropped, so that the encoded function
    /// is unchanged on `[t, +inf)`.
    pub fn prune_pcw(&mut self, t: f64) -> Result<(), SchedulerError> {
        let key = TimeKey::new(t)?;
        let start = self.first().ok_or(SchedulerError::Empty)?.time;
        if t < start {
            return Err(SchedulerError::BeforeStart { time: t, start });
        }
        let tail = self.split_after(t);
        let level: f64 = self.events.values().sum();
        self.events = tail;
        self.events.insert(key, level);
        Ok(())
    }

    // Leaves events with time <= t in `self.events` and returns the rest.
    fn split_after(&mut self, t: f64) -> BTreeMap<TimeKey, f64> {
        let first_after = self
            .events
            .range((
                std::ops::Bound::Excluded(probe(t)),
                std::ops::Bound::Unbounded,
            ))
            .next()
            .map(|(k, _)| *k);
        match first_after {
            Some(k) => self.events.split_off(&k),
            None => BTreeMap::new(),
        }
    }

    /// Latest event with time `<= t`.
    pub fn floor(&self, t: f64) -> Option<Event> {
        if t.is_nan() {
            return None;
        }
        self.events
            .range(..=probe(t))
            .next_back()
            .map(|(k, v)| Event::new(k.get(), *v))
    }

    /// Earliest event with time `> t`.
    pub fn ceil(&self, t: f64) -> Option<Event> {
        if t.is_nan() {
            return None;
        }
        self.events
            .range((
                std::ops::Bound::Excluded(probe(t)),
                std::ops::Bound::Unbounded,
            ))
            .next()
            .map(|(k, v)| Event::new(k.get(), *v))
    }

    /// Index of the latest event with time `<= t`, or `None` if `t` precedes
    /// every event.
    ///
    /// The locate step is logarithmic; turning the position into an index
    /// walks the prefix, as with `std::distance` on a tree iterator.
    pub fn lower_bound(&self, t: f64) -> Option<usize> {
        if t.is_nan() {
            return None;
        }
        self.events.range(..=probe(t)).count().checked_sub(1)
    }

    /// Index of the earliest event with time `> t`, or `None` past the end.
    pub fn upper_bound(&self, t: f64) -> Option<usize> {
        if t.is_nan() {
            return None;
        }
        let idx = self.events.range(..=probe(t)).count();
        (idx < self.len()).then_some(idx)
    }

    /// The `index`-th earliest event.
    pub fn get(&self, index: usize) -> Option<Event> {
        self.events
            .iter()
            .nth(index)
            .map(|(k, v)| Event::new(k.get(), *v))
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Event> + ExactSizeIterator + '_ {
        self.events.iter().map(|(k, v)| Event::new(k.get(), *v))
    }

    /// Copy with every time translated by `dt`.
    pub fn shifted(&self, dt: f64) -> Result<Scheduler, SchedulerError> {
        let mut out = Scheduler::new();
        for e in self.iter() {
            out.insert(e.time + dt, e.value)?;
        }
        Ok(out)
    }

    /// In-place translation of every event time by `dt`.
    pub fn shift(&mut self, dt: f64) -> Result<(), SchedulerError> {
        if dt == 0.0 {
            return Ok(());
        }
        *self = self.shifted(dt)?;
        Ok(())
    }

    /// Merges `other` into `self`, summing values of coinciding events.
    ///
    /// The smaller of the two sets is iterated and inserted into the larger.
    pub fn union_with(&mut self, other: &Scheduler) {
        if other.len() <= self.len() {
            self.absorb(other);
        } else {
            let mut bigger = other.clone();
            bigger.absorb(self);
            *self = bigger;
        }
    }

    /// Owned union; reuses the larger operand's allocation.
    pub fn union(self, other: Scheduler) -> Scheduler {
        let (mut big, small) = if self.len() >= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        big.absorb(&small);
        big
    }

    /// Merges `other` shifted by `dt` into `self` without materialising the
    /// shifted copy.
    pub fn union_shifted(&mut self, other: &Scheduler, dt: f64) -> Result<(), SchedulerError> {
        for e in other.iter() {
            self.insert(e.time + dt, e.value)?;
        }
        Ok(())
    }

    fn absorb(&mut self, other: &Scheduler) {
        for (k, v) in &other.events {
            *self.events.entry(*k).or_insert(0.0) += *v;
        }
    }

    /// Value at `s` of the encoded piecewise-constant function: the sum of all
    /// values with time `<= s`.
    pub fn evaluate(&self, s: f64) -> Result<f64, SchedulerError> {
        let start = self.first().ok_or(SchedulerError::Empty)?.time;
        if s.is_nan() || s < start {
            return Err(SchedulerError::BeforeStart { time: s, start });
        }
        Ok(self.events.range(..=probe(s)).map(|(_, v)| *v).sum())
    }

    /// Level of the encoded function at its own start time.
    pub fn start_level(&self) -> Option<f64> {
        self.first().map(|e| e.value)
    }

    /// Value of the encoded function after the last breakpoint.
    pub fn final_level(&self) -> f64 {
        self.events.values().sum()
    }

    /// One `time<TAB>value` line per event, round-trip precision.
    pub fn dump(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in self.iter() {
            writeln!(f, "{:?}\t{:?}", e.time, e.value)?;
        }
        Ok(())
    }
}
