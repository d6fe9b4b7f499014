//! Deterministic discrete-event kernel.
//!
//! Time is an integer count of nanoseconds. Every 802.11a interval used by the
//! simulator (9 us slot, 16 us SIFS, 34 us DIFS, 4 us preamble) is an exact
//! multiple of a tick, so no floating-point drift accumulates over a run.
//!
//! Events are totally ordered by `(fire_at, seq)` where `seq` is the insertion
//! counter. Two events scheduled for the same instant fire in the order they
//! were scheduled.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

/// Simulated time in nanoseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_nanos(ns: u64) -> Self {
        SimTime(ns)
    }

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us * 1_000)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000_000)
    }

    /// Rounds to the nearest nanosecond.
    pub fn from_secs_f64(s: f64) -> Self {
        assert!(s >= 0.0 && s.is_finite(), "negative or non-finite time {s}");
        SimTime((s * 1e9).round() as u64)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 * 1e-9
    }

    pub fn as_micros_f64(self) -> f64 {
        self.0 as f64 * 1e-3
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        self.0 += rhs.0;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(
            self.0
                .checked_sub(rhs.0)
                .expect("SimTime subtraction underflow"),
        )
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3}us", self.as_micros_f64())
    }
}

/// Handle returned by [`Scheduler::schedule`], used to cancel a pending event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EventHandle {
    fire_at: SimTime,
    seq: u64,
}

impl EventHandle {
    pub fn fire_at(&self) -> SimTime {
        self.fire_at
    }
}

/// Pending events keyed by `(fire_at, seq)`.
#[derive(Debug)]
pub struct EventQueue<E> {
    pending: BTreeMap<(SimTime, u64), E>,
    next_seq: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self {
            pending: BTreeMap::new(),
            next_seq: 0,
        }
    }
}

impl<E> EventQueue<E> {
    pub fn push(&mut self, fire_at: SimTime, event: E) -> EventHandle {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.pending.insert((fire_at, seq), event);
        EventHandle { fire_at, seq }
    }

    pub fn remove(&mut self, handle: EventHandle) -> bool {
        self.pending.remove(&(handle.fire_at, handle.seq)).is_some()
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.pending.keys().next().map(|&(t, _)| t)
    }

    pub fn pop(&mut self) -> Option<(SimTime, u64, E)> {
        self.pending.pop_first().map(|((t, s), e)| (t, s, e))
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }
}

/// Event queue plus the current simulated time.
#[derive(Debug)]
pub struct Scheduler<E> {
    now: SimTime,
    queue: EventQueue<E>,
    last_popped: Option<(SimTime, u64)>,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Self {
            now: SimTime::ZERO,
            queue: EventQueue::default(),
            last_popped: None,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Enqueues `event` to fire at `fire_at`.
    ///
    /// Panics if `fire_at` lies in the past: that is a simulator bug, not a
    /// recoverable condition.
    pub fn schedule(&mut self, fire_at: SimTime, event: E) -> EventHandle {
        assert!(
            fire_at >= self.now,
            "event scheduled in the past: fire_at={fire_at} now={}",
            self.now
        );
        self.queue.push(fire_at, event)
    }

    pub fn schedule_in(&mut self, delay: SimTime, event: E) -> EventHandle {
        let at = self.now + delay;
        self.schedule(at, event)
    }

    /// Returns `true` if the event was pending and has been removed.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        self.queue.remove(handle)
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Pops the next event if it fires at or before `limit`, advancing time.
    pub fn next_before(&mut self, limit: SimTime) -> Option<(SimTime, E)> {
        match self.queue.peek_time() {
            Some(t) if t <= limit => {
                let (t, seq, ev) = self.queue.pop().expect("peeked");
                debug_assert!(
                    self.last_popped.is_none_or(|prev| prev < (t, seq)),
                    "event order violated"
                );
                debug_assert!(t >= self.now, "time went backwards");
                self.last_popped = Some((t, seq));
                self.now = t;
                Some((t, ev))
            }
            _ => None,
        }
    }

    /// Processes every event with `fire_at <= t_end` through `handler`, then
    /// sets the clock to `t_end`. Returns the number of events processed.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> u64
    where
        F: FnMut(&mut Scheduler<E>, E),
    {
        assert!(t_end >= self.now, "run_until into the past");
        let mut count = 0;
        while let Some((_, ev)) = self.next_before(t_end) {
            handler(self, ev);
            count += 1;
        }
        self.now = t_end;
        count
    }
}
