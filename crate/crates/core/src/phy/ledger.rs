//! Per-receiver record of every overlapping arrival.
//!
//! Each arrival keeps its own piecewise-constant received-power trace, so the
//! SINR of any packet over any interval can be recomputed from the individual
//! contributions rather than from a collapsed running total.

use smallvec::SmallVec;

use super::transmission::TxId;
use crate::kernel::SimTime;

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Received power of one arrival: `(segment start, mW)` steps on `[start, end)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerTrace {
    steps: SmallVec<[(SimTime, f64); 4]>,
    end: SimTime,
}

impl PowerTrace {
    /// `steps` must be non-empty with strictly increasing start times below `end`.
    pub fn new(steps: impl IntoIterator<Item = (SimTime, f64)>, end: SimTime) -> Self {
        let steps: SmallVec<[(SimTime, f64); 4]> = steps.into_iter().collect();
        assert!(!steps.is_empty(), "empty power trace");
        assert!(
            steps.windows(2).all(|w| w[0].0 < w[1].0) && steps.last().unwrap().0 < end,
            "power trace steps out of order"
        );
        Self { steps, end }
    }

    pub fn constant(start: SimTime, end: SimTime, mw: f64) -> Self {
        Self::new([(start, mw)], end)
    }

    pub fn start(&self) -> SimTime {
        self.steps[0].0
    }

    pub fn end(&self) -> SimTime {
        self.end
    }

    pub fn steps(&self) -> &[(SimTime, f64)] {
        &self.steps
    }

    pub fn power_at(&self, t: SimTime) -> f64 {
        if t < self.start() || t >= self.end {
            return 0.0;
        }
        let i = self.steps.partition_point(|&(s, _)| s <= t);
        self.steps[i - 1].1
    }

    /// Integral of power over `[t0, t1)`, in mW·ns.
    pub fn energy(&self, t0: SimTime, t1: SimTime) -> f64 {
        let mut acc = 0.0;
        for (i, &(s, p)) in self.steps.iter().enumerate() {
            let e = self.steps.get(i + 1).map_or(self.end, |n| n.0);
            let lo = s.max(t0);
            let hi = e.min(t1);
            if hi > lo {
                acc += p * (hi - lo).as_nanos() as f64;
            }
        }
        acc
    }

    pub fn mean_over(&self, t0: SimTime, t1: SimTime) -> f64 {
        if t1 <= t0 {
            return self.power_at(t0);
        }
        self.energy(t0, t1) / (t1 - t0).as_nanos() as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LedgerEntry {
    pub tx: TxId,
    pub trace: PowerTrace,
}

impl LedgerEntry {
    pub fn start(&self) -> SimTime {
        self.trace.start()
    }

    pub fn end(&self) -> SimTime {
        self.trace.end()
    }
}

/// Arrivals at one receiver on its channel.
#[derive(Clone, Debug, Default)]
pub struct OverlapLedger {
    entries: Vec<LedgerEntry>,
}

impl OverlapLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, tx: TxId, trace: PowerTrace) {
        debug_assert!(self.get(tx).is_none(), "transmission {tx} recorded twice");
        self.entries.push(LedgerEntry { tx, trace });
    }

    pub fn get(&self, tx: TxId) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.tx == tx)
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Linear sum of every arrival's power at `t`.
    pub fn aggregate_mw(&self, t: SimTime) -> f64 {
        self.entries.iter().map(|e| e.trace.power_at(t)).sum()
    }

    /// Arrivals whose first sample lies in `[from, to]`.
    pub fn arrivals_between(
        &self,
        from: SimTime,
        to: SimTime,
    ) -> impl Iterator<Item = &LedgerEntry> {
        self.entries
            .iter()
            .filter(move |e| e.start() >= from && e.start() <= to)
    }

    /// SINR of `target` over `[t0, t1)`: mean signal power divided by noise
    /// plus the time-weighted mean of every other arrival. `None` if the
    /// target is not in the ledger.
    pub fn sinr_db(&self, target: TxId, t0: SimTime, t1: SimTime, noise_mw: f64) -> Option<f64> {
        let signal = self.get(target)?;
        let span = t1.saturating_sub(t0).as_nanos().max(1) as f64;
        let s = signal.trace.energy(t0, t1) / span;
        let i: f64 = self
            .entries
            .iter()
            .filter(|e| e.tx != target)
            .map(|e| e.trace.energy(t0, t1))
            .sum::<f64>()
            / span;
        Some(10.0 * (s / (noise_mw + i)).log10())
    }

    /// Drops arrivals that ended at or before `t`.
    pub fn prune_ended_before(&mut self, t: SimTime) {
        self.entries.retain(|e| e.end() > t);
    }
}
