//! Rate management: fixed MCS, or a Minstrel-style EWMA selector that picks
//! the MCS with the best expected throughput (`rate * P(success)`) and spends
//! a small fraction of frames probing a neighbouring MCS.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::kernel::SimTime;
use crate::phy::Mcs;
use crate::radio::StationId;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateMode {
    Fixed {
        rate_mbps: f64,
    },
    Adaptive {
        #[serde(default = "default_update_ms")]
        update_interval_ms: u64,
        #[serde(default = "default_probe")]
        probe_fraction: f64,
        /// Weight of the newest window in the EWMA.
        #[serde(default = "default_ewma")]
        ewma_weight: f64,
    },
}

fn default_update_ms() -> u64 {
    100
}
fn default_probe() -> f64 {
    0.1
}
fn default_ewma() -> f64 {
    0.25
}

impl RateMode {
    pub fn adaptive() -> Self {
        RateMode::Adaptive {
            update_interval_ms: default_update_ms(),
            probe_fraction: default_probe(),
            ewma_weight: default_ewma(),
        }
    }

    pub fn fixed(rate_mbps: f64) -> Self {
        RateMode::Fixed { rate_mbps }
    }

    pub fn update_interval(&self) -> Option<SimTime> {
        match self {
            RateMode::Fixed { .. } => None,
            RateMode::Adaptive {
                update_interval_ms, ..
            } => Some(SimTime::from_millis(*update_interval_ms)),
        }
    }
}

#[derive(Clone, Debug)]
struct DestStats {
    attempts: [u32; Mcs::COUNT],
    successes: [u32; Mcs::COUNT],
    ewma: [Option<f64>; Mcs::COUNT],
    best: usize,
}

impl Default for DestStats {
    fn default() -> Self {
        Self {
            attempts: [0; Mcs::COUNT],
            successes: [0; Mcs::COUNT],
            ewma: [None; Mcs::COUNT],
            best: Mcs::COUNT - 1,
        }
    }
}

impl DestStats {
    fn expected_throughput(&self, i: usize) -> Option<f64> {
        self.ewma[i].map(|p| p * Mcs::all().nth(i).expect("index").rate_mbps())
    }
}

#[derive(Clone, Debug)]
pub struct RateManager {
    mode: RateMode,
    fixed: Option<Mcs>,
    dests: BTreeMap<StationId, DestStats>,
}

impl RateManager {
    pub fn new(mode: RateMode) -> crate::error::Result<Self> {
        let fixed = match mode {
            RateMode::Fixed { rate_mbps } => Some(Mcs::from_rate_mbps(rate_mbps)?),
            RateMode::Adaptive { .. } => None,
        };
        Ok(Self {
            mode,
            fixed,
            dests: BTreeMap::new(),
        })
    }

    pub fn mode(&self) -> RateMode {
        self.mode
    }

    /// Current best MCS toward `dest` (the configured one in fixed mode).
    pub fn best(&self, dest: StationId) -> Mcs {
        if let Some(m) = self.fixed {
            return m;
        }
        let i = self.dests.get(&dest).map_or(Mcs::COUNT - 1, |d| d.best);
        Mcs::new(i as u8).expect("valid index")
    }

    /// MCS for the next attempt. `u_probe` and `u_dir` are uniform draws.
    pub fn select_mcs(&mut self, dest: StationId, u_probe: f64, u_dir: f64) -> Mcs {
        let probe = match self.mode {
            RateMode::Fixed { .. } => return self.fixed.expect("fixed"),
            RateMode::Adaptive { probe_fraction, .. } => probe_fraction,
        };
        let best = self.best(dest);
        if u_probe >= probe {
            return best;
        }
        match (best.down(), best.up()) {
            (Some(d), Some(u)) => {
                if u_dir < 0.5 {
                    u
                } else {
                    d
                }
            }
            (Some(d), None) => d,
            (None, Some(u)) => u,
            (None, None) => best,
        }
    }

    pub fn record(&mut self, dest: StationId, mcs: Mcs, success: bool) {
        if self.fixed.is_some() {
            return;
        }
        let d = self.dests.entry(dest).or_default();
        d.attempts[mcs.index()] += 1;
        if success {
            d.successes[mcs.index()] += 1;
        }
    }

    /// Closes the current statistics window for every destination.
    pub fn update(&mut self) {
        let weight = match self.mode {
            RateMode::Fixed { .. } => return,
            RateMode::Adaptive { ewma_weight, .. } => ewma_weight,
        };
        for d in self.dests.values_mut() {
            for i in 0..Mcs::COUNT {
                if d.attempts[i] == 0 {
                    continue;
                }
                let sample = d.successes[i] as f64 / d.attempts[i] as f64;
                d.ewma[i] = Some(match d.ewma[i] {
                    None => sample,
                    Some(prev) => (1.0 - weight) * prev + weight * sample,
                });
                d.attempts[i] = 0;
                d.successes[i] = 0;
            }
            let mut best = d.best;
            let mut best_tp = d.expected_throughput(best).unwrap_or(-1.0);
            for i in 0..Mcs::COUNT {
                if let Some(tp) = d.expected_throughput(i) {
                    if tp > best_tp || (tp == best_tp && tp > 0.0 && i > best) {
                        best = i;
                        best_tp = tp;
                    }
                }
            }
            if best_tp <= 0.0 && best > 0 {
                best -= 1;
            }
            d.best = best;
        }
    }

    pub fn ewma(&self, dest: StationId, mcs: Mcs) -> Option<f64> {
        self.dests.get(&dest).and_then(|d| d.ewma[mcs.index()])
    }
}

/// Round-robin over a fixed list of destinations, one frame each.
#[derive(Clone, Debug)]
pub struct RoundRobin {
    order: Vec<StationId>,
    cursor: usize,
}

impl RoundRobin {
    pub fn new(order: Vec<StationId>) -> Self {
        Self { order, cursor: 0 }
    }

    pub fn next(&mut self) -> crate::error::Result<StationId> {
        if self.order.is_empty() {
            return Err(crate::error::Error::Config(
                "round-robin scheduler has no associated stations".into(),
            ));
        }
        let s = self.order[self.cursor];
        self.cursor = (self.cursor + 1) % self.order.len();
        Ok(s)
    }

    pub fn peek(&self) -> Option<StationId> {
        self.order.get(self.cursor).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Runs `windows` 100 ms windows of 100 frames each against a channel that
    /// delivers an MCS iff `ok(mcs)`; returns the best MCS after each window.
    fn simulate(ok: impl Fn(Mcs) -> bool, windows: usize) -> Vec<Mcs> {
        let mut rm = RateManager::new(RateMode::adaptive()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut trail = Vec::new();
        for _ in 0..windows {
            for _ in 0..100 {
                let m = rm.select_mcs(9, rng.random(), rng.random());
                rm.record(9, m, ok(m));
            }
            rm.update();
            trail.push(rm.best(9));
        }
        trail
    }

    #[test]
    fn fixed_mode_always_returns_configured() {
        let mut rm = RateManager::new(RateMode::fixed(24.0)).unwrap();
        for u in [0.0, 0.05, 0.5, 0.99] {
            assert_eq!(rm.select_mcs(1, u, u).index(), 4);
        }
        assert!(RateManager::new(RateMode::fixed(25.0)).is_err());
    }

    #[test]
    fn clean_channel_converges_to_54_within_ten_windows() {
        let trail = simulate(|_| true, 10);
        assert_eq!(*trail.last().unwrap(), Mcs::HIGHEST, "{trail:?}");
    }

    #[test]
    fn failures_above_12_settle_at_12() {
        let trail = simulate(|m| m.rate_mbps() <= 12.0, 30);
        assert!(trail[10..].iter().all(|m| m.rate_mbps() == 12.0), "{trail:?}");
    }

    #[test]
    fn empty_window_keeps_best() {
        let mut rm = RateManager::new(RateMode::adaptive()).unwrap();
        for _ in 0..50 {
            rm.record(2, Mcs::new(3).unwrap(), true);
        }
        rm.update();
        assert_eq!(rm.best(2).index(), 3);
        rm.update();
        rm.update();
        assert_eq!(rm.best(2).index(), 3);
    }

    #[test]
    fn round_robin_order_and_fairness() {
        let mut rr = RoundRobin::new(vec![1, 2, 3, 4]);
        let seq: Vec<_> = (0..6).map(|_| rr.next().unwrap()).collect();
        assert_eq!(seq, vec![1, 2, 3, 4, 1, 2]);
        let mut rr = RoundRobin::new(vec![5]);
        assert!((0..5).all(|_| rr.next().unwrap() == 5));
        let mut rr = RoundRobin::new(vec![1, 2, 3, 4]);
        let mut counts = [0; 5];
        for _ in 0..4 * 25 {
            counts[rr.next().unwrap()] += 1;
        }
        assert_eq!(&counts[1..], &[25, 25, 25, 25]);
        assert!(RoundRobin::new(vec![]).next().is_err());
    }
}
