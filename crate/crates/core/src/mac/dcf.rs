//! DCF timing, contention window, NAV, and the combined carrier-sense verdict.

use serde::{Deserialize, Serialize};

use crate::kernel::SimTime;
use crate::phy::{frame_airtime, Cca, Mcs, ReceiverState, RxMode};

/// Mandatory 802.11a rates used for control responses.
pub const BASIC_RATES_MBPS: [f64; 3] = [6.0, 12.0, 24.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacParams {
    /// UDP payload carried by each data frame.
    pub payload_bytes: usize,
    /// MAC + IP + UDP header bytes added to every data frame.
    pub header_overhead_bytes: usize,
    pub cw_min: u32,
    pub cw_max: u32,
    pub retry_limit: u32,
    pub slot_us: u64,
    pub difs_us: u64,
    pub sifs_us: u64,
    pub ack_bytes: usize,
    pub ack_rate_mbps: f64,
    pub ack_timeout_margin_us: u64,
}

impl Default for MacParams {
    fn default() -> Self {
        Self {
            payload_bytes: 1800,
            header_overhead_bytes: 68,
            cw_min: 31,
            cw_max: 1023,
            retry_limit: 7,
            slot_us: 9,
            difs_us: 34,
            sifs_us: 16,
            ack_bytes: 14,
            ack_rate_mbps: 24.0,
            ack_timeout_margin_us: 25,
        }
    }
}

impl MacParams {
    pub fn slot(&self) -> SimTime {
        SimTime::from_micros(self.slot_us)
    }

    pub fn difs(&self) -> SimTime {
        SimTime::from_micros(self.difs_us)
    }

    pub fn sifs(&self) -> SimTime {
        SimTime::from_micros(self.sifs_us)
    }

    pub fn frame_bytes(&self) -> usize {
        self.payload_bytes + self.header_overhead_bytes
    }

    pub fn ack_mcs(&self) -> Mcs {
        Mcs::from_rate_mbps(self.ack_rate_mbps).unwrap_or(Mcs::new(4).expect("24 Mbps"))
    }

    /// ACK rate answering a data frame sent at `data`: the highest basic rate
    /// (6, 12, 24 Mbps) not above the data rate, capped at `ack_rate_mbps`.
    pub fn ack_mcs_for(&self, data: Mcs) -> Mcs {
        let cap = self.ack_mcs().rate_mbps().min(data.rate_mbps());
        BASIC_RATES_MBPS
            .iter()
            .rev()
            .find(|&&r| r <= cap)
            .and_then(|&r| Mcs::from_rate_mbps(r).ok())
            .unwrap_or(Mcs::LOWEST)
    }

    pub fn ack_airtime(&self) -> SimTime {
        frame_airtime(self.ack_bytes, self.ack_mcs())
    }

    pub fn ack_airtime_for(&self, data: Mcs) -> SimTime {
        frame_airtime(self.ack_bytes, self.ack_mcs_for(data))
    }

    /// NAV set by a decoded data header extends this far past the data frame.
    pub fn nav_tail(&self, data: Mcs) -> SimTime {
        self.sifs() + self.ack_airtime_for(data)
    }

    /// Measured from the end of the data frame.
    pub fn ack_timeout(&self, data: Mcs) -> SimTime {
        self.sifs() + self.ack_airtime_for(data) + SimTime::from_micros(self.ack_timeout_margin_us)
    }

    /// Number of doubling stages between `cw_min` and `cw_max`.
    pub fn backoff_stages(&self) -> u32 {
        let mut m = 0;
        let mut cw = self.cw_min;
        while cw < self.cw_max {
            cw = (2 * cw + 1).min(self.cw_max);
            m += 1;
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureAction {
    Retry,
    Drop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackoffState {
    pub cw: u32,
    pub slots_remaining: u32,
    pub retry_count: u32,
    cw_min: u32,
    cw_max: u32,
    retry_limit: u32,
}

impl BackoffState {
    pub fn new(params: &MacParams) -> Self {
        Self {
            cw: params.cw_min,
            slots_remaining: 0,
            retry_count: 0,
            cw_min: params.cw_min,
            cw_max: params.cw_max,
            retry_limit: params.retry_limit,
        }
    }

    /// Sets the counter to a draw from `UniformInt[0, cw]`.
    pub fn set_draw(&mut self, draw: u32) {
        assert!(draw <= self.cw, "backoff draw {draw} exceeds cw {}", self.cw);
        self.slots_remaining = draw;
    }

    /// One idle slot elapsed. Returns `true` when the counter reaches zero.
    pub fn tick(&mut self) -> bool {
        self.slots_remaining = self.slots_remaining.saturating_sub(1);
        self.slots_remaining == 0
    }

    pub fn on_success(&mut self) {
        self.cw = self.cw_min;
        self.retry_count = 0;
    }

    pub fn on_failure(&mut self) -> FailureAction {
        self.retry_count += 1;
        if self.retry_count >= self.retry_limit {
            self.cw = self.cw_min;
            self.retry_count = 0;
            FailureAction::Drop
        } else {
            self.cw = (2 * self.cw + 1).min(self.cw_max);
            FailureAction::Retry
        }
    }
}

/// Network allocation vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Nav {
    pub busy_until: SimTime,
}

impl Nav {
    /// Extends the NAV; returns `true` if it moved.
    pub fn extend(&mut self, until: SimTime) -> bool {
        if until > self.busy_until {
            self.busy_until = until;
            true
        } else {
            false
        }
    }

    pub fn is_busy(&self, now: SimTime) -> bool {
        now < self.busy_until
    }
}

/// Coarse MAC state, reported in traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MacState {
    Idle,
    DifsWait,
    Backoff,
    Tx,
    WaitAck,
    NavWait,
}

/// Combined carrier sense: busy on energy detection, an active NAV, or a
/// receiver that is synchronised to / decoding a packet (or transmitting).
pub fn channel_assessment(ed: Cca, nav: &Nav, rx: &ReceiverState, now: SimTime) -> Cca {
    let rx_busy = matches!(
        rx.mode,
        RxMode::Syncing { .. } | RxMode::Decoding { .. } | RxMode::Transmitting
    );
    if ed.is_busy() || nav.is_busy(now) || rx_busy {
        Cca::Busy
    } else {
        Cca::Clear
    }
}
