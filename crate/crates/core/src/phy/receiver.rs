//! Receive state machine decisions: preamble capture, PLCP header gate,
//! payload decode, and energy-detection CCA.
//!
//! These are pure functions over a receiver's [`OverlapLedger`]; the network
//! engine owns the timing and calls them from its event handlers.

use serde::{Deserialize, Serialize};

use super::ledger::{dbm_to_mw, OverlapLedger};
use super::mcs::Mcs;
use super::transmission::{Transmission, TxId};
use crate::error::{Error, Result};
use crate::kernel::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RxMode {
    Idle,
    /// A preamble window opened by the first arrival; capture is decided at
    /// `since + 4 us`.
    Detecting { since: SimTime },
    /// Locked to `tx`, waiting for the end of its PLCP header.
    Syncing { tx: TxId },
    /// Header passed; receiving `tx` until its end.
    Decoding { tx: TxId },
    /// Own transmitter active; half duplex.
    Transmitting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiverState {
    pub mode: RxMode,
    /// Aggregate in-band power at or above the ED threshold.
    pub ed_busy: bool,
}

impl Default for ReceiverState {
    fn default() -> Self {
        Self {
            mode: RxMode::Idle,
            ed_busy: false,
        }
    }
}

impl ReceiverState {
    pub fn locked_tx(&self) -> Option<TxId> {
        match self.mode {
            RxMode::Syncing { tx } | RxMode::Decoding { tx } => Some(tx),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CollisionOutcome {
    /// Nothing decodable; back to idle.
    S1,
    /// A corrupted header passed parity; NAV set to a random value.
    S2,
    /// One packet's header decoded correctly.
    S3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cca {
    Busy,
    Clear,
}

impl Cca {
    pub fn is_busy(self) -> bool {
        self == Cca::Busy
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PayloadModel {
    /// Success iff payload SINR >= the MCS threshold.
    Sharp,
    /// Success probability `1 / (1 + exp(-(sinr - threshold) / width_db))`.
    Logistic { width_db: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PayloadResult {
    Success,
    Failure,
}

/// Received power of `tx` at a receiver on `receiver_channel` through a link
/// of `gain_db`.
pub fn rx_power_dbm(tx: &Transmission, receiver_channel: usize, gain_db: f64) -> Result<f64> {
    if tx.channel != receiver_channel {
        return Err(Error::CrossChannel {
            tx: tx.channel,
            rx: receiver_channel,
        });
    }
    Ok(tx.tx_power_dbm + gain_db)
}

/// Capture at the end of the preamble window: among arrivals that started in
/// `[window_start, now]`, lock to the one with the strongest mean power over
/// its own preamble, provided it clears the detection floor. Ties go to the
/// earlier-recorded arrival.
pub fn on_preamble_end(
    ledger: &OverlapLedger,
    window_start: SimTime,
    now: SimTime,
    detection_floor_dbm: f64,
    preamble: SimTime,
) -> Option<TxId> {
    let floor = dbm_to_mw(detection_floor_dbm);
    let mut best: Option<(TxId, f64)> = None;
    for e in ledger.arrivals_between(window_start, now) {
        let p = e.trace.mean_over(e.start(), e.start() + preamble);
        if p < floor {
            continue;
        }
        if best.is_none_or(|(_, bp)| p > bp) {
            best = Some((e.tx, p));
        }
    }
    best.map(|(tx, _)| tx)
}

/// Header gate. `u` is a uniform draw in `[0, 1)` used only below the gate.
pub fn on_header_end(header_sinr_db: f64, gate_db: f64, p_falsepass: f64, u: f64) -> CollisionOutcome {
    if header_sinr_db >= gate_db {
        CollisionOutcome::S3
    } else if u < p_falsepass {
        CollisionOutcome::S2
    } else {
        CollisionOutcome::S1
    }
}

/// Payload decode against the MCS threshold. `u` is a uniform draw in
/// `[0, 1)`, used only by the logistic model.
pub fn payload_outcome(payload_sinr_db: f64, mcs: Mcs, model: PayloadModel, u: f64) -> PayloadResult {
    let ok = match model {
        PayloadModel::Sharp => payload_sinr_db >= mcs.min_sinr_db(),
        PayloadModel::Logistic { width_db } => {
            let p = 1.0 / (1.0 + (-(payload_sinr_db - mcs.min_sinr_db()) / width_db).exp());
            u < p
        }
    };
    if ok {
        PayloadResult::Success
    } else {
        PayloadResult::Failure
    }
}

/// Energy detection on the aggregate in-band power.
pub fn ed_cca(aggregate_mw: f64, threshold_dbm: f64) -> Cca {
    if aggregate_mw >= dbm_to_mw(threshold_dbm) {
        Cca::Busy
    } else {
        Cca::Clear
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::ledger::PowerTrace;
    use crate::phy::transmission::{FrameKind, PREAMBLE};

    fn us(x: u64) -> SimTime {
        SimTime::from_micros(x)
    }

    fn ledger(arrivals: &[(TxId, u64, f64)]) -> OverlapLedger {
        let mut l = OverlapLedger::new();
        for &(id, start, dbm) in arrivals {
            l.record(id, PowerTrace::constant(us(start), us(start + 500), dbm_to_mw(dbm)));
        }
        l
    }

    #[test]
    fn lock_to_stronger_of_two_simultaneous() {
        let l = ledger(&[(1, 0, -70.0), (2, 0, -60.0)]);
        assert_eq!(on_preamble_end(&l, us(0), us(4), -93.0, PREAMBLE), Some(2));
    }

    #[test]
    fn single_packet_above_floor_locks() {
        let l = ledger(&[(7, 0, -92.0)]);
        assert_eq!(on_preamble_end(&l, us(0), us(4), -93.0, PREAMBLE), Some(7));
    }

    #[test]
    fn all_below_floor_stays_idle() {
        let l = ledger(&[(1, 0, -95.0), (2, 1, -94.0)]);
        assert_eq!(on_preamble_end(&l, us(0), us(4), -93.0, PREAMBLE), None);
    }

    #[test]
    fn arrivals_outside_window_are_not_candidates() {
        let l = ledger(&[(1, 0, -40.0), (2, 10, -70.0)]);
        assert_eq!(on_preamble_end(&l, us(10), us(14), -93.0, PREAMBLE), Some(2));
    }

    #[test]
    fn header_gate() {
        assert_eq!(on_header_end(10.0, 4.0, 0.0, 0.5), CollisionOutcome::S3);
        assert_eq!(on_header_end(4.0, 4.0, 0.0, 0.5), CollisionOutcome::S3);
        assert_eq!(on_header_end(0.0, 4.0, 0.0, 0.0), CollisionOutcome::S1);
        assert_eq!(on_header_end(0.0, 4.0, 1.0, 0.999), CollisionOutcome::S2);
    }

    #[test]
    fn payload_threshold() {
        let m = Mcs::from_rate_mbps(24.0).unwrap();
        let thr = m.min_sinr_db();
        assert_eq!(payload_outcome(thr + 5.0, m, PayloadModel::Sharp, 0.0), PayloadResult::Success);
        assert_eq!(payload_outcome(thr - 5.0, m, PayloadModel::Sharp, 0.0), PayloadResult::Failure);
        let lg = PayloadModel::Logistic { width_db: 1.0 };
        assert_eq!(payload_outcome(thr, m, lg, 0.49), PayloadResult::Success);
        assert_eq!(payload_outcome(thr, m, lg, 0.51), PayloadResult::Failure);
    }

    #[test]
    fn mid_payload_interferer_fails_decode() {
        // 24 Mbps needs 14 dB. Signal -60 dBm over [20, 620) us; a -62 dBm
        // interferer covers [320, 620): mean I = 0.5 * 10^-6.2 mW, so
        // SINR = 10 log10(1e-6 / (N + 3.155e-7)) = 5.00 dB < 14 dB.
        let mut l = OverlapLedger::new();
        l.record(1, PowerTrace::constant(us(0), us(620), dbm_to_mw(-60.0)));
        l.record(2, PowerTrace::constant(us(320), us(900), dbm_to_mw(-62.0)));
        let noise = dbm_to_mw(-94.0);
        let s = l.sinr_db(1, us(20), us(620), noise).unwrap();
        assert!((s - 5.00).abs() < 0.01, "{s}");
        let m = Mcs::from_rate_mbps(24.0).unwrap();
        assert_eq!(payload_outcome(s, m, PayloadModel::Sharp, 0.0), PayloadResult::Failure);
        // Without the interferer it would pass.
        let solo = l.sinr_db(1, us(20), us(320), noise).unwrap();
        assert_eq!(payload_outcome(solo, m, PayloadModel::Sharp, 0.0), PayloadResult::Success);
    }

    #[test]
    fn energy_detection() {
        assert_eq!(ed_cca(2.0 * dbm_to_mw(-65.0), -62.0), Cca::Busy);
        assert_eq!(ed_cca(dbm_to_mw(-72.0), -62.0), Cca::Clear);
        assert_eq!(ed_cca(0.0, -62.0), Cca::Clear);
    }

    #[test]
    fn rx_power_composition() {
        let tx = Transmission::new(0, 0, 1, 3, 14.0, Mcs::LOWEST, 14, FrameKind::Data, SimTime(0));
        assert_eq!(rx_power_dbm(&tx, 3, -64.0).unwrap(), -50.0);
        assert_eq!(rx_power_dbm(&tx, 3, -106.0).unwrap(), -92.0);
        assert_eq!(rx_power_dbm(&tx, 3, 0.0).unwrap(), 14.0);
        assert!(matches!(rx_power_dbm(&tx, 2, 0.0), Err(Error::CrossChannel { .. })));
    }
}
