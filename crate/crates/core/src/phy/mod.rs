//! Per-receiver physical layer: overlap ledger, interval SINR, preamble
//! capture, header gate, payload decode, and energy detection.

pub mod ledger;
pub mod mcs;
pub mod receiver;
pub mod transmission;

use serde::{Deserialize, Serialize};

pub use ledger::{dbm_to_mw, mw_to_dbm, LedgerEntry, OverlapLedger, PowerTrace};
pub use mcs::Mcs;
pub use receiver::{
    ed_cca, on_header_end, on_preamble_end, payload_outcome, rx_power_dbm, Cca,
    CollisionOutcome, PayloadModel, PayloadResult, ReceiverState, RxMode,
};
pub use transmission::{
    frame_airtime, payload_airtime, FrameKind, Transmission, TxId, PLCP_HEADER_END, PREAMBLE,
};

use crate::kernel::SimTime;

/// Thermal noise in dBm: `-174 dBm/Hz + 10 log10(B) + NF`.
pub fn thermal_noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// Largest 802.11a PSDU, bytes.
pub const MAX_PSDU_BYTES: usize = 4095;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhyParams {
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub ed_threshold_dbm: f64,
    pub detection_floor_dbm: f64,
    pub header_gate_db: f64,
    /// Probability that a header below the gate still passes parity (S2).
    pub p_falsepass: f64,
    pub payload_model: PayloadModel,
}

impl Default for PhyParams {
    fn default() -> Self {
        Self {
            tx_power_dbm: 14.0,
            noise_dbm: -94.0,
            ed_threshold_dbm: -62.0,
            detection_floor_dbm: -93.0,
            header_gate_db: 4.0,
            p_falsepass: 0.0,
            payload_model: PayloadModel::Sharp,
        }
    }
}

impl PhyParams {
    pub fn noise_mw(&self) -> f64 {
        dbm_to_mw(self.noise_dbm)
    }

    /// Upper bound of the random NAV drawn after an S2 false pass: the
    /// airtime of a maximum-length packet at 6 Mbps.
    pub fn max_random_nav(&self) -> SimTime {
        frame_airtime(MAX_PSDU_BYTES, Mcs::LOWEST)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_floor_for_20_mhz_and_7_db_nf() {
        let n = thermal_noise_dbm(20e6, 7.0);
        assert!((n - (-94.0)).abs() < 0.1, "{n}");
        assert_eq!(PhyParams::default().noise_dbm, -94.0);
    }
}
