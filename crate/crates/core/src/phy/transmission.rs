use serde::{Deserialize, Serialize};

use super::mcs::Mcs;
use crate::kernel::SimTime;
use crate::radio::StationId;

pub type TxId = u64;

/// PLCP preamble: synchronisation is decided at its end.
pub const PREAMBLE: SimTime = SimTime::from_micros(4);
/// Preamble plus PLCP header, measured from the start of the packet.
pub const PLCP_HEADER_END: SimTime = SimTime::from_micros(20);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum FrameKind {
    Data,
    Ack { data_tx: TxId },
}

/// Airtime after the PLCP header: `bytes * 8 / rate`, rounded to the nearest ns.
pub fn payload_airtime(bytes: usize, mcs: Mcs) -> SimTime {
    let bits = bytes as f64 * 8.0;
    SimTime((bits * 1_000.0 / mcs.rate_mbps()).round() as u64)
}

/// Whole-frame airtime including preamble and PLCP header.
pub fn frame_airtime(bytes: usize, mcs: Mcs) -> SimTime {
    PLCP_HEADER_END + payload_airtime(bytes, mcs)
}

/// One packet on the air.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transmission {
    pub id: TxId,
    pub source: StationId,
    pub destination: StationId,
    pub channel: usize,
    pub tx_power_dbm: f64,
    pub mcs: Mcs,
    /// Bytes carried after the PLCP header (MAC/IP/UDP overhead included).
    pub payload_bytes: usize,
    pub kind: FrameKind,
    pub start: SimTime,
    pub preamble_end: SimTime,
    pub header_end: SimTime,
    pub end: SimTime,
}

impl Transmission {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: TxId,
        source: StationId,
        destination: StationId,
        channel: usize,
        tx_power_dbm: f64,
        mcs: Mcs,
        payload_bytes: usize,
        kind: FrameKind,
        start: SimTime,
    ) -> Self {
        Self {
            id,
            source,
            destination,
            channel,
            tx_power_dbm,
            mcs,
            payload_bytes,
            kind,
            start,
            preamble_end: start + PREAMBLE,
            header_end: start + PLCP_HEADER_END,
            end: start + frame_airtime(payload_bytes, mcs),
        }
    }

    pub fn is_on_air(&self, t: SimTime) -> bool {
        self.start <= t && t < self.end
    }
}
