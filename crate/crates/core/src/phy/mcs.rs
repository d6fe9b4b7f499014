use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 802.11a OFDM rates, Mbps.
pub const RATES_MBPS: [f64; 8] = [6.0, 9.0, 12.0, 18.0, 24.0, 36.0, 48.0, 54.0];

/// Minimum payload SINR per rate, dB above a -94 dBm noise floor.
pub const MIN_SINR_DB: [f64; 8] = [5.0, 6.0, 8.0, 11.0, 14.0, 18.0, 22.0, 24.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Mcs(u8);

impl Mcs {
    pub const COUNT: usize = 8;
    pub const LOWEST: Mcs = Mcs(0);
    pub const HIGHEST: Mcs = Mcs(7);

    pub fn new(index: u8) -> Result<Self> {
        if (index as usize) < Self::COUNT {
            Ok(Mcs(index))
        } else {
            Err(Error::Config(format!("MCS index {index} out of range 0..=7")))
        }
    }

    pub fn from_rate_mbps(rate: f64) -> Result<Self> {
        RATES_MBPS
            .iter()
            .position(|&r| (r - rate).abs() < 1e-9)
            .map(|i| Mcs(i as u8))
            .ok_or_else(|| Error::Config(format!("{rate} Mbps is not an 802.11a rate")))
    }

    pub fn all() -> impl Iterator<Item = Mcs> {
        (0..Self::COUNT as u8).map(Mcs)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn rate_mbps(self) -> f64 {
        RATES_MBPS[self.index()]
    }

    pub fn min_sinr_db(self) -> f64 {
        MIN_SINR_DB[self.index()]
    }

    pub fn up(self) -> Option<Mcs> {
        (self.index() + 1 < Self::COUNT).then(|| Mcs(self.0 + 1))
    }

    pub fn down(self) -> Option<Mcs> {
        self.0.checked_sub(1).map(Mcs)
    }
}

impl TryFrom<u8> for Mcs {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Mcs::new(v)
    }
}

impl From<Mcs> for u8 {
    fn from(m: Mcs) -> u8 {
        m.0
    }
}
