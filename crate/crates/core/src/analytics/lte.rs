//! Reuse-1 LTE downlink baseline: every AP transmits continuously on one
//! shared 20 MHz channel and each STA's SINR is mapped to a rate with a
//! truncated, attenuated Shannon bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::dbm_to_mw;
use crate::radio::{LinkModel, Topology};

use super::metrics::area_capacity_of_total;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LteBaselineConfig {
    pub bandwidth_hz: f64,
    /// Spectral efficiency cap, bit/s/Hz.
    pub max_spectral_efficiency: f64,
    pub attenuation: f64,
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
}

impl Default for LteBaselineConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: 20e6,
            max_spectral_efficiency: 4.8,
            attenuation: 0.75,
            tx_power_dbm: 14.0,
            noise_dbm: -94.0,
        }
    }
}

impl LteBaselineConfig {
    /// Peak rate before airtime sharing, in Mbps.
    pub fn rate_mbps(&self, sinr_db: f64) -> f64 {
        let se = (self.attenuation * (1.0 + 10f64.powf(sinr_db / 10.0)).log2())
            .min(self.max_spectral_efficiency)
            .max(0.0);
        se * self.bandwidth_hz / 1e6
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LteSta {
    pub station: usize,
    pub cell: usize,
    pub sinr_db: f64,
    pub snr_db: f64,
    pub rate_mbps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LteResult {
    pub stas: Vec<LteSta>,
    pub total_mbps: f64,
    pub area_capacity: f64,
}

/// `links` must hold the large-scale gains of `topology` (no fast fading).
pub fn lte_area_capacity(
    topology: &Topology,
    links: &LinkModel,
    cfg: &LteBaselineConfig,
) -> Result<LteResult> {
    let aps: Vec<usize> = topology.aps().map(|s| s.id).collect();
    let noise = dbm_to_mw(cfg.noise_dbm);
    let mut stas = Vec::new();
    for sta in topology.stas() {
        let serving = topology
            .ap_of_cell(sta.cell)
            .ok_or_else(|| Error::Topology(format!("cell {} has no AP", sta.cell)))?;
        let share = topology.stas_of_cell(sta.cell).len() as f64;
        let mut s = 0.0;
        let mut i = 0.0;
        for &ap in &aps {
            let p = dbm_to_mw(cfg.tx_power_dbm + links.large_scale_db(ap, sta.id)?);
            if ap == serving {
                s = p;
            } else {
                i += p;
            }
        }
        let sinr_db = 10.0 * (s / (noise + i)).log10();
        stas.push(LteSta {
            station: sta.id,
            cell: sta.cell,
            sinr_db,
            snr_db: 10.0 * (s / noise).log10(),
            rate_mbps: cfg.rate_mbps(sinr_db) / share,
        });
    }
    let total: f64 = stas.iter().map(|s| s.rate_mbps).sum();
    Ok(LteResult {
        area_capacity: area_capacity_of_total(total, topology)?,
        total_mbps: total,
        stas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::{build_grid_network, PathlossModel, ShadowingField};

    #[test]
    fn rate_mapper() {
        let c = LteBaselineConfig {
            max_spectral_efficiency: 100.0,
            ..LteBaselineConfig::default()
        };
        assert!((c.rate_mbps(0.0) - 15.0).abs() < 1e-12);
        let d = LteBaselineConfig::default();
        assert!((d.rate_mbps(44.0) - 4.8 * 20.0).abs() < 1e-12);
    }

    #[test]
    fn interference_only_lowers_sinr() {
        let (t, _) = build_grid_network(6, 13.3, 12, 4, 0.25, 5).unwrap();
        let sh = ShadowingField::generate(t.len(), 4.0, 6);
        let links = LinkModel::for_topology(&t, &PathlossModel::default(), Some(&sh)).unwrap();
        let r = lte_area_capacity(&t, &links, &LteBaselineConfig::default()).unwrap();
        assert_eq!(r.stas.len(), 144);
        for s in &r.stas {
            assert!(s.sinr_db.is_finite() && s.sinr_db <= s.snr_db);
            assert!(s.rate_mbps >= 0.0 && s.rate_mbps <= 4.8 * 20.0);
        }
    }
}
