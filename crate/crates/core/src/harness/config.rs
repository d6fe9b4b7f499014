//! Scenario configuration. Every field has a default, so `{}` is a complete
//! configuration describing the reference setup.

use serde::{Deserialize, Serialize};

use crate::analytics::LteBaselineConfig;
use crate::engine::TraceConfig;
use crate::error::{Error, Result};
use crate::kernel::SimTime;
use crate::mac::{MacParams, RateMode};
use crate::phy::{Mcs, PhyParams};
use crate::radio::{FadingConfig, FrequencyPlan, PathlossModel};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    SingleCell,
    #[default]
    SmallNetwork,
    Grid,
    LteBaseline,
    BianchiCurve,
    TimelineFig3,
    TimelineFig4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// STAs send to their AP.
    Uplink,
    /// APs send to their STAs, round-robin.
    Downlink,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FadingParams {
    pub enabled: bool,
    pub doppler_hz: f64,
    pub sample_interval_us: u64,
}

impl Default for FadingParams {
    fn default() -> Self {
        Self {
            enabled: true,
            doppler_hz: 10.0,
            sample_interval_us: 1000,
        }
    }
}

impl FadingParams {
    pub fn config(&self) -> Option<FadingConfig> {
        self.enabled.then(|| FadingConfig {
            doppler_hz: self.doppler_hz,
            sample_interval: SimTime::from_micros(self.sample_interval_us),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmallNetworkParams {
    pub n_aps: usize,
    pub stas_per_ap: usize,
    pub intercell_pl_db: f64,
    pub intracell_pl_db: f64,
}

impl Default for SmallNetworkParams {
    fn default() -> Self {
        Self {
            n_aps: 2,
            stas_per_ap: 4,
            intercell_pl_db: 86.0,
            intracell_pl_db: 64.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridParams {
    pub cells_per_side: usize,
    pub isd_m: f64,
    pub reuse: usize,
    pub stas_per_ap: usize,
    /// Side of the square STA drop area around each AP, as a fraction of ISD.
    pub sta_spread: f64,
    pub shadowing_db: f64,
    /// ISDs visited by scaling studies, sparsest first.
    pub isd_values: Vec<f64>,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            cells_per_side: 6,
            isd_m: 40.0,
            reuse: 12,
            stas_per_ap: 4,
            sta_spread: 0.3,
            shadowing_db: 4.0,
            isd_values: vec![40.0, 20.0, 40.0 / 3.0, 10.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BianchiCurveParams {
    pub n_max: usize,
    pub rate_mbps: f64,
}

impl Default for BianchiCurveParams {
    fn default() -> Self {
        Self {
            n_max: 20,
            rate_mbps: 24.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub duration_s: f64,
    pub warmup_s: f64,
    pub replications: usize,
    /// Unset: uplink for the small-network scenarios, downlink for the grid.
    pub direction: Option<Direction>,
    /// Unset: fixed 24 Mbps for the small-network scenarios, adaptive otherwise.
    pub rate: Option<RateMode>,
    pub phy: PhyParams,
    pub mac: MacParams,
    pub pathloss: PathlossModel,
    pub fading: FadingParams,
    pub small_network: SmallNetworkParams,
    pub grid: GridParams,
    pub lte: LteBaselineConfig,
    pub bianchi: BianchiCurveParams,
    pub trace: TraceConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::default(),
            seed: 1,
            duration_s: 20.0,
            warmup_s: 2.0,
            replications: 1,
            direction: None,
            rate: None,
            phy: PhyParams::default(),
            mac: MacParams::default(),
            pathloss: PathlossModel::default(),
            fading: FadingParams::default(),
            small_network: SmallNetworkParams::default(),
            grid: GridParams::default(),
            lte: LteBaselineConfig::default(),
            bianchi: BianchiCurveParams::default(),
            trace: TraceConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn for_scenario(kind: ScenarioKind) -> Self {
        Self {
            scenario: kind,
            ..Self::default()
        }
    }

    /// Shortened grid runs for CI. A 4x4 grid is used where the reuse
    /// pattern tiles it; reuse 12 keeps the 6x6 grid.
    pub fn fast(mut self) -> Self {
        if FrequencyPlan::square_grid(4, self.grid.reuse).is_ok() {
            self.grid.cells_per_side = 4;
        }
        self.duration_s = 5.0;
        self.warmup_s = 1.0;
        self
    }

    pub fn direction(&self) -> Direction {
        self.direction.unwrap_or(match self.scenario {
            ScenarioKind::SingleCell | ScenarioKind::SmallNetwork => Direction::Uplink,
            _ => Direction::Downlink,
        })
    }

    pub fn rate(&self) -> RateMode {
        self.rate.unwrap_or(match self.scenario {
            ScenarioKind::Grid | ScenarioKind::LteBaseline => RateMode::adaptive(),
            _ => RateMode::fixed(24.0),
        })
    }

    /// Copy with scenario-dependent defaults written out.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.direction = Some(self.direction());
        c.rate = Some(self.rate());
        c
    }

    pub fn warmup(&self) -> SimTime {
        SimTime::from_secs_f64(self.warmup_s)
    }

    pub fn duration(&self) -> SimTime {
        SimTime::from_secs_f64(self.duration_s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad(format!("duration_s must be positive, got {}", self.duration_s));
        }
        if !(self.warmup_s >= 0.0 && self.warmup_s.is_finite()) {
            return bad(format!("warmup_s must be non-negative, got {}", self.warmup_s));
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.phy.p_falsepass) {
            return bad(format!("p_falsepass must be in [0, 1], got {}", self.phy.p_falsepass));
        }
        if let crate::phy::PayloadModel::Logistic { width_db } = self.phy.payload_model {
            if !(width_db > 0.0) {
                return bad(format!("logistic width_db must be positive, got {width_db}"));
            }
        }
        let m = &self.mac;
        if m.cw_min == 0 || m.cw_max < m.cw_min || m.retry_limit == 0 || m.slot_us == 0 {
            return bad("mac: need 0 < cw_min <= cw_max, retry_limit >= 1, slot_us > 0".into());
        }
        if m.payload_bytes == 0 || m.frame_bytes() > crate::phy::MAX_PSDU_BYTES {
            return bad(format!("mac: frame of {} bytes is out of range", m.frame_bytes()));
        }
        Mcs::from_rate_mbps(m.ack_rate_mbps).map_err(|e| Error::Config(e.to_string()))?;
        match self.rate() {
            RateMode::Fixed { rate_mbps } => {
                Mcs::from_rate_mbps(rate_mbps).map_err(|e| Error::Config(e.to_string()))?;
            }
            RateMode::Adaptive {
                update_interval_ms,
                probe_fraction,
                ewma_weight,
            } => {
                if update_interval_ms == 0
                    || !(0.0..=1.0).contains(&probe_fraction)
                    || !(ewma_weight > 0.0 && ewma_weight <= 1.0)
                {
                    return bad("adaptive rate parameters out of range".into());
                }
            }
        }
        PathlossModel::new(self.pathloss.wavelength_m, self.pathloss.kappa_d)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.fading.enabled && (self.fading.doppler_hz < 0.0 || self.fading.sample_interval_us == 0) {
            return bad("fading: doppler_hz must be >= 0 and sample_interval_us > 0".into());
        }
        let s = &self.small_network;
        if !(1..=4).contains(&s.n_aps) || s.stas_per_ap == 0 {
            return bad(format!(
                "small_network: n_aps must be in 1..=4 and stas_per_ap >= 1, got {} and {}",
                s.n_aps, s.stas_per_ap
            ));
        }
        let g = &self.grid;
        if g.stas_per_ap == 0 || !(g.isd_m > 0.0) || !(g.sta_spread > 0.0 && g.sta_spread <= 1.0) {
            return bad("grid: need stas_per_ap >= 1, isd_m > 0, sta_spread in (0, 1]".into());
        }
        if g.isd_values.iter().any(|&v| !(v > 0.0)) || g.shadowing_db < 0.0 {
            return bad("grid: isd_values must be positive and shadowing_db >= 0".into());
        }
        if matches!(self.scenario, ScenarioKind::Grid | ScenarioKind::LteBaseline) {
            FrequencyPlan::square_grid(g.cells_per_side, g.reuse)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.bianchi.n_max == 0 {
            return bad("bianchi.n_max must be at least 1".into());
        }
        Ok(())
    }
}
