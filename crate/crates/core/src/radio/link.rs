//! Per-pair link gain: large-scale part (pathloss + shadowing, reciprocal)
//! plus a held Rayleigh fading term and optional scripted fades.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::fading::{HeldFading, JakesLink};
use super::pathloss::PathlossModel;
use super::topology::{Layout, ShadowingField, StationId, Topology};
use crate::error::{Error, Result};
use crate::kernel::SimTime;

/// Stations closer than this are treated as being this far apart.
pub const MIN_DISTANCE_M: f64 = 0.5;

/// A scripted attenuation on one (symmetric) link over a time window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForcedFade {
    pub a: StationId,
    pub b: StationId,
    pub from: SimTime,
    pub until: SimTime,
    pub extra_db: f64,
}

impl ForcedFade {
    fn covers(&self, a: StationId, b: StationId) -> bool {
        (self.a == a && self.b == b) || (self.a == b && self.b == a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FadingConfig {
    pub doppler_hz: f64,
    pub sample_interval: SimTime,
}

impl Default for FadingConfig {
    fn default() -> Self {
        Self {
            doppler_hz: 10.0,
            sample_interval: SimTime::from_millis(1),
        }
    }
}

/// Gain segments: `(segment start, gain dB)`, each valid until the next start.
pub type GainSegments = SmallVec<[(SimTime, f64); 4]>;

#[derive(Clone, Debug)]
pub struct LinkModel {
    n: usize,
    large_db: Vec<f64>,
    fading: Option<(FadingConfig, Vec<HeldFading>)>,
    forced: Vec<ForcedFade>,
}

impl LinkModel {
    /// Builds from an explicit `n x n` large-scale gain matrix (dB, row-major).
    pub fn from_matrix(n: usize, large_db: Vec<f64>) -> Result<Self> {
        if large_db.len() != n * n {
            return Err(Error::Domain(format!(
                "gain matrix has {} entries, expected {}",
                large_db.len(),
                n * n
            )));
        }
        Ok(Self {
            n,
            large_db,
            fading: None,
            forced: Vec::new(),
        })
    }

    /// Large-scale gains for every station pair of `topology`.
    pub fn for_topology(
        topology: &Topology,
        pathloss: &PathlossModel,
        shadowing: Option<&ShadowingField>,
    ) -> Result<Self> {
        let n = topology.len();
        let mut m = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                m[a * n + b] = match &topology.layout {
                    Layout::FixedPathloss {
                        intercell_pl_db,
                        intracell_pl_db,
                    } => {
                        if topology.stations[a].cell == topology.stations[b].cell {
                            -intracell_pl_db
                        } else {
                            -intercell_pl_db
                        }
                    }
                    Layout::Grid { .. } => {
                        let r = topology.distance(a, b)?.max(MIN_DISTANCE_M);
                        pathloss.pathloss_db(r)? + shadowing.map_or(0.0, |s| s.get(a, b))
                    }
                };
            }
        }
        Self::from_matrix(n, m)
    }

    /// Restricts the model to `members`, re-indexed `0..members.len()`.
    pub fn subset(&self, members: &[StationId]) -> Result<Self> {
        let k = members.len();
        let mut m = vec![0.0; k * k];
        for (i, &a) in members.iter().enumerate() {
            for (j, &b) in members.iter().enumerate() {
                if i != j {
                    m[i * k + j] = self.large_scale_db(a, b)?;
                }
            }
        }
        Self::from_matrix(k, m)
    }

    /// Enables Rayleigh fading with independent per-link generators drawn from `seed`.
    pub fn with_fading(mut self, cfg: FadingConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let links = (0..self.n * self.n.saturating_sub(1) / 2)
            .map(|_| HeldFading::new(JakesLink::new(cfg.doppler_hz, &mut rng), cfg.sample_interval))
            .collect();
        self.fading = Some((cfg, links));
        self
    }

    pub fn with_forced_fades(mut self, fades: Vec<ForcedFade>) -> Self {
        self.forced = fades;
        self
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn fading_config(&self) -> Option<FadingConfig> {
        self.fading.as_ref().map(|(c, _)| *c)
    }

    fn check(&self, a: StationId, b: StationId) -> Result<()> {
        if a >= self.n {
            return Err(Error::UnknownStation(a));
        }
        if b >= self.n {
            return Err(Error::UnknownStation(b));
        }
        if a == b {
            return Err(Error::Domain(format!("link gain requested from station {a} to itself")));
        }
        Ok(())
    }

    /// Pathloss plus shadowing, reciprocal.
    pub fn large_scale_db(&self, a: StationId, b: StationId) -> Result<f64> {
        self.check(a, b)?;
        Ok(self.large_db[a * self.n + b])
    }

    fn pair_index(&self, a: StationId, b: StationId) -> usize {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    fn fading_db(&mut self, a: StationId, b: StationId, t: SimTime) -> f64 {
        let idx = self.pair_index(a, b);
        match &mut self.fading {
            Some((cfg, links)) => {
                let bucket = t.as_nanos() / cfg.sample_interval.as_nanos();
                10.0 * links[idx].power_in_bucket(bucket).log10()
            }
            None => 0.0,
        }
    }

    fn forced_db(&self, a: StationId, b: StationId, t: SimTime) -> f64 {
        self.forced
            .iter()
            .filter(|f| f.covers(a, b) && f.from <= t && t < f.until)
            .map(|f| -f.extra_db.abs())
            .sum()
    }

    /// Total gain at `t`: large-scale + fading + scripted fades.
    pub fn link_gain_db(&mut self, a: StationId, b: StationId, t: SimTime) -> Result<f64> {
        let large = self.large_scale_db(a, b)?;
        Ok(large + self.fading_db(a, b, t) + self.forced_db(a, b, t))
    }

    /// Piecewise-constant gain over `[t0, t1)`.
    pub fn gain_segments(
        &mut self,
        a: StationId,
        b: StationId,
        t0: SimTime,
        t1: SimTime,
    ) -> Result<GainSegments> {
        let large = self.large_scale_db(a, b)?;
        let mut breaks: SmallVec<[SimTime; 8]> = SmallVec::new();
        breaks.push(t0);
        if let Some((cfg, _)) = &self.fading {
            let step = cfg.sample_interval.as_nanos();
            let mut b = (t0.as_nanos() / step + 1) * step;
            while b < t1.as_nanos() {
                breaks.push(SimTime(b));
                b += step;
            }
        }
        for f in self.forced.iter().filter(|f| f.covers(a, b)) {
            for edge in [f.from, f.until] {
                if edge > t0 && edge < t1 {
                    breaks.push(edge);
                }
            }
        }
        breaks.sort_unstable();
        breaks.dedup();
        let mut out = GainSegments::new();
        for t in breaks {
            let g = large + self.fading_db(a, b, t) + self.forced_db(a, b, t);
            if out.last().is_none_or(|&(_, prev)| prev != g) {
                out.push((t, g));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::topology::{build_grid_network, build_small_network};

    #[test]
    fn degenerate_config_equals_pathloss() {
        let (t, _) = build_grid_network(6, 20.0, 12, 2, 1.0, 1).unwrap();
        let pl = PathlossModel::default();
        let mut m = LinkModel::for_topology(&t, &pl, None).unwrap();
        for (a, b) in [(0, 1), (3, 50), (17, 100)] {
            let r = t.distance(a, b).unwrap().max(MIN_DISTANCE_M);
            let g = m.link_gain_db(a, b, SimTime::from_millis(5)).unwrap();
            assert!((g - pl.pathloss_db(r).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn large_scale_is_reciprocal() {
        let (t, _) = build_grid_network(6, 20.0, 4, 4, 1.0, 2).unwrap();
        let sh = ShadowingField::generate(t.len(), 4.0, 5);
        let m = LinkModel::for_topology(&t, &PathlossModel::default(), Some(&sh)).unwrap();
        for a in 0..t.len() {
            for b in 0..t.len() {
                if a != b {
                    assert_eq!(m.large_scale_db(a, b).unwrap(), m.large_scale_db(b, a).unwrap());
                }
            }
        }
    }

    #[test]
    fn unknown_station_is_an_error() {
        let t = build_small_network(1, 64.0, 64.0, 2).unwrap();
        let mut m = LinkModel::for_topology(&t, &PathlossModel::default(), None).unwrap();
        assert!(matches!(m.link_gain_db(0, 99, SimTime::ZERO), Err(Error::UnknownStation(99))));
    }

    #[test]
    fn small_network_uses_fixed_pathlosses() {
        let t = build_small_network(2, 106.0, 64.0, 2).unwrap();
        let m = LinkModel::for_topology(&t, &PathlossModel::default(), None).unwrap();
        // AP0 = 0, STAs 1..=2, AP1 = 3, STAs 4..=5.
        assert_eq!(m.large_scale_db(0, 1).unwrap(), -64.0);
        assert_eq!(m.large_scale_db(0, 3).unwrap(), -106.0);
        assert_eq!(m.large_scale_db(1, 5).unwrap(), -106.0);
        assert_eq!(14.0 + m.large_scale_db(0, 3).unwrap(), -92.0);
    }

    #[test]
    fn time_averaged_fading_is_zero_db() {
        let t = build_small_network(1, 64.0, 64.0, 1).unwrap();
        let mut m = LinkModel::for_topology(&t, &PathlossModel::default(), None)
            .unwrap()
            .with_fading(FadingConfig::default(), 77);
        // 20 s of held 1 ms samples, averaged in the linear domain.
        let n = 20_000u64;
        let mean: f64 = (0..n)
            .map(|k| 10f64.powf((m.link_gain_db(0, 1, SimTime::from_millis(k)).unwrap() + 64.0) / 10.0))
            .sum::<f64>()
            / n as f64;
        assert!((10.0 * mean.log10()).abs() < 0.3, "{}", 10.0 * mean.log10());
    }

    #[test]
    fn segments_follow_buckets_and_forced_fades() {
        let t = build_small_network(2, 86.0, 64.0, 1).unwrap();
        let mut m = LinkModel::for_topology(&t, &PathlossModel::default(), None)
            .unwrap()
            .with_forced_fades(vec![ForcedFade {
                a: 0,
                b: 2,
                from: SimTime::from_micros(100),
                until: SimTime::from_micros(300),
                extra_db: 30.0,
            }]);
        let segs = m
            .gain_segments(2, 0, SimTime::from_micros(50), SimTime::from_micros(700))
            .unwrap();
        assert_eq!(
            segs.as_slice(),
            &[
                (SimTime::from_micros(50), -86.0),
                (SimTime::from_micros(100), -116.0),
                (SimTime::from_micros(300), -86.0)
            ]
        );
        let mut faded = m.clone().with_fading(FadingConfig::default(), 1);
        let segs = faded
            .gain_segments(0, 1, SimTime::from_micros(500), SimTime::from_micros(2500))
            .unwrap();
        let starts: Vec<_> = segs.iter().map(|s| s.0).collect();
        assert_eq!(
            starts,
            vec![SimTime::from_micros(500), SimTime::from_millis(1), SimTime::from_millis(2)]
        );
    }
}
