use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{
    area_capacity, bianchi_throughput, fill_efficiency, lte_area_capacity, relative_density,
    BianchiParams, BianchiSolution, ScalingRecord, StaThroughput, ThroughputReport,
};
use crate::engine::{
    EngineConfig, Flow, MacTraceRecord, Network, NetworkSpec, OverlapStats, PhyTraceRecord,
    RunStats,
};
use crate::error::Result;
use crate::phy::Mcs;
use crate::radio::{
    build_grid_network, build_small_network, FrequencyPlan, LinkModel, Role, ShadowingField,
    StationId, Topology,
};

use super::config::{Direction, ScenarioConfig, ScenarioKind};
use super::timeline::{replay_timeline, TimelineKind, TimelineReport};

/// Everything a run produces. Serialising it twice from the same
/// `(config, seed)` gives identical bytes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    /// The configuration with scenario defaults resolved.
    pub config: Option<ScenarioConfig>,
    pub seed: u64,
    pub report: Option<ThroughputReport>,
    pub scaling: Vec<ScalingRecord>,
    pub bianchi: Vec<(usize, BianchiSolution)>,
    pub topology: Option<Topology>,
    pub frequency_plan: Option<FrequencyPlan>,
    pub overlap: Option<OverlapStats>,
    pub timeline: Vec<TimelineReport>,
    pub phy_trace: Vec<PhyTraceRecord>,
    pub mac_trace: Vec<MacTraceRecord>,
}

/// SplitMix64 finaliser over `seed` and a sequence of tags.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut z = seed;
    for &t in tags {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15 ^ t.wrapping_mul(0xD1B5_4A32_D192_ED03));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

pub fn engine_config(cfg: &ScenarioConfig, seed: u64) -> EngineConfig {
    EngineConfig {
        phy: cfg.phy,
        mac: cfg.mac,
        rate: cfg.rate(),
        warmup: cfg.warmup(),
        duration: cfg.duration(),
        seed,
        trace: cfg.trace,
    }
}

/// Co-channel spec for `members` of `topology`, indexed locally.
pub fn network_spec(topology: &Topology, members: &[StationId], direction: Direction) -> NetworkSpec {
    let local = |id: StationId| members.iter().position(|&m| m == id);
    let mut flows = Vec::new();
    for (i, &id) in members.iter().enumerate() {
        let st = &topology.stations[id];
        match (direction, st.role) {
            (Direction::Uplink, Role::Sta) => {
                if let Some(ap) = topology.ap_of_cell(st.cell).and_then(local) {
                    flows.push(Flow {
                        source: i,
                        destinations: vec![ap],
                    });
                }
            }
            (Direction::Downlink, Role::Ap) => {
                let dests: Vec<usize> = topology
                    .stas_of_cell(st.cell)
                    .into_iter()
                    .filter_map(local)
                    .collect();
                if !dests.is_empty() {
                    flows.push(Flow {
                        source: i,
                        destinations: dests,
                    });
                }
            }
            _ => {}
        }
    }
    NetworkSpec {
        channel: vec![0; members.len()],
        cell: members.iter().map(|&m| topology.stations[m].cell).collect(),
        flows,
        rate_override: Default::default(),
    }
}

/// Per-STA goodput in the configured direction: received for downlink,
/// delivered to the AP for uplink.
fn sta_goodput(stats: &RunStats, local: usize, direction: Direction) -> f64 {
    match direction {
        Direction::Downlink => stats.goodput_mbps(local),
        Direction::Uplink => stats.sourced_mbps(local),
    }
}

struct Partial {
    goodput: Vec<(StationId, f64)>,
    overlap: OverlapStats,
    phy: Vec<PhyTraceRecord>,
    mac: Vec<MacTraceRecord>,
}

fn simulate_members(
    cfg: &ScenarioConfig,
    topology: &Topology,
    links: &LinkModel,
    members: &[StationId],
    seed: u64,
) -> Result<Partial> {
    let direction = cfg.direction();
    let spec = network_spec(topology, members, direction);
    let mut sub = links.subset(members)?;
    if let Some(f) = cfg.fading.config() {
        sub = sub.with_fading(f, derive_seed(seed, &[0xFADE]));
    }
    let stats = Network::new(spec, sub, engine_config(cfg, seed))?.run()?;
    let goodput = members
        .iter()
        .enumerate()
        .filter(|&(_, &m)| topology.stations[m].role == Role::Sta)
        .map(|(i, &m)| (m, sta_goodput(&stats, i, direction)))
        .collect();
    let mut phy = stats.phy_trace;
    let mut mac = stats.mac_trace;
    for r in &mut phy {
        r.station = members[r.station];
    }
    for r in &mut mac {
        r.station = members[r.station];
    }
    Ok(Partial {
        goodput,
        overlap: stats.overlap,
        phy,
        mac,
    })
}

fn merge(topology: &Topology, parts: Vec<Partial>, scale: f64, duration_s: f64) -> (ThroughputReport, OverlapStats, Vec<PhyTraceRecord>, Vec<MacTraceRecord>) {
    let mut goodput = vec![0.0; topology.len()];
    let mut overlap = OverlapStats::default();
    let mut phy = Vec::new();
    let mut mac = Vec::new();
    for p in parts {
        for (s, g) in p.goodput {
            goodput[s] += g * scale;
        }
        overlap.busy_ns += p.overlap.busy_ns;
        overlap.multi_ns += p.overlap.multi_ns;
        overlap.cross_cell_ns += p.overlap.cross_cell_ns;
        overlap.staggered_ns += p.overlap.staggered_ns;
        phy.extend(p.phy);
        mac.extend(p.mac);
    }
    phy.sort_by_key(|r| r.time_ns);
    mac.sort_by_key(|r| r.time_ns);
    let stas = topology
        .stas()
        .map(|s| StaThroughput {
            station: s.id,
            cell: s.cell,
            goodput_mbps: goodput[s.id],
        })
        .collect();
    (ThroughputReport::new(stas, topology.n_cells, duration_s), overlap, phy, mac)
}

fn run_small(cfg: &ScenarioConfig, n_aps: usize) -> Result<RunOutput> {
    let s = &cfg.small_network;
    let topo = build_small_network(n_aps, s.intercell_pl_db, s.intracell_pl_db, s.stas_per_ap)?;
    let links = LinkModel::for_topology(&topo, &cfg.pathloss, None)?;
    let members: Vec<StationId> = (0..topo.len()).collect();
    let reps = cfg.replications;
    let parts = (0..reps as u64)
        .into_par_iter()
        .map(|r| simulate_members(cfg, &topo, &links, &members, cfg.seed ^ r))
        .collect::<Result<Vec<_>>>()?;
    let (report, overlap, phy, mac) = merge(&topo, parts, 1.0 / reps as f64, cfg.duration_s);
    Ok(RunOutput {
        report: Some(report),
        topology: Some(topo),
        overlap: Some(overlap),
        phy_trace: phy,
        mac_trace: mac,
        ..RunOutput::default()
    })
}

/// Grid topology and large-scale links shared by the Wi-Fi and LTE systems.
pub fn grid_environment(cfg: &ScenarioConfig, isd: f64) -> Result<(Topology, FrequencyPlan, LinkModel)> {
    let g = &cfg.grid;
    let (topo, plan) = build_grid_network(
        g.cells_per_side,
        isd,
        g.reuse,
        g.stas_per_ap,
        g.sta_spread,
        derive_seed(cfg.seed, &[1]),
    )?;
    let shadow = ShadowingField::generate(topo.len(), g.shadowing_db, derive_seed(cfg.seed, &[2]));
    let links = LinkModel::for_topology(&topo, &cfg.pathloss, Some(&shadow))?;
    Ok((topo, plan, links))
}

/// Wi-Fi grid at one ISD. Each channel group is simulated on its own, and
/// with several channels per group each channel carries an independent
/// instance whose goodput adds up per STA.
pub fn run_grid(cfg: &ScenarioConfig, isd: f64) -> Result<RunOutput> {
    let (topo, plan, links) = grid_environment(cfg, isd)?;
    let reps = cfg.replications;
    let jobs: Vec<(usize, usize, u64)> = (0..plan.n_groups())
        .flat_map(|g| {
            (0..plan.channels_per_group).flat_map(move |c| (0..reps as u64).map(move |r| (g, c, r)))
        })
        .collect();
    let parts = jobs
        .into_par_iter()
        .map(|(group, ch, r)| {
            let members: Vec<StationId> = topo
                .stations
                .iter()
                .filter(|s| s.channel_group == group)
                .map(|s| s.id)
                .collect();
            let seed = derive_seed(cfg.seed ^ r, &[3, group as u64, ch as u64]);
            simulate_members(cfg, &topo, &links, &members, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let (report, overlap, phy, mac) = merge(&topo, parts, 1.0 / reps as f64, cfg.duration_s);
    let record = ScalingRecord {
        system: wifi_system(cfg.grid.reuse),
        isd_m: isd,
        relative_density: relative_density(isd),
        area_capacity: area_capacity(&report, &topo)?,
        efficiency: None,
    };
    Ok(RunOutput {
        report: Some(report),
        scaling: vec![record],
        topology: Some(topo),
        frequency_plan: Some(plan),
        overlap: Some(overlap),
        phy_trace: phy,
        mac_trace: mac,
        ..RunOutput::default()
    })
}

pub fn wifi_system(reuse: usize) -> String {
    format!("wifi_reuse{reuse}")
}

pub const LTE_SYSTEM: &str = "lte_reuse1";

/// LTE baseline at one ISD, on the same STA drop and shadowing as the Wi-Fi grid.
pub fn run_lte(cfg: &ScenarioConfig, isd: f64) -> Result<(ThroughputReport, ScalingRecord, Topology)> {
    let (topo, _, links) = grid_environment(cfg, isd)?;
    let lte = lte_area_capacity(&topo, &links, &cfg.lte)?;
    let stas = lte
        .stas
        .iter()
        .map(|s| StaThroughput {
            station: s.station,
            cell: s.cell,
            goodput_mbps: s.rate_mbps,
        })
        .collect();
    let record = ScalingRecord {
        system: LTE_SYSTEM.into(),
        isd_m: isd,
        relative_density: relative_density(isd),
        area_capacity: lte.area_capacity,
        efficiency: None,
    };
    Ok((ThroughputReport::new(stas, topo.n_cells, cfg.duration_s), record, topo))
}

fn run_lte_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let (report, _, topo) = run_lte(cfg, cfg.grid.isd_m)?;
    let mut scaling = cfg
        .grid
        .isd_values
        .iter()
        .map(|&isd| run_lte(cfg, isd).map(|r| r.1))
        .collect::<Result<Vec<_>>>()?;
    fill_efficiency(&mut scaling)?;
    Ok(RunOutput {
        report: Some(report),
        scaling,
        topology: Some(topo),
        ..RunOutput::default()
    })
}

pub fn bianchi_curve(cfg: &ScenarioConfig) -> Result<Vec<(usize, BianchiSolution)>> {
    let rate = Mcs::from_rate_mbps(cfg.bianchi.rate_mbps)?;
    (1..=cfg.bianchi.n_max)
        .map(|n| Ok((n, bianchi_throughput(&BianchiParams::from_mac(n, &cfg.mac, rate))?)))
        .collect()
}

/// Runs the configured scenario.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mut out = match cfg.scenario {
        ScenarioKind::SingleCell => run_small(cfg, 1)?,
        ScenarioKind::SmallNetwork => run_small(cfg, cfg.small_network.n_aps)?,
        ScenarioKind::Grid => run_grid(cfg, cfg.grid.isd_m)?,
        ScenarioKind::LteBaseline => run_lte_scenario(cfg)?,
        ScenarioKind::BianchiCurve => RunOutput {
            bianchi: bianchi_curve(cfg)?,
            ..RunOutput::default()
        },
        ScenarioKind::TimelineFig3 => RunOutput {
            timeline: replay_timeline(TimelineKind::Fig3, cfg)?,
            ..RunOutput::default()
        },
        ScenarioKind::TimelineFig4 => RunOutput {
            timeline: replay_timeline(TimelineKind::Fig4, cfg)?,
            ..RunOutput::default()
        },
    };
    out.config = Some(cfg.resolved());
    out.seed = cfg.seed;
    Ok(out)
}

/// Result of a density sweep for one reuse plan and the LTE baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub wifi: Vec<RunOutput>,
    pub lte: Vec<ThroughputReport>,
    pub records: Vec<ScalingRecord>,
}

/// Wi-Fi grid and LTE baseline at every ISD of `grid.isd_values`.
pub fn scaling_study(cfg: &ScenarioConfig) -> Result<ScalingStudy> {
    let mut base = cfg.clone();
    base.scenario = ScenarioKind::Grid;
    base.validate()?;
    let mut wifi = Vec::new();
    let mut lte = Vec::new();
    let mut records = Vec::new();
    for &isd in &cfg.grid.isd_values {
        let mut c = base.clone();
        c.grid.isd_m = isd;
        let out = run_scenario(&c)?;
        records.extend(out.scaling.iter().cloned());
        wifi.push(out);
        let (report, rec, _) = run_lte(&base, isd)?;
        records.push(rec);
        lte.push(report);
    }
    fill_efficiency(&mut records)?;
    Ok(ScalingStudy { wifi, lte, records })
}
