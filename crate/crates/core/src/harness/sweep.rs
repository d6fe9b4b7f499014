use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{fill_efficiency, ScalingRecord};
use crate::error::{Error, Result};
use crate::mac::RateMode;

use super::config::ScenarioConfig;
use super::run::{run_scenario, RunOutput};

/// Numeric fields `sweep` can vary.
pub const SWEEP_AXES: &[&str] = &[
    "intercell_pl",
    "intracell_pl",
    "n_users",
    "n_aps",
    "isd",
    "reuse",
    "cells_per_side",
    "sta_spread",
    "shadowing_db",
    "rate",
    "doppler_hz",
    "ed_threshold",
    "detection_floor",
    "header_gate",
    "p_falsepass",
    "duration",
    "warmup",
];

fn as_count(axis: &str, v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::Config(format!("axis {axis} needs whole numbers, got {v}")))
    }
}

/// Sets `axis` to `value` in `cfg`.
pub fn apply_axis(cfg: &mut ScenarioConfig, axis: &str, value: f64) -> Result<()> {
    match axis {
        "intercell_pl" => cfg.small_network.intercell_pl_db = value,
        "intracell_pl" => cfg.small_network.intracell_pl_db = value,
        "n_users" => {
            let n = as_count(axis, value)?;
            cfg.small_network.stas_per_ap = n;
            cfg.grid.stas_per_ap = n;
        }
        "n_aps" => cfg.small_network.n_aps = as_count(axis, value)?,
        "isd" => cfg.grid.isd_m = value,
        "reuse" => cfg.grid.reuse = as_count(axis, value)?,
        "cells_per_side" => cfg.grid.cells_per_side = as_count(axis, value)?,
        "sta_spread" => cfg.grid.sta_spread = value,
        "shadowing_db" => cfg.grid.shadowing_db = value,
        "rate" => cfg.rate = Some(RateMode::fixed(value)),
        "doppler_hz" => cfg.fading.doppler_hz = value,
        "ed_threshold" => cfg.phy.ed_threshold_dbm = value,
        "detection_floor" => cfg.phy.detection_floor_dbm = value,
        "header_gate" => cfg.phy.header_gate_db = value,
        "p_falsepass" => cfg.phy.p_falsepass = value,
        "duration" => cfg.duration_s = value,
        "warmup" => cfg.warmup_s = value,
        _ => {
            return Err(Error::Config(format!(
                "unknown sweep axis {axis:?}; known axes: {}",
                SWEEP_AXES.join(", ")
            )))
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis: String,
    pub value: f64,
    pub replication: usize,
    pub output: RunOutput,
}

/// One run per value and replication. Replication `r` of every value uses
/// seed `cfg.seed ^ r`. All points are validated before any simulation.
pub fn sweep(cfg: &ScenarioConfig, axis: &str, values: &[f64]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let mut jobs = Vec::new();
    for &v in values {
        for r in 0..cfg.replications {
            let mut c = cfg.clone();
            apply_axis(&mut c, axis, v)?;
            c.seed = cfg.seed ^ r as u64;
            c.replications = 1;
            c.validate()?;
            jobs.push((v, r, c));
        }
    }
    jobs.into_par_iter()
        .map(|(value, replication, c)| {
            Ok(SweepPoint {
                axis: axis.into(),
                value,
                replication,
                output: run_scenario(&c)?,
            })
        })
        .collect()
}

/// Scaling records of a sweep, area capacity averaged over replications,
/// with efficiencies filled in per system.
pub fn sweep_scaling(points: &[SweepPoint]) -> Result<Vec<ScalingRecord>> {
    let mut acc: Vec<(ScalingRecord, usize)> = Vec::new();
    for rec in points.iter().flat_map(|p| &p.output.scaling) {
        match acc
            .iter_mut()
            .find(|(r, _)| r.system == rec.system && r.isd_m == rec.isd_m)
        {
            Some((r, n)) => {
                r.area_capacity += rec.area_capacity;
                *n += 1;
            }
            None => acc.push((rec.clone(), 1)),
        }
    }
    let mut records: Vec<ScalingRecord> = acc
        .into_iter()
        .map(|(mut r, n)| {
            r.area_capacity /= n as f64;
            r
        })
        .collect();
    if !records.is_empty() {
        fill_efficiency(&mut records)?;
    }
    Ok(records)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: f64,
    pub replication: usize,
    pub seed: u64,
    pub total_mbps: Option<f64>,
    pub mean_sta_mbps: Option<f64>,
}

pub fn sweep_rows(points: &[SweepPoint]) -> Vec<SweepRow> {
    points
        .iter()
        .map(|p| {
            let report = p.output.report.as_ref();
            SweepRow {
                axis: p.axis.clone(),
                value: p.value,
                replication: p.replication,
                seed: p.output.seed,
                total_mbps: report.map(|r| r.total_mbps()),
                mean_sta_mbps: report
                    .filter(|r| !r.stas.is_empty())
                    .map(|r| r.total_mbps() / r.stas.len() as f64),
            }
        })
        .collect()
}
