use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analytics::emit::{write_bianchi, write_cdf, write_rows, write_scaling, write_throughput};
use crate::analytics::{fairness_ratio, Format, MIN_FAIRNESS_STAS};
use crate::engine::OverlapStats;
use crate::error::Result;
use crate::radio::{FrequencyPlan, Topology};

use super::run::RunOutput;
use super::sweep::{sweep_rows, sweep_scaling, SweepPoint};

fn create(dir: &Path, name: &str, written: &mut Vec<PathBuf>) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = BufWriter::new(File::create(&path)?);
    written.push(path);
    Ok(f)
}

fn write_json<T: Serialize + ?Sized>(dir: &Path, name: &str, value: &T, written: &mut Vec<PathBuf>) -> Result<()> {
    let mut f = create(dir, name, written)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TopologyFile<'a> {
    topology: &'a Topology,
    frequency_plan: Option<&'a FrequencyPlan>,
}

#[derive(Serialize)]
struct Summary {
    seed: u64,
    stas: usize,
    total_mbps: Option<f64>,
    fairness_ratio: Option<f64>,
    overlap: Option<OverlapStats>,
    multi_fraction: Option<f64>,
    cross_cell_fraction: Option<f64>,
    timelines_passed: Option<bool>,
}

/// Writes every artefact of `out` into `dir` and returns the paths written.
pub fn write_run(out: &RunOutput, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let ext = format.extension();
    let mut written = Vec::new();
    if let Some(report) = &out.report {
        write_throughput(create(dir, &format!("throughput.{ext}"), &mut written)?, report, format)?;
        if !report.stas.is_empty() {
            write_cdf(create(dir, &format!("cdf.{ext}"), &mut written)?, report, format)?;
        }
    }
    if !out.scaling.is_empty() {
        write_scaling(create(dir, &format!("scaling.{ext}"), &mut written)?, &out.scaling, format)?;
    }
    if !out.bianchi.is_empty() {
        write_bianchi(create(dir, &format!("bianchi.{ext}"), &mut written)?, &out.bianchi, format)?;
    }
    if let Some(topology) = &out.topology {
        let file = TopologyFile {
            topology,
            frequency_plan: out.frequency_plan.as_ref(),
        };
        write_json(dir, "topology.json", &file, &mut written)?;
    }
    if !out.timeline.is_empty() {
        write_json(dir, "timeline.json", &out.timeline, &mut written)?;
    }
    if !out.phy_trace.is_empty() {
        write_rows(create(dir, &format!("phy_trace.{ext}"), &mut written)?, &out.phy_trace, format)?;
    }
    if !out.mac_trace.is_empty() {
        write_rows(create(dir, &format!("mac_trace.{ext}"), &mut written)?, &out.mac_trace, format)?;
    }
    let report = out.report.as_ref();
    let summary = Summary {
        seed: out.seed,
        stas: report.map_or(0, |r| r.stas.len()),
        total_mbps: report.map(|r| r.total_mbps()),
        fairness_ratio: report
            .filter(|r| r.stas.len() >= MIN_FAIRNESS_STAS)
            .and_then(|r| fairness_ratio(r).ok())
            .filter(|f| f.is_finite()),
        overlap: out.overlap,
        multi_fraction: out.overlap.map(|o| o.multi_fraction()),
        cross_cell_fraction: out.overlap.map(|o| o.cross_cell_fraction()),
        timelines_passed: (!out.timeline.is_empty()).then(|| out.timeline.iter().all(|t| t.passed())),
    };
    write_json(dir, "summary.json", &summary, &mut written)?;
    write_json(dir, "config_echo.json", &out.config, &mut written)?;
    Ok(written)
}

/// Writes one sub-directory per sweep point plus `sweep` and `scaling` tables.
pub fn write_sweep(points: &[SweepPoint], dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let ext = format.extension();
    let mut written = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let sub = dir.join(format!("point_{i:03}"));
        written.extend(write_run(&p.output, &sub, format)?);
    }
    write_rows(create(dir, &format!("sweep.{ext}"), &mut written)?, &sweep_rows(points), format)?;
    let scaling = sweep_scaling(points)?;
    if !scaling.is_empty() {
        write_scaling(create(dir, &format!("scaling.{ext}"), &mut written)?, &scaling, format)?;
    }
    Ok(written)
}
