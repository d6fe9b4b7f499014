//! CSV and JSON writers for reports.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

use super::bianchi::BianchiSolution;
use super::metrics::{throughput_cdf, ScalingRecord, ThroughputReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Serialize)]
struct ThroughputRow {
    station: usize,
    cell: usize,
    goodput_mbps: f64,
}

#[derive(Serialize)]
struct CdfRow {
    goodput_mbps: f64,
    cumulative: f64,
}

#[derive(Serialize)]
struct BianchiRow {
    n: usize,
    tau: f64,
    p: f64,
    throughput_mbps: f64,
}

pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T], format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn write_throughput<W: Write>(out: W, report: &ThroughputReport, format: Format) -> Result<()> {
    let rows: Vec<ThroughputRow> = report
        .stas
        .iter()
        .map(|s| ThroughputRow {
            station: s.station,
            cell: s.cell,
            goodput_mbps: s.goodput_mbps,
        })
        .collect();
    write_rows(out, &rows, format)
}

pub fn write_cdf<W: Write>(out: W, report: &ThroughputReport, format: Format) -> Result<()> {
    let rows: Vec<CdfRow> = throughput_cdf(report)?
        .into_iter()
        .map(|(goodput_mbps, cumulative)| CdfRow {
            goodput_mbps,
            cumulative,
        })
        .collect();
    write_rows(out, &rows, format)
}

pub fn write_scaling<W: Write>(out: W, records: &[ScalingRecord], format: Format) -> Result<()> {
    write_rows(out, records, format)
}

pub fn write_bianchi<W: Write>(out: W, curve: &[(usize, BianchiSolution)], format: Format) -> Result<()> {
    let rows: Vec<BianchiRow> = curve
        .iter()
        .map(|&(n, s)| BianchiRow {
            n,
            tau: s.tau,
            p: s.p,
            throughput_mbps: s.throughput_mbps,
        })
        .collect();
    write_rows(out, &rows, format)
}
