//! Throughput aggregation, CDFs, fairness, area capacity and efficiency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radio::{Layout, StationId, Topology};

/// Cell side of the reference deployment that densities are measured against.
pub const REFERENCE_ISD_M: f64 = 40.0;

/// Minimum population for which the 10th/90th percentiles are reported.
pub const MIN_FAIRNESS_STAS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaThroughput {
    pub station: StationId,
    pub cell: usize,
    pub goodput_mbps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub stas: Vec<StaThroughput>,
    /// Indexed by cell.
    pub cell_totals: Vec<f64>,
    pub duration_s: f64,
}

impl ThroughputReport {
    /// Builds the report and the per-cell totals from per-STA goodputs.
    pub fn new(stas: Vec<StaThroughput>, n_cells: usize, duration_s: f64) -> Self {
        let mut cell_totals = vec![0.0; n_cells];
        for s in &stas {
            if s.cell >= cell_totals.len() {
                cell_totals.resize(s.cell + 1, 0.0);
            }
            cell_totals[s.cell] += s.goodput_mbps;
        }
        Self {
            stas,
            cell_totals,
            duration_s,
        }
    }

    pub fn total_mbps(&self) -> f64 {
        self.stas.iter().map(|s| s.goodput_mbps).sum()
    }

    pub fn goodputs(&self) -> Vec<f64> {
        self.stas.iter().map(|s| s.goodput_mbps).collect()
    }
}

/// Nearest-rank percentile: the smallest value with at least `q` percent of
/// the sample at or below it. The median of `{1, 2, 3, 4}` is `2`.
pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Analytics("percentile of an empty sample".into()));
    }
    if !(0.0..=100.0).contains(&q) {
        return Err(Error::Analytics(format!("percentile {q} outside [0, 100]")));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
    Ok(v[rank.min(v.len()) - 1])
}

/// Empirical CDF of per-STA goodput as `(value, cumulative fraction)` points.
pub fn throughput_cdf(report: &ThroughputReport) -> Result<Vec<(f64, f64)>> {
    if report.stas.is_empty() {
        return Err(Error::Analytics("throughput CDF of an empty report".into()));
    }
    let mut v = report.goodputs();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    Ok(v.into_iter()
        .enumerate()
        .map(|(i, x)| (x, (i + 1) as f64 / n))
        .collect())
}

/// 90th-percentile goodput over 10th-percentile goodput.
pub fn fairness_ratio(report: &ThroughputReport) -> Result<f64> {
    let n = report.stas.len();
    if n < MIN_FAIRNESS_STAS {
        return Err(Error::Analytics(format!(
            "fairness ratio needs at least {MIN_FAIRNESS_STAS} STAs, got {n}"
        )));
    }
    let v = report.goodputs();
    let lo = percentile(&v, 10.0)?;
    let hi = percentile(&v, 90.0)?;
    if lo <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(hi / lo)
}

fn grid_area(topology: &Topology) -> Result<f64> {
    match topology.layout {
        Layout::Grid { .. } if topology.wraparound => Ok(topology.world_side * topology.world_side),
        _ => Err(Error::Analytics("area capacity needs a wraparound grid topology".into())),
    }
}

/// Total goodput per reference cell area (`REFERENCE_ISD_M` squared).
pub fn area_capacity(report: &ThroughputReport, topology: &Topology) -> Result<f64> {
    area_capacity_of_total(report.total_mbps(), topology)
}

pub fn area_capacity_of_total(total_mbps: f64, topology: &Topology) -> Result<f64> {
    Ok(total_mbps / grid_area(topology)? * REFERENCE_ISD_M * REFERENCE_ISD_M)
}

/// `E = (c1 / c0) / (d1 / d0)`.
pub fn efficiency(c0: f64, d0: f64, c1: f64, d1: f64) -> Result<f64> {
    if !(c0 > 0.0 && d0 > 0.0 && d1 > 0.0) {
        return Err(Error::Analytics(format!(
            "efficiency needs positive baselines, got c0={c0} d0={d0} d1={d1}"
        )));
    }
    Ok((c1 / c0) / (d1 / d0))
}

pub fn relative_density(isd: f64) -> f64 {
    (REFERENCE_ISD_M / isd).powi(2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub system: String,
    pub isd_m: f64,
    pub relative_density: f64,
    pub area_capacity: f64,
    /// Relative to the reference point of the same system.
    pub efficiency: Option<f64>,
}

/// Fills in `efficiency` for every record of `system`, taking the record with
/// the lowest density as `(c0, d0)`.
pub fn fill_efficiency(records: &mut [ScalingRecord]) -> Result<()> {
    let mut systems: Vec<String> = records.iter().map(|r| r.system.clone()).collect();
    systems.sort();
    systems.dedup();
    for sys in systems {
        let base = records
            .iter()
            .filter(|r| r.system == sys)
            .min_by(|a, b| a.relative_density.total_cmp(&b.relative_density))
            .map(|r| (r.area_capacity, r.relative_density))
            .expect("system present");
        for r in records.iter_mut().filter(|r| r.system == sys) {
            r.efficiency = Some(efficiency(base.0, base.1, r.area_capacity, r.relative_density)?);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::build_grid_network;
    use proptest::prelude::*;

    fn report(values: &[f64]) -> ThroughputReport {
        ThroughputReport::new(
            values
                .iter()
                .enumerate()
                .map(|(i, &g)| StaThroughput {
                    station: i,
                    cell: i / 4,
                    goodput_mbps: g,
                })
                .collect(),
            values.len().div_ceil(4),
            1.0,
        )
    }

    #[test]
    fn nearest_rank_median() {
        assert_eq!(percentile(&[4.0, 1.0, 3.0, 2.0], 50.0).unwrap(), 2.0);
        assert_eq!(percentile(&[1.0, 2.0, 3.0, 4.0], 100.0).unwrap(), 4.0);
        assert_eq!(percentile(&[1.0, 2.0, 3.0, 4.0], 0.0).unwrap(), 1.0);
        assert!(percentile(&[], 50.0).is_err());
    }

    #[test]
    fn cdf_shapes() {
        let eq = throughput_cdf(&report(&[5.0; 6])).unwrap();
        assert!(eq.iter().all(|&(v, _)| v == 5.0));
        assert_eq!(eq.last().unwrap().1, 1.0);
        let many: Vec<f64> = (0..144).map(|i| i as f64).collect();
        assert_eq!(throughput_cdf(&report(&many)).unwrap().len(), 144);
        assert!(throughput_cdf(&report(&[])).is_err());
    }

    #[test]
    fn fairness_examples() {
        assert_eq!(fairness_ratio(&report(&[3.0; 12])).unwrap(), 1.0);
        assert!(fairness_ratio(&report(&[3.0; 9])).is_err());
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(fairness_ratio(&report(&v)).unwrap(), 9.0);
    }

    #[test]
    fn cell_totals_sum_members() {
        let r = report(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(r.cell_totals, vec![10.0, 5.0]);
    }

    #[test]
    fn area_capacity_normalisation() {
        let (t40, _) = build_grid_network(6, 40.0, 12, 4, 0.25, 1).unwrap();
        let (t20, _) = build_grid_network(6, 20.0, 12, 4, 0.25, 1).unwrap();
        let r = report(&[2.0; 144]);
        let c40 = area_capacity(&r, &t40).unwrap();
        assert!((c40 - 288.0 / 36.0).abs() < 1e-12);
        let c20 = area_capacity(&r, &t20).unwrap();
        assert!((c20 / c40 - 4.0).abs() < 1e-12);
        let doubled = report(&[4.0; 144]);
        assert!((area_capacity(&doubled, &t40).unwrap() / c40 - 2.0).abs() < 1e-12);
        let small = crate::radio::build_small_network(2, 86.0, 64.0, 2).unwrap();
        assert!(area_capacity(&r, &small).is_err());
    }

    #[test]
    fn area_capacity_ignores_labels_and_translation() {
        let (t, _) = build_grid_network(6, 20.0, 12, 4, 0.25, 3).unwrap();
        let mut r = report(&(0..144).map(|i| (i % 7) as f64).collect::<Vec<_>>());
        let c = area_capacity(&r, &t).unwrap();
        r.stas.reverse();
        assert_eq!(area_capacity(&r, &t.translated(7.0, 3.0)).unwrap(), c);
    }

    #[test]
    fn efficiency_examples() {
        assert_eq!(efficiency(3.0, 1.0, 6.0, 2.0).unwrap(), 1.0);
        assert_eq!(efficiency(3.0, 1.0, 3.0, 2.0).unwrap(), 0.5);
        assert!(efficiency(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(efficiency(1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn scaling_efficiency_uses_sparsest_point() {
        let mut recs: Vec<ScalingRecord> = [(40.0, 10.0), (20.0, 36.0)]
            .iter()
            .map(|&(isd, c)| ScalingRecord {
                system: "wifi".into(),
                isd_m: isd,
                relative_density: relative_density(isd),
                area_capacity: c,
                efficiency: None,
            })
            .collect();
        fill_efficiency(&mut recs).unwrap();
        assert_eq!(recs[0].efficiency, Some(1.0));
        assert!((recs[1].efficiency.unwrap() - 0.9).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn efficiency_scale_identity(c in 1e-3f64..1e4, d in 1e-3f64..1e3, k in 1e-3f64..1e3) {
            let e = efficiency(c, d, c * k, d * k).unwrap();
            prop_assert!((e - 1.0).abs() < 1e-12);
        }

        #[test]
        fn cdf_is_monotone_and_ends_at_one(v in proptest::collection::vec(0.0f64..100.0, 1..200)) {
            let cdf = throughput_cdf(&report(&v)).unwrap();
            for w in cdf.windows(2) {
                prop_assert!(w[0].0 <= w[1].0 && w[0].1 < w[1].1);
            }
            let last = cdf.last().unwrap();
            prop_assert_eq!(last.1, 1.0);
            prop_assert_eq!(last.0, v.iter().cloned().fold(f64::MIN, f64::max));
        }
    }
}
