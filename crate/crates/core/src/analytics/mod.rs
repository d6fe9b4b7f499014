//! Metrics over completed runs and the analytical oracles.

pub mod bianchi;
pub mod emit;
pub mod lte;
pub mod metrics;

pub use bianchi::{bianchi_fixed_point, bianchi_throughput, BianchiParams, BianchiSolution};
pub use emit::Format;
pub use lte::{lte_area_capacity, LteBaselineConfig, LteResult, LteSta};
pub use metrics::{
    area_capacity, area_capacity_of_total, efficiency, fairness_ratio, fill_efficiency,
    percentile, relative_density, throughput_cdf, ScalingRecord, StaThroughput,
    ThroughputReport, MIN_FAIRNESS_STAS, REFERENCE_ISD_M,
};
