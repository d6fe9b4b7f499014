//! Scenario configuration, runs, sweeps, timeline replays and output files.

pub mod config;
pub mod output;
pub mod run;
pub mod sweep;
pub mod timeline;

pub use config::{
    BianchiCurveParams, Direction, FadingParams, GridParams, ScenarioConfig, ScenarioKind,
    SmallNetworkParams,
};
pub use output::{write_run, write_sweep};
pub use run::{
    bianchi_curve, derive_seed, run_grid, run_lte, run_scenario, scaling_study, wifi_system,
    RunOutput, ScalingStudy, LTE_SYSTEM,
};
pub use sweep::{apply_axis, sweep, sweep_scaling, SweepPoint, SWEEP_AXES};
pub use timeline::{replay_timeline, TimelineCheck, TimelineKind, TimelineReport};
