//! Topology, frequency planning, and propagation.

pub mod fading;
pub mod link;
pub mod pathloss;
pub mod topology;

pub use fading::{HeldFading, JakesLink, JAKES_SINUSOIDS};
pub use link::{FadingConfig, ForcedFade, LinkModel, MIN_DISTANCE_M};
pub use pathloss::{pathloss_db, PathlossModel};
pub use topology::{
    build_grid_network, build_small_network, wraparound_distance, FrequencyPlan, Layout,
    Position, Role, ShadowingField, Station, StationId, Topology, TOTAL_CHANNELS,
};
