//! 802.11 DCF building blocks.

pub mod dcf;
pub mod rate;

pub use dcf::{channel_assessment, BackoffState, FailureAction, MacParams, MacState, Nav};
pub use rate::{RateManager, RateMode, RoundRobin};
