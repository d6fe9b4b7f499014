//! Discrete-event simulator of dense multi-cell 802.11 DCF networks.

pub mod analytics;
pub mod engine;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod mac;
pub mod phy;
pub mod radio;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/time.md")]
    struct Time;
    #[doc = include_str!("../../../book/src/radio.md")]
    struct Radio;
    #[doc = include_str!("../../../book/src/capture.md")]
    struct Capture;
    #[doc = include_str!("../../../book/src/dcf.md")]
    struct Dcf;
    #[doc = include_str!("../../../book/src/analytics.md")]
    struct Analytics;
    #[doc = include_str!("../../../book/src/running.md")]
    struct Running;
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    struct Reproducibility;
}
