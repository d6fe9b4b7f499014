//! Saturation throughput of a single DCF cell with basic access.
//!
//! Each station transmits in a random slot with probability `tau` and sees a
//! collision with probability `p`:
//!
//! ```text
//! tau = 2 (1 - 2p) / ((1 - 2p)(W + 1) + p W (1 - (2p)^m))
//! p   = 1 - (1 - tau)^(n - 1)
//! ```
//!
//! The first line is evaluated in the equivalent form
//! `2 / ((W + 1) + p W sum_{i<m} (2p)^i)`, which has no pole at `p = 1/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mac::MacParams;
use crate::phy::{frame_airtime, Mcs};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BianchiParams {
    pub n: usize,
    /// Initial window in slots (`cw_min + 1`).
    pub w: u32,
    /// Number of doubling stages.
    pub m: u32,
    pub slot_us: f64,
    pub difs_us: f64,
    pub sifs_us: f64,
    pub ack_us: f64,
    /// PHY preamble, PLCP header and MAC/IP/UDP header airtime.
    pub header_us: f64,
    /// Airtime of the application payload.
    pub payload_us: f64,
    pub payload_bits: f64,
}

impl BianchiParams {
    /// Uses the simulator's own DCF constants, packet and fixed rate.
    pub fn from_mac(n: usize, mac: &MacParams, rate: Mcs) -> Self {
        let frame = frame_airtime(mac.frame_bytes(), rate).as_micros_f64();
        let payload = mac.payload_bytes as f64 * 8.0 / rate.rate_mbps();
        Self {
            n,
            w: mac.cw_min + 1,
            m: mac.backoff_stages(),
            slot_us: mac.slot_us as f64,
            difs_us: mac.difs_us as f64,
            sifs_us: mac.sifs_us as f64,
            ack_us: mac.ack_airtime_for(rate).as_micros_f64(),
            header_us: frame - payload,
            payload_us: payload,
            payload_bits: mac.payload_bytes as f64 * 8.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BianchiSolution {
    pub tau: f64,
    pub p: f64,
    pub throughput_mbps: f64,
}

fn tau_of_p(p: f64, w: f64, m: u32) -> f64 {
    let series: f64 = (0..m).map(|i| (2.0 * p).powi(i as i32)).sum();
    2.0 / ((w + 1.0) + p * w * series)
}

fn p_of_tau(tau: f64, n: usize) -> f64 {
    1.0 - (1.0 - tau).powi(n as i32 - 1)
}

/// Solves the fixed point for `(tau, p)` by bisection on `tau`.
pub fn bianchi_fixed_point(n: usize, w: u32, m: u32) -> Result<(f64, f64)> {
    if n == 0 || w == 0 {
        return Err(Error::Domain(format!("bianchi needs n >= 1 and W >= 1, got n={n} W={w}")));
    }
    let w = w as f64;
    let f = |tau: f64| tau - tau_of_p(p_of_tau(tau, n), w, m);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let tau = 0.5 * (lo + hi);
    let p = p_of_tau(tau, n);
    let residual = (tau - tau_of_p(p, w, m)).abs();
    if !(residual < 1e-12 && tau > 0.0 && tau < 1.0) {
        return Err(Error::NoConvergence(format!(
            "bianchi fixed point for n={n}: residual {residual:e}"
        )));
    }
    Ok((tau, p))
}

pub fn bianchi_throughput(params: &BianchiParams) -> Result<BianchiSolution> {
    let (tau, p) = bianchi_fixed_point(params.n, params.w, params.m)?;
    let n = params.n as f64;
    let p_tr = 1.0 - (1.0 - tau).powf(n);
    let p_s = n * tau * (1.0 - tau).powf(n - 1.0) / p_tr;
    let data = params.header_us + params.payload_us;
    let t_s = data + params.sifs_us + params.ack_us + params.difs_us;
    let t_c = data + params.difs_us;
    let denom = (1.0 - p_tr) * params.slot_us + p_tr * p_s * t_s + p_tr * (1.0 - p_s) * t_c;
    Ok(BianchiSolution {
        tau,
        p,
        throughput_mbps: p_s * p_tr * params.payload_bits / denom,
    })
}
