//! Indoor diffusion pathloss.
//!
//! The power gain at distance `r` from an isotropic source in an absorbing
//! indoor medium is
//!
//! ```text
//! P_G = (λ² / 4π) · [ κ_d / (4π r) + 1 / (4π r²) ] · exp(−κ_d r)
//! ```
//!
//! where `λ` is the carrier wavelength and `κ_d` the absorption coefficient.
//! With `κ_d = 0` this collapses to the free-space inverse-square law.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathlossModel {
    /// Carrier wavelength in meters (0.06 m ~ 5 GHz).
    pub wavelength_m: f64,
    /// Absorption coefficient per meter.
    pub kappa_d: f64,
}

impl Default for PathlossModel {
    fn default() -> Self {
        Self {
            wavelength_m: 0.06,
            kappa_d: 0.24,
        }
    }
}

impl PathlossModel {
    pub fn new(wavelength_m: f64, kappa_d: f64) -> Result<Self> {
        if !(wavelength_m > 0.0) || !wavelength_m.is_finite() {
            return Err(Error::Domain(format!("wavelength must be > 0, got {wavelength_m}")));
        }
        if !(kappa_d >= 0.0) || !kappa_d.is_finite() {
            return Err(Error::Domain(format!("kappa_d must be >= 0, got {kappa_d}")));
        }
        Ok(Self {
            wavelength_m,
            kappa_d,
        })
    }

    /// Linear power gain at distance `r` meters.
    pub fn gain_linear(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("pathloss distance must be > 0, got {r}")));
        }
        let aperture = self.wavelength_m * self.wavelength_m / (4.0 * PI);
        let diffusion = self.kappa_d / (4.0 * PI * r) + 1.0 / (4.0 * PI * r * r);
        Ok(aperture * diffusion * (-self.kappa_d * r).exp())
    }

    /// Gain in dB (negative for every practical distance).
    pub fn pathloss_db(&self, r: f64) -> Result<f64> {
        Ok(10.0 * self.gain_linear(r)?.log10())
    }

    /// Distance at which a transmitter of `tx_dbm` is received at `rx_dbm`,
    /// found by bisection on the monotone gain curve.
    pub fn range_for_rx_level(&self, tx_dbm: f64, rx_dbm: f64) -> Result<f64> {
        let target = rx_dbm - tx_dbm;
        let (mut lo, mut hi) = (1e-3, 1e4);
        if self.pathloss_db(lo)? < target {
            return Err(Error::Domain("target level unreachable even at 1 mm".into()));
        }
        if self.pathloss_db(hi)? > target {
            return Ok(hi);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.pathloss_db(mid)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Free function form of [`PathlossModel::pathloss_db`].
pub fn pathloss_db(model: &PathlossModel, r: f64) -> Result<f64> {
    model.pathloss_db(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Values evaluated independently (f64 arithmetic in a separate calculator):
    //   r = 10 m -> 7.0317e-8 -> -71.530 dB
    //   r = 1 m  -> 2.2238e-5 -> -46.529 dB
    #[test]
    fn reference_points() {
        let m = PathlossModel::default();
        assert!((m.pathloss_db(10.0).unwrap() - (-71.53)).abs() < 0.01);
        assert!((m.pathloss_db(1.0).unwrap() - (-46.53)).abs() < 0.01);
    }

    #[test]
    fn inverse_square_without_absorption() {
        let m = PathlossModel::new(0.06, 0.0).unwrap();
        let d = m.pathloss_db(5.0).unwrap() - m.pathloss_db(10.0).unwrap();
        assert!((d - 20.0 * 2f64.log10()).abs() < 1e-9);
        assert!((d - 6.02).abs() < 0.01);
    }

    #[test]
    fn non_positive_distance_is_domain_error() {
        let m = PathlossModel::default();
        assert!(matches!(m.pathloss_db(0.0), Err(Error::Domain(_))));
        assert!(matches!(m.pathloss_db(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn ed_range_lies_between_12_and_16_m() {
        let m = PathlossModel::default();
        let r = m.range_for_rx_level(14.0, -62.0).unwrap();
        assert!((12.0..16.0).contains(&r), "ED range {r}");
        let at12 = 14.0 + m.pathloss_db(12.0).unwrap();
        let at16 = 14.0 + m.pathloss_db(16.0).unwrap();
        assert!(at12 > -62.0 && at16 < -62.0);
    }

    proptest! {
        #[test]
        fn gain_strictly_decreases_with_distance(r in 0.01f64..500.0, dr in 1e-3f64..50.0, k in 0.0f64..1.0) {
            let m = PathlossModel::new(0.06, k).unwrap();
            prop_assert!(m.pathloss_db(r + dr).unwrap() < m.pathloss_db(r).unwrap());
        }
    }
}
