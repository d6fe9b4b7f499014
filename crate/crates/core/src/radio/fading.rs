//! Rayleigh fast fading from a sum of equal-power sinusoids (Jakes model).
//!
//! Each link owns `g(t) = N^{-1/2} Σ exp(j(2π f_d cos(α_n) t + φ_n))` with
//! stratified random arrival angles `α_n` and uniform phases `φ_n`. The
//! autocorrelation of `g` tends to `J0(2π f_d τ)` and `|g|²` is close to
//! exponentially distributed with unit mean.
//!
//! The simulator samples `|g|²` at the start of every `sample_interval`
//! bucket and holds it for the rest of the bucket.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::kernel::SimTime;

pub const JAKES_SINUSOIDS: usize = 64;

/// Gap (in buckets) above which the cached phasors are recomputed directly
/// instead of being rotated forward step by step.
const MAX_ROTATION_STEPS: u64 = 8;
/// Rotated phasors are re-anchored at least this often to bound rounding drift.
const REANCHOR_EVERY: u64 = 1024;

/// One link's sum-of-sinusoids generator.
#[derive(Clone, Debug)]
pub struct JakesLink {
    /// Angular Doppler shift of each component, rad/s.
    omega: [f64; JAKES_SINUSOIDS],
    phase: [f64; JAKES_SINUSOIDS],
}

impl JakesLink {
    pub fn new(doppler_hz: f64, rng: &mut ChaCha8Rng) -> Self {
        let mut omega = [0.0; JAKES_SINUSOIDS];
        let mut phase = [0.0; JAKES_SINUSOIDS];
        let n = JAKES_SINUSOIDS as f64;
        for k in 0..JAKES_SINUSOIDS {
            let alpha = 2.0 * PI * (k as f64 + rng.random::<f64>()) / n;
            omega[k] = 2.0 * PI * doppler_hz * alpha.cos();
            phase[k] = 2.0 * PI * rng.random::<f64>();
        }
        Self { omega, phase }
    }

    /// Complex gain at `t` seconds.
    pub fn gain_at(&self, t: f64) -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for k in 0..JAKES_SINUSOIDS {
            let (s, c) = (self.omega[k] * t + self.phase[k]).sin_cos();
            re += c;
            im += s;
        }
        let norm = (JAKES_SINUSOIDS as f64).sqrt().recip();
        (re * norm, im * norm)
    }

    /// `|g(t)|²`.
    pub fn power_at(&self, t: f64) -> f64 {
        let (re, im) = self.gain_at(t);
        re * re + im * im
    }
}

#[derive(Clone, Debug)]
struct Phasors {
    bucket: u64,
    anchored_at: u64,
    re: [f64; JAKES_SINUSOIDS],
    im: [f64; JAKES_SINUSOIDS],
    power: f64,
}

/// A [`JakesLink`] sampled and held per bucket, with a forward-stepping cache.
#[derive(Clone, Debug)]
pub struct HeldFading {
    link: JakesLink,
    bucket_secs: f64,
    rot_re: [f64; JAKES_SINUSOIDS],
    rot_im: [f64; JAKES_SINUSOIDS],
    cache: Option<Phasors>,
}

impl HeldFading {
    pub fn new(link: JakesLink, sample_interval: SimTime) -> Self {
        let bucket_secs = sample_interval.as_secs_f64();
        let mut rot_re = [0.0; JAKES_SINUSOIDS];
        let mut rot_im = [0.0; JAKES_SINUSOIDS];
        for k in 0..JAKES_SINUSOIDS {
            let (s, c) = (link.omega[k] * bucket_secs).sin_cos();
            rot_re[k] = c;
            rot_im[k] = s;
        }
        Self {
            link,
            bucket_secs,
            rot_re,
            rot_im,
            cache: None,
        }
    }

    fn anchor(&self, bucket: u64) -> Phasors {
        let t = bucket as f64 * self.bucket_secs;
        let mut re = [0.0; JAKES_SINUSOIDS];
        let mut im = [0.0; JAKES_SINUSOIDS];
        for k in 0..JAKES_SINUSOIDS {
            let (s, c) = (self.link.omega[k] * t + self.link.phase[k]).sin_cos();
            re[k] = c;
            im[k] = s;
        }
        let power = phasor_power(&re, &im);
        Phasors {
            bucket,
            anchored_at: bucket,
            re,
            im,
            power,
        }
    }

    /// Held `|g|²` for bucket index `bucket`.
    pub fn power_in_bucket(&mut self, bucket: u64) -> f64 {
        match &mut self.cache {
            Some(c) if c.bucket == bucket => return c.power,
            Some(c)
                if bucket > c.bucket
                    && bucket - c.bucket <= MAX_ROTATION_STEPS
                    && bucket - c.anchored_at < REANCHOR_EVERY =>
            {
                for _ in c.bucket..bucket {
                    for k in 0..JAKES_SINUSOIDS {
                        let re = c.re[k] * self.rot_re[k] - c.im[k] * self.rot_im[k];
                        let im = c.re[k] * self.rot_im[k] + c.im[k] * self.rot_re[k];
                        c.re[k] = re;
                        c.im[k] = im;
                    }
                }
                c.bucket = bucket;
                c.power = phasor_power(&c.re, &c.im);
                return c.power;
            }
            Some(c) if bucket < c.bucket => {
                // Out-of-order query: answer directly, keep the cache.
                return self.link.power_at(bucket as f64 * self.bucket_secs);
            }
            _ => {}
        }
        let fresh = self.anchor(bucket);
        let p = fresh.power;
        self.cache = Some(fresh);
        p
    }
}

fn phasor_power(re: &[f64; JAKES_SINUSOIDS], im: &[f64; JAKES_SINUSOIDS]) -> f64 {
    let r: f64 = re.iter().sum();
    let i: f64 = im.iter().sum();
    (r * r + i * i) / JAKES_SINUSOIDS as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn links(n: usize, seed: u64) -> Vec<JakesLink> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| JakesLink::new(10.0, &mut rng)).collect()
    }

    /// J0 by trapezoidal quadrature of (1/π)∫₀^π cos(x sin θ) dθ.
    fn bessel_j0(x: f64) -> f64 {
        let n = 2000;
        let h = PI / n as f64;
        // Both endpoints evaluate to cos(0) = 1, each with weight 1/2.
        let mut acc = 1.0;
        for k in 1..n {
            acc += (x * (k as f64 * h).sin()).cos();
        }
        acc * h / PI
    }

    #[test]
    fn quadrature_j0_matches_known_values() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-9);
        // First zero of J0.
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-6);
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-6);
    }

    #[test]
    fn power_cdf_is_exponential() {
        // 1000 links x 100 samples spaced 0.37 s apart (several coherence times).
        let mut samples: Vec<f64> = links(1000, 7)
            .iter()
            .flat_map(|l| (0..100).map(move |i| l.power_at(i as f64 * 0.37)))
            .collect();
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        let ks = samples
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = 1.0 - (-x).exp();
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "KS statistic {ks}");
    }

    #[test]
    fn autocorrelation_follows_j0() {
        let ls = links(400, 11);
        for &tau in &[0.005, 0.01, 0.02, 0.04, 0.07] {
            let mut acc = 0.0;
            let mut count = 0.0;
            for l in &ls {
                for i in 0..20 {
                    let t = i as f64 * 1.3;
                    let (a_re, a_im) = l.gain_at(t);
                    let (b_re, b_im) = l.gain_at(t + tau);
                    acc += a_re * b_re + a_im * b_im;
                    count += 1.0;
                }
            }
            let r = acc / count;
            let expected = bessel_j0(2.0 * PI * 10.0 * tau);
            assert!((r - expected).abs() < 0.05, "tau={tau} r={r} J0={expected}");
        }
    }

    #[test]
    fn long_run_time_average_is_unit() {
        for l in links(5, 3) {
            let mut held = HeldFading::new(l, SimTime::from_millis(1));
            let buckets = 100_000u64; // 100 s
            let mean: f64 =
                (0..buckets).map(|b| held.power_in_bucket(b)).sum::<f64>() / buckets as f64;
            let db = 10.0 * mean.log10();
            assert!(db.abs() < 0.3, "time-average fading {db} dB");
        }
    }

    #[test]
    fn held_cache_matches_direct_evaluation() {
        let l = links(1, 5).pop().unwrap();
        let mut held = HeldFading::new(l.clone(), SimTime::from_millis(1));
        for b in [0u64, 1, 2, 5, 13, 14, 40, 39, 2000, 2003, 2003, 2010] {
            let direct = l.power_at(b as f64 * 1e-3);
            let cached = held.power_in_bucket(b);
            assert!((direct - cached).abs() < 1e-9, "bucket {b}");
        }
    }
}
