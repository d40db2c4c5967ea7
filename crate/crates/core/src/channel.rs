//! Pure-loss channel reduced to Gaussian displacement noise by amplification,
//! plus seeded sampling of the resulting displacements.
//!
//! Variances are per-quadrature shift variances (`u`, `v` of a displacement
//! `α = (u + iv)/√2`), the same `σ²` consumed by the shift-error model.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AmpMode {
    /// Phase-insensitive amplification of gain `1/η` before the loss.
    PreAmplify,
    /// Classical rescaling of the homodyne outcomes.
    CcAmplify,
}

impl AmpMode {
    pub const ALL: [AmpMode; 2] = [AmpMode::PreAmplify, AmpMode::CcAmplify];

    pub fn short_name(self) -> &'static str {
        match self {
            AmpMode::PreAmplify => "pre",
            AmpMode::CcAmplify => "cc",
        }
    }
}

impl fmt::Display for AmpMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for AmpMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pre" | "preamplify" | "pre-amplify" => Ok(AmpMode::PreAmplify),
            "cc" | "ccamplify" | "cc-amplify" => Ok(AmpMode::CcAmplify),
            other => invalid(
                "amp",
                format!("unknown amplification mode `{other}` (expected pre or cc)"),
            ),
        }
    }
}

/// One arm of the link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub eta: f64,
    pub amp_mode: AmpMode,
}

impl ChannelConfig {
    pub fn new(eta: f64, amp_mode: AmpMode) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self { eta, amp_mode })
    }

    pub fn from_loss_db(loss_db: f64, amp_mode: AmpMode) -> Result<Self> {
        Self::new(loss_db_to_transmissivity(loss_db)?, amp_mode)
    }

    pub fn transform(&self, sigma2: f64) -> Result<f64> {
        transform_variance(sigma2, self.eta, self.amp_mode)
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return invalid(
            "eta",
            format!("transmissivity must lie in (0, 1], got {eta}"),
        );
    }
    Ok(())
}

/// `10^(−dB/10)`; 0 dB is exactly 1.
pub fn loss_db_to_transmissivity(loss_db: f64) -> Result<f64> {
    if !(loss_db >= 0.0) || !loss_db.is_finite() {
        return invalid(
            "loss_db",
            format!("loss must be finite and ≥ 0 dB, got {loss_db}"),
        );
    }
    if loss_db == 0.0 {
        return Ok(1.0);
    }
    Ok(10f64.powf(-loss_db / 10.0))
}

pub fn transmissivity_to_loss_db(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(-10.0 * eta.log10())
}

/// Added displacement variance after a loss of transmissivity `eta`:
/// `σ² + (1−η)` with pre-amplification, `σ² + (1−η)/(2η)` with
/// CC-amplification.
pub fn transform_variance(sigma2: f64, eta: f64, mode: AmpMode) -> Result<f64> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return invalid(
            "sigma2",
            format!("variance must be finite and ≥ 0, got {sigma2}"),
        );
    }
    check_eta(eta)?;
    if eta == 1.0 {
        return Ok(sigma2);
    }
    let added = match mode {
        AmpMode::PreAmplify => 1.0 - eta,
        AmpMode::CcAmplify => (1.0 - eta) / (2.0 * eta),
    };
    Ok(sigma2 + added)
}

/// Quadrature shifts `(u, v)` of one random displacement.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DisplacementSample {
    pub u: f64,
    pub v: f64,
}

/// Independent zero-mean Gaussian shifts, each of variance `sigma2`.
pub fn sample_displacement<R: Rng + ?Sized>(sigma2: f64, rng: &mut R) -> DisplacementSample {
    if sigma2 == 0.0 {
        return DisplacementSample::default();
    }
    let sd = sigma2.sqrt();
    let u: f64 = rng.sample(StandardNormal);
    let v: f64 = rng.sample(StandardNormal);
    DisplacementSample {
        u: sd * u,
        v: sd * v,
    }
}

/// Counter-based stream `shard` of the master `seed`. Streams never overlap,
/// so results do not depend on how shards are scheduled.
pub fn stream_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lossless_is_identity() {
        for mode in AmpMode::ALL {
            assert_eq!(transform_variance(0.37, 1.0, mode).unwrap(), 0.37);
        }
    }

    #[test]
    fn transform_examples() {
        assert_abs_diff_eq!(
            transform_variance(0.0, 0.8, AmpMode::PreAmplify).unwrap(),
            0.2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            transform_variance(0.0, 0.8, AmpMode::CcAmplify).unwrap(),
            0.125,
            epsilon = 1e-15
        );
        assert!(transform_variance(0.0, 0.0, AmpMode::CcAmplify).is_err());
        assert!(transform_variance(0.0, 1.2, AmpMode::PreAmplify).is_err());
        assert!(transform_variance(-0.1, 0.5, AmpMode::PreAmplify).is_err());
    }

    #[test]
    fn cc_beats_pre_above_half() {
        for i in 1..1000 {
            let eta = i as f64 / 1000.0;
            let pre = transform_variance(0.0, eta, AmpMode::PreAmplify).unwrap();
            let cc = transform_variance(0.0, eta, AmpMode::CcAmplify).unwrap();
            assert_eq!(cc < pre, eta > 0.5, "eta={eta}");
        }
    }

    #[test]
    fn monotone_in_eta() {
        for mode in AmpMode::ALL {
            let mut last = f64::INFINITY;
            for i in 1..=200 {
                let v = transform_variance(0.1, i as f64 / 200.0, mode).unwrap();
                assert!(v <= last);
                last = v;
            }
        }
    }

    #[test]
    fn loss_db_conversion() {
        assert_eq!(loss_db_to_transmissivity(0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(
            loss_db_to_transmissivity(10.0).unwrap(),
            0.1,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            transmissivity_to_loss_db(0.5).unwrap(),
            3.0103,
            epsilon = 1e-4
        );
        assert!(loss_db_to_transmissivity(-1.0).is_err());
    }

    #[test]
    fn zero_variance_sample() {
        let mut rng = stream_rng(7, 0);
        for _ in 0..10 {
            assert_eq!(
                sample_displacement(0.0, &mut rng),
                DisplacementSample::default()
            );
        }
    }

    #[test]
    fn sample_statistics() {
        let n = 1_000_000;
        let s2 = 0.3;
        let mut rng = stream_rng(2024, 3);
        let (mut su, mut suu, mut sv, mut svv, mut suv) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let DisplacementSample { u, v } = sample_displacement(s2, &mut rng);
            su += u;
            suu += u * u;
            sv += v;
            svv += v * v;
            suv += u * v;
        }
        let nf = n as f64;
        let var_u = suu / nf - (su / nf).powi(2);
        let var_v = svv / nf - (sv / nf).powi(2);
        // standard error of a Gaussian sample variance: σ²√(2/n)
        let se_var = s2 * (2.0 / nf).sqrt();
        assert!((var_u - s2).abs() < 3.0 * se_var, "{var_u}");
        assert!((var_v - s2).abs() < 3.0 * se_var, "{var_v}");
        let cov = suv / nf - (su / nf) * (sv / nf);
        assert!(cov.abs() < 3.0 * s2 / nf.sqrt(), "{cov}");
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a: Vec<f64> = (0..5)
            .map(|_| sample_displacement(1.0, &mut stream_rng(9, 1)).u)
            .collect();
        let mut r1 = stream_rng(9, 1);
        let mut r2 = stream_rng(9, 1);
        let mut r3 = stream_rng(9, 2);
        let x1: Vec<_> = (0..20).map(|_| sample_displacement(1.0, &mut r1)).collect();
        let x2: Vec<_> = (0..20).map(|_| sample_displacement(1.0, &mut r2)).collect();
        let x3: Vec<_> = (0..20).map(|_| sample_displacement(1.0, &mut r3)).collect();
        assert_eq!(x1, x2);
        assert_ne!(x1, x3);
        assert!(a.iter().all(|&u| u == a[0]));
    }
}
