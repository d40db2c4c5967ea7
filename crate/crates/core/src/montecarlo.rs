//! Sampling oracle for the dual-homodyne swap at the level of lattice
//! displacements: ideal peak + Gaussian shift, binned to logical outcomes.

use std::collections::BTreeMap;

use crate::channel::{sample_displacement, stream_rng};
use crate::error::{invalid, Result};
use crate::exec::{map_range, Execution};
use crate::gkp::{shift_distribution, GkpCode, SqueezedGkp, DEFAULT_J_MAX};
use crate::qudit::swap_update;
use crate::rate::Combine;
use rand::Rng;

/// Trials per independent random stream. Fixed so results do not depend on
/// the number of worker threads.
pub const SHARD_SIZE: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapTrialConfig {
    pub code: GkpCode,
    /// Per-arm shift variance after the channel transform.
    pub sigma2_arm: f64,
    pub n_trials: u64,
    pub seed: u64,
    pub combine: Combine,
}

impl SwapTrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return invalid("n_trials", "need at least one trial");
        }
        if !(self.sigma2_arm >= 0.0) || !self.sigma2_arm.is_finite() {
            return invalid(
                "sigma2_arm",
                format!("must be finite and ≥ 0, got {}", self.sigma2_arm),
            );
        }
        Ok(())
    }

    /// `σ²_eff` consumed by the analytic shift model.
    pub fn sigma2_eff(&self) -> f64 {
        self.combine.arms() * self.sigma2_arm
    }

    fn shards(&self) -> u64 {
        self.n_trials.div_ceil(SHARD_SIZE)
    }
}

/// One simulated swap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapOutcome {
    /// Homodyne values.
    pub x: f64,
    pub y: f64,
    pub x_l: usize,
    pub y_l: usize,
    /// Remainders in lattice units, in `[−½, ½)`.
    pub x_f: f64,
    pub y_f: f64,
    pub heralded: (usize, usize),
    /// Centered shift of the binned outcome relative to the transmitted value.
    pub measured_shift: (i64, i64),
    /// Nearest lattice multiple of the sampled displacement.
    pub true_shift: (i64, i64),
}

/// Bell label heralded by logical outcomes `(x_L, y_L)`, i.e. the state
/// `W₁^{(0,d−x_L)} W₂^{(d−y_L,0)} |Ψ_{0,0}⟩` up to a global phase.
pub fn heralded_label(x_l: usize, y_l: usize, d: usize) -> Result<(usize, usize)> {
    if d < 2 || x_l >= d || y_l >= d {
        return invalid(
            "outcome",
            format!("logical outcomes ({x_l}, {y_l}) out of range for d = {d}"),
        );
    }
    swap_update(0, 0, 0, 0, (d - x_l) % d, y_l, d)
}

fn bin_units(t: f64, d: usize) -> (usize, f64) {
    let whole = (t + 0.5).floor();
    (whole.rem_euclid(d as f64) as usize, t - whole)
}

fn trial<R: Rng>(config: &SwapTrialConfig, rng: &mut R) -> SwapOutcome {
    let code = &config.code;
    let d = code.d();
    let s = code.spacing();
    let (q, p) = match config.combine {
        Combine::SingleArm => {
            let a = sample_displacement(config.sigma2_arm, rng);
            (a.u / 2f64.sqrt(), a.v / 2f64.sqrt())
        }
        Combine::SumArms => {
            let a = sample_displacement(config.sigma2_arm, rng);
            let b = sample_displacement(config.sigma2_arm, rng);
            ((a.u - b.u) / 2f64.sqrt(), (a.v + b.v) / 2f64.sqrt())
        }
    };
    let x_true = rng.random_range(0..d);
    let y_true = rng.random_range(0..d);
    let tx = x_true as f64 + q / s;
    let ty = y_true as f64 + p / s;
    let (x_l, x_f) = bin_units(tx, d);
    let (y_l, y_f) = bin_units(ty, d);
    let centered = |k: i64| code.center_shift(k);
    SwapOutcome {
        x: tx * s,
        y: ty * s,
        x_l,
        y_l,
        x_f,
        y_f,
        heralded: heralded_label(x_l, y_l, d).expect("binned outcomes are in range"),
        measured_shift: (
            centered(x_l as i64 - x_true as i64),
            centered(y_l as i64 - y_true as i64),
        ),
        true_shift: (
            centered((q / s + 0.5).floor() as i64),
            centered((p / s + 0.5).floor() as i64),
        ),
    }
}

fn shard_len(config: &SwapTrialConfig, shard: u64) -> u64 {
    (config.n_trials - shard * SHARD_SIZE).min(SHARD_SIZE)
}

/// Every outcome, in stream order. Identical to the trials counted by
/// [`run_swap_trials`].
pub fn swap_outcomes(config: &SwapTrialConfig) -> Result<Vec<SwapOutcome>> {
    config.validate()?;
    let mut out = Vec::with_capacity(config.n_trials as usize);
    for shard in 0..config.shards() {
        let mut rng = stream_rng(config.seed, shard);
        for _ in 0..shard_len(config, shard) {
            out.push(trial(config, &mut rng));
        }
    }
    Ok(out)
}

/// Integer shift histograms of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapHistogram {
    pub d: usize,
    pub n_trials: u64,
    /// Joint counts of `(k1, k2)` measured shifts.
    pub joint: BTreeMap<(i64, i64), u64>,
    /// Marginal counts indexed by `k − k_lo` over the centered range.
    pub marginal_q: Vec<u64>,
    pub marginal_p: Vec<u64>,
    /// Trials whose measured and true shifts disagree (bin-edge rounding).
    pub shift_mismatches: u64,
}

impl SwapHistogram {
    fn empty(d: usize) -> Self {
        Self {
            d,
            n_trials: 0,
            joint: BTreeMap::new(),
            marginal_q: vec![0; d],
            marginal_p: vec![0; d],
            shift_mismatches: 0,
        }
    }

    fn merge(&mut self, other: &SwapHistogram) {
        self.n_trials += other.n_trials;
        for (k, c) in &other.joint {
            *self.joint.entry(*k).or_default() += c;
        }
        for (a, b) in self.marginal_q.iter_mut().zip(&other.marginal_q) {
            *a += b;
        }
        for (a, b) in self.marginal_p.iter_mut().zip(&other.marginal_p) {
            *a += b;
        }
        self.shift_mismatches += other.shift_mismatches;
    }
}

/// Run the trials, sharded over independent streams and merged exactly.
pub fn run_swap_trials(config: &SwapTrialConfig, exec: Execution) -> Result<SwapHistogram> {
    config.validate()?;
    let d = config.code.d();
    let (lo, _) = config.code.shift_range();
    let parts = map_range(config.shards() as usize, exec, |shard| {
        let mut h = SwapHistogram::empty(d);
        let mut rng = stream_rng(config.seed, shard as u64);
        for _ in 0..shard_len(config, shard as u64) {
            let o = trial(config, &mut rng);
            h.n_trials += 1;
            *h.joint.entry(o.measured_shift).or_default() += 1;
            h.marginal_q[(o.measured_shift.0 - lo) as usize] += 1;
            h.marginal_p[(o.measured_shift.1 - lo) as usize] += 1;
            if o.measured_shift != o.true_shift {
                h.shift_mismatches += 1;
            }
        }
        h
    });
    let mut total = SwapHistogram::empty(d);
    for part in &parts {
        total.merge(part);
    }
    Ok(total)
}

/// Binomial z-score of `count` successes in `n` trials against probability
/// `p`. A degenerate `p ∈ {0, 1}` gives 0 on an exact match and `∞` otherwise.
pub fn z_score(count: u64, n: u64, p: f64) -> f64 {
    let n_f = n as f64;
    let expected = n_f * p;
    let var = n_f * p * (1.0 - p);
    if var <= 0.0 {
        return if (count as f64 - expected).abs() < 0.5 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    (count as f64 - expected) / var.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Quadrature {
    Q,
    P,
}

impl Quadrature {
    pub fn short_name(self) -> &'static str {
        match self {
            Quadrature::Q => "q",
            Quadrature::P => "p",
        }
    }
}

/// Empirical vs analytic probability of one shift index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftComparison {
    pub quadrature: Quadrature,
    pub k: i64,
    pub count: u64,
    pub empirical: f64,
    pub analytic: f64,
    pub z: f64,
}

/// Marginal comparison rows, `q` first, each in ascending `k`.
pub fn compare_marginals(
    config: &SwapTrialConfig,
    hist: &SwapHistogram,
) -> Result<Vec<ShiftComparison>> {
    let analytic = shift_distribution(
        &SqueezedGkp::new(config.code, config.sigma2_eff())?,
        DEFAULT_J_MAX,
    );
    let n = hist.n_trials;
    let mut rows = Vec::with_capacity(2 * hist.d);
    for (quad, counts) in [
        (Quadrature::Q, &hist.marginal_q),
        (Quadrature::P, &hist.marginal_p),
    ] {
        for ((k, p), &count) in analytic.iter().zip(counts.iter()) {
            rows.push(ShiftComparison {
                quadrature: quad,
                k,
                count,
                empirical: count as f64 / n as f64,
                analytic: p,
                z: z_score(count, n, p),
            });
        }
    }
    Ok(rows)
}

/// Total-variation distance between each empirical marginal and the
/// analytic distribution, `(q, p)`.
pub fn marginal_tv(config: &SwapTrialConfig, hist: &SwapHistogram) -> Result<(f64, f64)> {
    let rows = compare_marginals(config, hist)?;
    let tv = |quad| {
        0.5 * rows
            .iter()
            .filter(|r| r.quadrature == quad)
            .map(|r| (r.empirical - r.analytic).abs())
            .sum::<f64>()
    };
    Ok((tv(Quadrature::Q), tv(Quadrature::P)))
}

/// Total-variation distance between the empirical joint histogram and the
/// product of its own marginals.
pub fn independence_tv(hist: &SwapHistogram) -> f64 {
    let n = hist.n_trials as f64;
    let lo = 1 - (hist.d / 2) as i64;
    let mut tv = 0.0;
    for (i, &cq) in hist.marginal_q.iter().enumerate() {
        for (j, &cp) in hist.marginal_p.iter().enumerate() {
            let key = (lo + i as i64, lo + j as i64);
            let joint = hist.joint.get(&key).copied().unwrap_or(0) as f64 / n;
            tv += (joint - (cq as f64 / n) * (cp as f64 / n)).abs();
        }
    }
    0.5 * tv
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// CDF on `[−½, ½)` of a zero-mean Gaussian of `variance` wrapped onto the
/// unit circle.
pub fn wrapped_gaussian_cdf(x: f64, variance: f64) -> f64 {
    if variance == 0.0 {
        return if x >= 0.0 { 1.0 } else { 0.0 };
    }
    let sd = variance.sqrt();
    let terms = (8.0 * sd).ceil() as i64 + 1;
    (-terms..=terms)
        .map(|j| normal_cdf((x + j as f64) / sd) - normal_cdf((j as f64 - 0.5) / sd))
        .sum()
}

/// Kolmogorov–Smirnov statistic of `samples` against a wrapped Gaussian.
pub fn ks_wrapped_gaussian(samples: &[f64], variance: f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = wrapped_gaussian_cdf(x, variance);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}
