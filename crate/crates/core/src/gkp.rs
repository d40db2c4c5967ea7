//! GKP qudit lattice geometry, squeezing conversion, logical binning of
//! homodyne outcomes and the analytic shift-error distribution.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Lattice-sum truncation used when the caller does not choose one.
pub const DEFAULT_J_MAX: usize = 20;

/// Bins whose erfc argument exceeds this contribute below f64 resolution
/// (`erfc(27) ≈ 5e-319`).
const ERFC_CUTOFF: f64 = 27.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lattice {
    Square,
    Hexagonal,
}

impl Lattice {
    pub const ALL: [Lattice; 2] = [Lattice::Square, Lattice::Hexagonal];

    pub fn short_name(self) -> &'static str {
        match self {
            Lattice::Square => "sq",
            Lattice::Hexagonal => "hex",
        }
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Lattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sq" | "square" => Ok(Lattice::Square),
            "hex" | "hexagonal" => Ok(Lattice::Hexagonal),
            other => invalid(
                "lattice",
                format!("unknown lattice `{other}` (expected sq or hex)"),
            ),
        }
    }
}

/// A GKP qudit code of dimension `d = 2^N` on a square or hexagonal lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GkpCode {
    pub lattice: Lattice,
    n_qubits: u32,
}

impl GkpCode {
    /// Largest register size: `d = 2^30` keeps every index inside `usize`
    /// and `i64` on all supported targets.
    pub const MAX_QUBITS: u32 = 30;

    pub fn new(lattice: Lattice, n_qubits: u32) -> Result<Self> {
        if n_qubits == 0 || n_qubits > Self::MAX_QUBITS {
            return invalid(
                "n",
                format!(
                    "register size must be in 1..={}, got {n_qubits}",
                    Self::MAX_QUBITS
                ),
            );
        }
        Ok(Self { lattice, n_qubits })
    }

    pub fn from_dimension(lattice: Lattice, d: usize) -> Result<Self> {
        if d < 2 || !d.is_power_of_two() {
            return invalid(
                "d",
                format!("dimension must be a power of two ≥ 2, got {d}"),
            );
        }
        Self::new(lattice, d.trailing_zeros())
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn d(&self) -> usize {
        1usize << self.n_qubits
    }

    /// Distance between neighbouring logical peaks along either logical axis:
    /// `√(2π/d)` (square) or `√(4π/(√3 d))` (hexagonal).
    pub fn spacing(&self) -> f64 {
        let d = self.d() as f64;
        match self.lattice {
            Lattice::Square => (2.0 * PI / d).sqrt(),
            Lattice::Hexagonal => (4.0 * PI / (3f64.sqrt() * d)).sqrt(),
        }
    }

    /// Centered shift-index range `{−⌊d/2⌋+1, …, ⌊d/2⌋}`.
    pub fn shift_range(&self) -> (i64, i64) {
        let half = (self.d() / 2) as i64;
        (1 - half, half)
    }

    /// Map a residue or any integer shift onto the centered range.
    pub fn center_shift(&self, k: i64) -> i64 {
        let d = self.d() as i64;
        let (lo, _) = self.shift_range();
        (k - lo).rem_euclid(d) + lo
    }
}

/// A GKP code whose peaks carry Gaussian displacement noise of variance
/// `sigma2` per quadrature; `sigma2 = 0` is the ideal code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedGkp {
    pub code: GkpCode,
    pub sigma2: f64,
}

impl SqueezedGkp {
    pub fn new(code: GkpCode, sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return invalid(
                "sigma2",
                format!("variance must be finite and ≥ 0, got {sigma2}"),
            );
        }
        Ok(Self { code, sigma2 })
    }

    /// Scale `a` in the bin mass `½[erf(a(n+½)) − erf(a(n−½))]`; equals
    /// `spacing/σ` for both lattices.
    fn erf_scale(&self) -> f64 {
        self.code.spacing() / self.sigma2.sqrt()
    }
}

/// Peak variance for a squeezing level in dB: `σ² = ½·10^(−s/10)`, so 0 dB is
/// vacuum (`1/2` with `q = (a + a†)/√2`). `+∞` maps to 0.
pub fn squeezing_db_to_variance(s_db: f64) -> Result<f64> {
    if s_db.is_nan() || s_db < 0.0 {
        return invalid(
            "squeezing_db",
            format!("squeezing must be ≥ 0 dB or inf, got {s_db}"),
        );
    }
    if s_db == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(0.5 * 10f64.powf(-s_db / 10.0))
}

/// Inverse of [`squeezing_db_to_variance`].
pub fn variance_to_squeezing_db(sigma2: f64) -> Result<f64> {
    if !(sigma2 >= 0.0) {
        return invalid("sigma2", format!("variance must be ≥ 0, got {sigma2}"));
    }
    if sigma2 == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-10.0 * (2.0 * sigma2).log10())
}

/// How real homodyne values are assigned to logical peaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BinningMode {
    /// Nearest peak; remainder in `[−½, ½)`. Consistent with the
    /// half-integer bins of the shift-error model.
    #[default]
    Nearest,
    /// `floor(x/s)`; remainder in `[0, 1)`.
    Floor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicalOutcome {
    pub logical: usize,
    pub fraction: f64,
}

pub fn logical_bin(x: f64, code: &GkpCode) -> Result<LogicalOutcome> {
    logical_bin_with(x, code, BinningMode::Nearest)
}

pub fn logical_bin_with(x: f64, code: &GkpCode, mode: BinningMode) -> Result<LogicalOutcome> {
    if !x.is_finite() {
        return invalid("x", format!("homodyne value must be finite, got {x}"));
    }
    let t = x / code.spacing();
    let whole = match mode {
        BinningMode::Nearest => (t + 0.5).floor(),
        BinningMode::Floor => t.floor(),
    };
    let d = code.d() as f64;
    let logical = whole.rem_euclid(d) as usize;
    Ok(LogicalOutcome {
        logical,
        fraction: t - whole,
    })
}

/// Probability mass of integer bin `n` for a Gaussian whose bin-unit CDF is
/// `½(1 + erf(a·t))`. Tails use erfc so far bins keep full relative precision.
pub(crate) fn bin_mass(a: f64, n: i64) -> f64 {
    if n == 0 {
        return libm::erf(0.5 * a);
    }
    let m = n.unsigned_abs() as f64;
    let lo = a * (m - 0.5);
    if lo > ERFC_CUTOFF {
        return 0.0;
    }
    0.5 * (libm::erfc(lo) - libm::erfc(a * (m + 0.5)))
}

/// Probability of a logical `k`-shift along one quadrature, with the lattice
/// sum truncated to `|j| ≤ j_max`.
pub fn shift_probability(state: &SqueezedGkp, k: i64, j_max: usize) -> Result<f64> {
    let (lo, hi) = state.code.shift_range();
    if k < lo || k > hi {
        return invalid("k", format!("shift index {k} outside [{lo}, {hi}]"));
    }
    if state.sigma2 == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    let a = state.erf_scale();
    let d = state.code.d() as i64;
    let j_max = j_max as i64;
    Ok((-j_max..=j_max).map(|j| bin_mass(a, j * d + k)).sum())
}

/// Per-quadrature shift-error distribution over the centered index range.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftDistribution {
    pub code: GkpCode,
    probs: Vec<f64>,
}

impl ShiftDistribution {
    pub fn point_mass(code: GkpCode) -> Self {
        let (lo, _) = code.shift_range();
        let mut probs = vec![0.0; code.d()];
        probs[(-lo) as usize] = 1.0;
        Self { code, probs }
    }

    pub fn prob(&self, k: i64) -> f64 {
        let (lo, hi) = self.code.shift_range();
        if k < lo || k > hi {
            return 0.0;
        }
        self.probs[(k - lo) as usize]
    }

    /// `(k, P(k))` in ascending `k`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let (lo, _) = self.code.shift_range();
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (lo + i as i64, p))
    }

    /// Probabilities indexed by residue `k mod d`.
    pub fn by_residue(&self) -> Vec<f64> {
        let d = self.code.d() as i64;
        let mut out = vec![0.0; self.code.d()];
        for (k, p) in self.iter() {
            out[k.rem_euclid(d) as usize] = p;
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `Σ_k P(k) log₂ P(k)`, with `0 log 0 = 0`.
    pub fn neg_entropy_bits(&self) -> f64 {
        self.probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum()
    }
}

pub fn shift_distribution(state: &SqueezedGkp, j_max: usize) -> ShiftDistribution {
    let code = state.code;
    if state.sigma2 == 0.0 {
        return ShiftDistribution::point_mass(code);
    }
    let a = state.erf_scale();
    let d = code.d() as i64;
    let (k_lo, k_hi) = code.shift_range();
    let span = j_max as i64 * d;
    // bins beyond the cutoff have zero mass in f64
    let cut = (ERFC_CUTOFF / a + 1.0).ceil().min(i64::MAX as f64 / 4.0) as i64;
    let lo = (k_lo - span).max(-cut);
    let hi = (k_hi + span).min(cut);
    let mut probs = vec![0.0; code.d()];
    for n in lo..=hi {
        let k = code.center_shift(n);
        probs[(k - k_lo) as usize] += bin_mass(a, n);
    }
    ShiftDistribution { code, probs }
}
