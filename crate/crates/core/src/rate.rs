//! Link rates from the twirled shift-error model: hashing bound, capacity
//! benchmarks, parameter sweeps and the low-loss asymptote.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::channel::{loss_db_to_transmissivity, transform_variance, AmpMode};
use crate::error::{invalid, Error, Result};
use crate::exec::{map_slice, Execution};
use crate::gkp::{
    shift_distribution, squeezing_db_to_variance, GkpCode, Lattice, ShiftDistribution, SqueezedGkp,
    DEFAULT_J_MAX,
};

/// Largest dimension for which the joint `d×d` shift matrix is stored.
pub const MAX_MATERIALIZED_D: usize = 64;

/// Heralded Bell pair after twirling: a classical distribution over joint
/// `(X^{k1}, Z^{k2})` shift errors, the product of two identical marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct TwirledBellState {
    pub code: GkpCode,
    pub marginal: ShiftDistribution,
    matrix: Option<Array2<f64>>,
}

impl TwirledBellState {
    pub fn d(&self) -> usize {
        self.code.d()
    }

    /// `P(k1, k2)` for centered shift indices.
    pub fn prob(&self, k1: i64, k2: i64) -> f64 {
        self.marginal.prob(k1) * self.marginal.prob(k2)
    }

    /// The joint matrix indexed by residues, when `d ≤ 64`.
    pub fn matrix(&self) -> Option<&Array2<f64>> {
        self.matrix.as_ref()
    }

    pub fn total(&self) -> f64 {
        let t = self.marginal.total();
        t * t
    }
}

pub fn twirled_bell(code: GkpCode, sigma2_eff: f64, j_max: usize) -> Result<TwirledBellState> {
    let marginal = shift_distribution(&SqueezedGkp::new(code, sigma2_eff)?, j_max);
    let matrix = (code.d() <= MAX_MATERIALIZED_D).then(|| {
        let p = marginal.by_residue();
        Array2::from_shape_fn((code.d(), code.d()), |(i, j)| p[i] * p[j])
    });
    Ok(TwirledBellState {
        code,
        marginal,
        matrix,
    })
}

/// `max(0, log₂d + Σ P log₂P)`, using the product structure.
pub fn hashing_rate(state: &TwirledBellState) -> f64 {
    let n = state.code.n_qubits() as f64;
    (n + 2.0 * state.marginal.neg_entropy_bits()).max(0.0)
}

/// Hashing rate of an arbitrary joint shift distribution given as a `d×d`
/// matrix of probabilities.
pub fn hashing_rate_joint(p: &Array2<f64>) -> Result<f64> {
    let (rows, cols) = p.dim();
    if rows != cols || rows < 2 {
        return invalid(
            "p",
            format!("expected a square matrix with d ≥ 2, got {rows}×{cols}"),
        );
    }
    if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return invalid("p", "entries must lie in [0, 1]");
    }
    let total: f64 = p.sum();
    if (total - 1.0).abs() > 1e-9 {
        return invalid("p", format!("entries sum to {total}, expected 1"));
    }
    let neg: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum();
    Ok(((rows as f64).log2() + neg).max(0.0))
}

/// Pure-loss two-way capacity `−log₂(1−η)`; `+∞` at `η = 1`.
pub fn capacity(eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return invalid(
            "eta",
            format!("transmissivity must lie in [0, 1], got {eta}"),
        );
    }
    if eta == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-(-eta).ln_1p() / std::f64::consts::LN_2)
}

/// Repeaterless bound of one arm, `Q₂(√η)`.
pub fn repeaterless_bound(eta_arm: f64) -> Result<f64> {
    capacity(eta_arm)
}

/// How the two arms' displacement noise enters the heralded pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Combine {
    /// One transformed arm variance.
    SingleArm,
    /// Both arms' variances add.
    #[default]
    SumArms,
}

impl Combine {
    pub const ALL: [Combine; 2] = [Combine::SingleArm, Combine::SumArms];

    pub fn short_name(self) -> &'static str {
        match self {
            Combine::SingleArm => "single",
            Combine::SumArms => "sum",
        }
    }

    pub fn arms(self) -> f64 {
        match self {
            Combine::SingleArm => 1.0,
            Combine::SumArms => 2.0,
        }
    }
}

impl fmt::Display for Combine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Combine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "single" | "single-arm" => Ok(Combine::SingleArm),
            "sum" | "sum-arms" => Ok(Combine::SumArms),
            other => invalid(
                "combine",
                format!("unknown combine mode `{other}` (expected single or sum)"),
            ),
        }
    }
}

/// Effective shift variance of the heralded pair.
pub fn effective_variance(
    sigma2_peak: f64,
    eta_arm: f64,
    amp: AmpMode,
    combine: Combine,
) -> Result<f64> {
    Ok(combine.arms() * transform_variance(sigma2_peak, eta_arm, amp)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub n: u32,
    pub d: usize,
    pub lattice: Lattice,
    pub amp_mode: AmpMode,
    pub combine: Combine,
    pub half_loss_db: f64,
    pub eta_arm: f64,
    /// `+∞` for ideal states.
    pub squeezing_db: f64,
    pub sigma2_eff: f64,
    /// Ebits per channel use.
    pub rate: f64,
    /// `Q₂(√η)`.
    pub q2: f64,
    /// `C(η)` of the full link.
    pub capacity_c: f64,
}

/// Rate at half-channel loss `half_loss_db` and peak squeezing
/// `squeezing_db` (`+∞` for ideal GKP states).
pub fn link_rate(
    n: u32,
    lattice: Lattice,
    half_loss_db: f64,
    squeezing_db: f64,
    amp_mode: AmpMode,
    combine: Combine,
) -> Result<RatePoint> {
    if !(half_loss_db >= 0.0) {
        return invalid("half_loss_db", format!("must be ≥ 0, got {half_loss_db}"));
    }
    let eta_arm = loss_db_to_transmissivity(half_loss_db)?;
    let mut point = link_rate_eta(
        GkpCode::new(lattice, n)?,
        eta_arm,
        squeezing_db_to_variance(squeezing_db)?,
        amp_mode,
        combine,
    )?;
    point.half_loss_db = half_loss_db;
    point.squeezing_db = squeezing_db;
    Ok(point)
}

/// Rate for a per-arm transmissivity and peak variance.
pub fn link_rate_eta(
    code: GkpCode,
    eta_arm: f64,
    sigma2_peak: f64,
    amp_mode: AmpMode,
    combine: Combine,
) -> Result<RatePoint> {
    let sigma2_eff = effective_variance(sigma2_peak, eta_arm, amp_mode, combine)?;
    let state = twirled_bell(code, sigma2_eff, DEFAULT_J_MAX)?;
    let half_loss_db = if eta_arm == 1.0 {
        0.0
    } else {
        -10.0 * eta_arm.log10()
    };
    let squeezing_db = if sigma2_peak == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * (2.0 * sigma2_peak).log10()
    };
    Ok(RatePoint {
        n: code.n_qubits(),
        d: code.d(),
        lattice: code.lattice,
        amp_mode,
        combine,
        half_loss_db,
        eta_arm,
        squeezing_db,
        sigma2_eff,
        rate: hashing_rate(&state),
        q2: repeaterless_bound(eta_arm)?,
        capacity_c: capacity(eta_arm * eta_arm)?,
    })
}

/// Cartesian sweep specification.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub lattices: Vec<Lattice>,
    pub amps: Vec<AmpMode>,
    pub combine: Combine,
    pub ns: Vec<u32>,
    pub squeezing_db: Vec<f64>,
    pub half_loss_db: Vec<f64>,
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.lattices.len()
            * self.amps.len()
            * self.ns.len()
            * self.squeezing_db.len()
            * self.half_loss_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in canonical order: lattice, amp, N, squeezing, loss.
    pub fn points(&self) -> Vec<(Lattice, AmpMode, u32, f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for &lattice in &self.lattices {
            for &amp in &self.amps {
                for &n in &self.ns {
                    for &s in &self.squeezing_db {
                        for &l in &self.half_loss_db {
                            out.push((lattice, amp, n, s, l));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Evaluate every grid point; output order is canonical for any `exec`.
pub fn sweep(grid: &SweepGrid, exec: Execution) -> Result<Vec<RatePoint>> {
    if grid.is_empty() {
        return invalid("grid", "sweep grid is empty");
    }
    let points = grid.points();
    map_slice(&points, exec, |&(lattice, amp, n, s, l)| {
        link_rate(n, lattice, l, s, amp, grid.combine)
    })
    .into_iter()
    .collect()
}

/// Ansatz constant `c` in `ξ = c·d·σ²`: 2 for square, `√3` for hexagonal.
pub fn ansatz_constant(lattice: Lattice) -> f64 {
    match lattice {
        Lattice::Square => 2.0,
        Lattice::Hexagonal => 3f64.sqrt(),
    }
}

/// Leading-order shift probabilities `(p0, p1)` at ansatz parameter `ξ`;
/// `p1` is the weight of each of the two unit shifts.
pub fn asymptotic_probs(xi: f64, lattice: Lattice) -> Result<(f64, f64)> {
    if !(xi > 0.0) || !xi.is_finite() {
        return invalid("xi", format!("must be finite and > 0, got {xi}"));
    }
    // same form for both lattices in their own ansatz variable
    let _ = lattice;
    let t = xi.sqrt() * (-PI / xi).exp() / PI;
    Ok((1.0 - t, 0.5 * t))
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Entropy (bits) of the three-outcome asymptotic shift distribution.
fn asymptotic_entropy(xi: f64, lattice: Lattice) -> Result<f64> {
    let (p0, p1) = asymptotic_probs(xi, lattice)?;
    if p0 < 0.0 {
        return invalid(
            "xi",
            format!("p0 < 0 at ξ = {xi}; the leading-order model is invalid"),
        );
    }
    Ok(-(plogp(p0) + 2.0 * plogp(p1)))
}

/// Effective dimension multiplier: CC amplification halves the arm variance
/// at low loss, doubling the dimension reached at the same ξ.
fn amp_factor(amp: AmpMode) -> f64 {
    match amp {
        AmpMode::PreAmplify => 1.0,
        AmpMode::CcAmplify => 2.0,
    }
}

/// Ansatz dimension `d = ξ/(c ε)` (`2ξ/(c ε)` for CC amplification).
pub fn ansatz_dimension(eps: f64, xi: f64, lattice: Lattice, amp: AmpMode) -> f64 {
    amp_factor(amp) * xi / (ansatz_constant(lattice) * eps)
}

/// Continuous-dimension lower bound `I_LB(ε) = log₂d + 2Σp log₂p` with
/// `d = ξ/(c ε)` (`2ξ/(c ε)` for CC amplification), for `ε = 1 − √η`.
pub fn asymptotic_rate(eps: f64, xi: f64, lattice: Lattice, amp: AmpMode) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return invalid("eps", format!("must lie in (0, 1), got {eps}"));
    }
    Ok(ansatz_dimension(eps, xi, lattice, amp).log2() - 2.0 * asymptotic_entropy(xi, lattice)?)
}

/// Limiting `Q₂(√η) − I_LB` as `ε → 0`; independent of `ε`.
pub fn asymptotic_gap(xi: f64, lattice: Lattice, amp: AmpMode) -> Result<f64> {
    let h = asymptotic_entropy(xi, lattice)?;
    Ok((ansatz_constant(lattice) / amp_factor(amp)).log2() - xi.log2() + 2.0 * h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoteResult {
    pub lattice: Lattice,
    pub amp_mode: AmpMode,
    pub xi_opt: f64,
    pub gap: f64,
}

/// Search bracket for ξ.
pub const XI_BRACKET: (f64, f64) = (0.1, 8.0);
const XI_TOL: f64 = 1e-6;

/// Minimise the asymptotic gap for pre-amplification.
pub fn optimize_xi(lattice: Lattice) -> Result<AsymptoteResult> {
    optimize_xi_with(lattice, AmpMode::PreAmplify)
}

/// Coarse log-spaced scan to bracket the minimum, then golden-section search
/// to `1e-6` in ξ.
pub fn optimize_xi_with(lattice: Lattice, amp: AmpMode) -> Result<AsymptoteResult> {
    let f = |xi: f64| asymptotic_gap(xi, lattice, amp);
    let (lo, hi) = XI_BRACKET;
    let samples = 128;
    let grid: Vec<f64> = (0..samples)
        .map(|i| lo * (hi / lo).powf(i as f64 / (samples - 1) as f64))
        .collect();
    let values = grid.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    if best == 0 || best == samples - 1 {
        return Err(Error::NoConvergence(format!(
            "gap minimum at bracket edge ξ = {}",
            grid[best]
        )));
    }
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut iterations = 0;
    while (b - a) > XI_TOL {
        iterations += 1;
        if iterations > 200 {
            return Err(Error::NoConvergence(format!(
                "golden section stalled on [{a}, {b}]"
            )));
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let xi_opt = 0.5 * (a + b);
    Ok(AsymptoteResult {
        lattice,
        amp_mode: amp,
        xi_opt,
        gap: f(xi_opt)?,
    })
}

/// Power-of-two dimension nearest (in log) to `target`, as a qubit count.
pub fn nearest_power_of_two(target: f64) -> Result<u32> {
    if !(target >= 1.0) || !target.is_finite() {
        return invalid(
            "target",
            format!("dimension target must be ≥ 1, got {target}"),
        );
    }
    let n = target.log2().round().max(1.0);
    if n > GkpCode::MAX_QUBITS as f64 {
        return invalid(
            "target",
            format!(
                "dimension target {target} exceeds 2^{}",
                GkpCode::MAX_QUBITS
            ),
        );
    }
    Ok(n as u32)
}
