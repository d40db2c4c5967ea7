//! Atom–cavity input–output coefficients, discretised pulse spectra and the
//! loss-mode overlaps that dephase the memory register.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};

/// Which form of the reflection coefficient to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FormulaVariant {
    /// `r = 1 − 2ζ/D`: conserves photon number and gives `r → −1` for a bare
    /// resonant cavity and `r → +1` for `C → ∞`.
    #[default]
    RealNumerator,
    /// `r = 1 − 2iζ/D`, kept for comparison only.
    ImaginaryNumerator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// `C = 4g²/(κγ_m)`; may be `+∞`.
    pub cooperativity: f64,
    /// `ζ = κ_c/κ`.
    pub zeta: f64,
    /// Total cavity linewidth (rad/s).
    pub kappa: f64,
    /// Atomic decay rate (rad/s).
    pub gamma_m: f64,
    /// Carrier detuning from the cavity (rad/s).
    pub delta_c: f64,
    /// Carrier detuning from the atomic transition (rad/s).
    pub delta_a: f64,
}

impl CavityParams {
    pub fn new(cooperativity: f64, zeta: f64, kappa: f64, gamma_m: f64) -> Result<Self> {
        let p = Self {
            cooperativity,
            zeta,
            kappa,
            gamma_m,
            delta_c: 0.0,
            delta_a: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_detunings(mut self, delta_c: f64, delta_a: f64) -> Result<Self> {
        self.delta_c = delta_c;
        self.delta_a = delta_a;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cooperativity >= 0.0) {
            return invalid(
                "cooperativity",
                format!("must be ≥ 0, got {}", self.cooperativity),
            );
        }
        if !(0.0..=1.0).contains(&self.zeta) {
            return invalid("zeta", format!("must lie in [0, 1], got {}", self.zeta));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return invalid(
                "kappa",
                format!("must be finite and > 0, got {}", self.kappa),
            );
        }
        if !(self.gamma_m > 0.0 && self.gamma_m.is_finite()) {
            return invalid(
                "gamma_m",
                format!("must be finite and > 0, got {}", self.gamma_m),
            );
        }
        if !self.delta_c.is_finite() || !self.delta_a.is_finite() {
            return invalid("detuning", "detunings must be finite");
        }
        Ok(())
    }
}

/// Reflection, cavity-loss and atomic-loss amplitudes at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorCoefficients {
    pub r: C64,
    pub l_c: C64,
    pub l_a: C64,
}

impl MirrorCoefficients {
    /// `|r|² + |l_C|² + |l_A|²`.
    pub fn total_power(&self) -> f64 {
        self.r.norm_sqr() + self.l_c.norm_sqr() + self.l_a.norm_sqr()
    }
}

/// Coefficients at the carrier. `coupled = false` is the memory in `|0⟩`
/// (transition uncoupled, `C = 0`); `coupled = true` uses the given `C`.
pub fn reflection_coeffs(params: &CavityParams, coupled: bool) -> MirrorCoefficients {
    reflection_coeffs_at(params, 0.0, coupled, FormulaVariant::default())
}

/// Coefficients at frequency offset `omega` from the carrier.
pub fn reflection_coeffs_at(
    params: &CavityParams,
    omega: f64,
    coupled: bool,
    variant: FormulaVariant,
) -> MirrorCoefficients {
    let i = C64::i();
    let one = C64::new(1.0, 0.0);
    let zeta = params.zeta;
    let c = if coupled { params.cooperativity } else { 0.0 };
    let numerator = match variant {
        FormulaVariant::RealNumerator => C64::new(2.0 * zeta, 0.0),
        FormulaVariant::ImaginaryNumerator => C64::new(0.0, 2.0 * zeta),
    };
    if c.is_infinite() {
        return MirrorCoefficients {
            r: one,
            l_c: C64::new(0.0, 0.0),
            l_a: C64::new(0.0, 0.0),
        };
    }
    let atom = one - i * (2.0 * (params.delta_a + omega) / params.gamma_m);
    let denom = one - i * (2.0 * (params.delta_c + omega) / params.kappa) + c / atom;
    let r = one - numerator / denom;
    let l_c = -2.0 * (zeta * (1.0 - zeta)).sqrt() / denom;
    let l_a = if c == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        (-2.0 * i * (zeta * c).sqrt() / atom) / denom
    };
    MirrorCoefficients { r, l_c, l_a }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseShape {
    /// `|f(ω)|²` Gaussian with standard deviation `1/τ`.
    Gaussian,
    /// `|f(ω)|²` flat on `|ω| ≤ π/τ`.
    FlatTop,
}

/// Default number of frequency samples per pulse.
pub const DEFAULT_SAMPLES: usize = 2048;
/// Grid half-width in units of the pulse bandwidth.
pub const GRID_SPAN_BANDWIDTHS: f64 = 6.0;

/// A coherent pulse `|α⟩` in spectral mode `f(ω)`, sampled on a uniform grid
/// of frequency offsets from the carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    pub omegas: Vec<f64>,
    pub amplitudes: Vec<C64>,
    pub d_omega: f64,
    pub tau: f64,
    pub alpha: C64,
}

impl PulseSpec {
    pub fn from_shape(shape: PulseShape, tau: f64, alpha: C64, samples: usize) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return invalid(
                "tau",
                format!("pulse duration must be finite and > 0, got {tau}"),
            );
        }
        if samples < 16 {
            return invalid(
                "samples",
                format!("need at least 16 frequency samples, got {samples}"),
            );
        }
        let bandwidth = match shape {
            PulseShape::Gaussian => 1.0 / tau,
            PulseShape::FlatTop => PI / tau,
        };
        let half = GRID_SPAN_BANDWIDTHS * bandwidth;
        let d_omega = 2.0 * half / samples as f64;
        let omegas: Vec<f64> = (0..samples)
            .map(|k| -half + (k as f64 + 0.5) * d_omega)
            .collect();
        let amplitudes = omegas
            .iter()
            .map(|&w| {
                let a = match shape {
                    PulseShape::Gaussian => (-0.25 * (w / bandwidth).powi(2)).exp(),
                    PulseShape::FlatTop => {
                        if w.abs() <= bandwidth {
                            1.0
                        } else {
                            0.0
                        }
                    }
                };
                C64::new(a, 0.0)
            })
            .collect();
        let mut pulse = Self {
            omegas,
            amplitudes,
            d_omega,
            tau,
            alpha,
        };
        pulse.normalize();
        Ok(pulse)
    }

    /// Single-frequency pulse at the carrier, the long-pulse limit.
    pub fn monochromatic(tau: f64, alpha: C64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return invalid(
                "tau",
                format!("pulse duration must be finite and > 0, got {tau}"),
            );
        }
        Ok(Self {
            omegas: vec![0.0],
            amplitudes: vec![C64::new(1.0, 0.0)],
            d_omega: 1.0,
            tau,
            alpha,
        })
    }

    /// Parse a whitespace-separated table of `ω  re,im` rows (a bare real
    /// amplitude is also accepted). Lines starting with `#` are skipped. The
    /// grid must be uniform and the shape normalised within 1e-9.
    pub fn from_table(text: &str, tau: f64, alpha: C64) -> Result<Self> {
        let mut omegas = Vec::new();
        let mut amplitudes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| Error::PulseTable(format!("line {}: {what}", lineno + 1));
            let mut cols = line.split_whitespace();
            let w: f64 = cols
                .next()
                .ok_or_else(|| bad("missing frequency"))?
                .parse()
                .map_err(|_| bad("frequency is not a number"))?;
            let amp = cols.next().ok_or_else(|| bad("missing amplitude"))?;
            if cols.next().is_some() {
                return Err(bad("expected two columns"));
            }
            let z = match amp.split_once(',') {
                Some((re, im)) => C64::new(
                    re.trim().parse().map_err(|_| bad("bad real part"))?,
                    im.trim().parse().map_err(|_| bad("bad imaginary part"))?,
                ),
                None => C64::new(amp.parse().map_err(|_| bad("bad amplitude"))?, 0.0),
            };
            if !w.is_finite() || !z.re.is_finite() || !z.im.is_finite() {
                return Err(bad("non-finite value"));
            }
            omegas.push(w);
            amplitudes.push(z);
        }
        if omegas.len() < 2 {
            return Err(Error::PulseTable("need at least two rows".into()));
        }
        let d_omega = omegas[1] - omegas[0];
        if !(d_omega > 0.0) {
            return Err(Error::PulseTable("frequencies must increase".into()));
        }
        for pair in omegas.windows(2) {
            if ((pair[1] - pair[0]) - d_omega).abs() > 1e-9 * d_omega.max(1.0) {
                return Err(Error::PulseTable("frequency grid is not uniform".into()));
            }
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return invalid(
                "tau",
                format!("pulse duration must be finite and > 0, got {tau}"),
            );
        }
        let pulse = Self {
            omegas,
            amplitudes,
            d_omega,
            tau,
            alpha,
        };
        let norm = pulse.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::PulseTable(format!(
                "Σ|f|²dω = {norm}, expected 1 within 1e-9"
            )));
        }
        Ok(pulse)
    }

    /// `Σ |f(ω)|² dω`.
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.d_omega
    }

    pub fn normalize(&mut self) {
        let scale = self.norm().sqrt();
        if scale > 0.0 {
            for z in &mut self.amplitudes {
                *z /= scale;
            }
        }
    }

    pub fn with_alpha(mut self, alpha: C64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Coherent amplitude carried by each frequency bin: `α f(ω) √dω`.
    pub fn bin_amplitudes(&self) -> impl Iterator<Item = (f64, C64)> + '_ {
        let root = self.d_omega.sqrt();
        self.omegas
            .iter()
            .zip(&self.amplitudes)
            .map(move |(&w, &f)| (w, self.alpha * f * root))
    }

    /// Spectral average `⟨f| x |f⟩ = Σ |f|² x(ω) dω` of a frequency response.
    pub fn spectral_average(&self, response: impl Fn(f64) -> C64) -> C64 {
        self.omegas
            .iter()
            .zip(&self.amplitudes)
            .map(|(&w, f)| response(w) * f.norm_sqr())
            .sum::<C64>()
            * self.d_omega
    }
}

/// `⟨β|γ⟩` for coherent states.
pub fn coherent_overlap(beta: C64, gamma: C64) -> C64 {
    (-0.5 * beta.norm_sqr() - 0.5 * gamma.norm_sqr() + beta.conj() * gamma).exp()
}

/// Loss-mode overlaps `λ_j(b, b')` for one memory and its pulse, with the
/// memory in state `b` on the bra side and `b'` on the ket side.
pub fn pair_overlaps(params: &CavityParams, pulse: &PulseSpec) -> [[C64; 2]; 2] {
    // log of the product over frequency bins
    let mut log = [[C64::new(0.0, 0.0); 2]; 2];
    let variant = FormulaVariant::default();
    for (w, amp) in pulse.bin_amplitudes() {
        let coeffs = [
            reflection_coeffs_at(params, w, false, variant),
            reflection_coeffs_at(params, w, true, variant),
        ];
        for b in 0..2 {
            for bp in 0..2 {
                if b == bp {
                    continue;
                }
                for (x, y) in [
                    (coeffs[b].l_c, coeffs[bp].l_c),
                    (coeffs[b].l_a, coeffs[bp].l_a),
                ] {
                    let beta = x * amp;
                    let gamma = y * amp;
                    log[b][bp] +=
                        -0.5 * beta.norm_sqr() - 0.5 * gamma.norm_sqr() + beta.conj() * gamma;
                }
            }
        }
    }
    let mut out = [[C64::new(1.0, 0.0); 2]; 2];
    out[0][1] = log[0][1].exp();
    out[1][0] = log[1][0].exp();
    out
}

/// Bit of memory `j` (1-based) in register state `m`: memory 1 is the most
/// significant of the `n` bits.
#[inline]
pub fn memory_bit(m: usize, j: usize, n: usize) -> usize {
    (m >> (n - j)) & 1
}

/// One-pass dephasing factor `λ_{m,m'}`: the product over memories and
/// frequency bins of the overlaps of the cavity- and atom-loss coherent
/// states. Exactly 1 when `m = m'`.
pub fn dephasing_lambda(
    params: &CavityParams,
    pulses: &[PulseSpec],
    m: usize,
    m_prime: usize,
) -> Result<C64> {
    let tables: Vec<_> = pulses.iter().map(|p| pair_overlaps(params, p)).collect();
    lambda_from_tables(&tables, m, m_prime)
}

pub(crate) fn lambda_from_tables(
    tables: &[[[C64; 2]; 2]],
    m: usize,
    m_prime: usize,
) -> Result<C64> {
    let n = tables.len();
    if n == 0 || n > 30 {
        return invalid("pulses", format!("need between 1 and 30 pulses, got {n}"));
    }
    let d = 1usize << n;
    for idx in [m, m_prime] {
        if idx >= d {
            return Err(Error::IndexOutOfRange { index: idx, d });
        }
    }
    if m == m_prime {
        return Ok(C64::new(1.0, 0.0));
    }
    let mut acc = C64::new(1.0, 0.0);
    for (j, table) in tables.iter().enumerate() {
        let b = memory_bit(m, j + 1, n);
        let bp = memory_bit(m_prime, j + 1, n);
        acc *= table[b][bp];
    }
    Ok(acc)
}

/// Result of comparing the pulse duration to the photon-rate threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseLengthCheck {
    /// `margin · πd / (16 κ (1 − ζ))`; infinite when `ζ = 1`.
    pub threshold: f64,
    pub passed: bool,
}

/// Require `τ ≥ margin · πd/(16κ(1−ζ))` so that less than one photon on
/// average interacts per cavity lifetime.
pub fn pulse_length_check(
    d: usize,
    kappa: f64,
    zeta: f64,
    tau: f64,
    margin: f64,
) -> Result<PulseLengthCheck> {
    if !(margin >= 1.0) {
        return invalid("margin", format!("must be ≥ 1, got {margin}"));
    }
    if !(kappa > 0.0) {
        return invalid("kappa", format!("must be > 0, got {kappa}"));
    }
    if !(0.0..=1.0).contains(&zeta) {
        return invalid("zeta", format!("must lie in [0, 1], got {zeta}"));
    }
    if !(tau > 0.0) {
        return invalid("tau", format!("must be > 0, got {tau}"));
    }
    let threshold = if zeta == 1.0 {
        f64::INFINITY
    } else {
        margin * PI * d as f64 / (16.0 * kappa * (1.0 - zeta))
    };
    Ok(PulseLengthCheck {
        threshold,
        passed: tau >= threshold,
    })
}
