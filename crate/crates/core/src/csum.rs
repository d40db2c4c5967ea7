//! Memory-register → GKP qudit CSUM/CPHASE gate driven by cavity-reflected
//! coherent pulses, tracked in the `(g, β)` representation.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::cavity::{
    memory_bit, pair_overlaps, reflection_coeffs_at, CavityParams, FormulaVariant, PulseSpec,
};
use crate::error::{invalid, Error, Result};
use crate::exec::{map_range, Execution};
use crate::gkp::{GkpCode, Lattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gate {
    #[default]
    Csum,
    Cphase,
}

impl Gate {
    pub const ALL: [Gate; 2] = [Gate::Csum, Gate::Cphase];

    pub fn short_name(self) -> &'static str {
        match self {
            Gate::Csum => "csum",
            Gate::Cphase => "cphase",
        }
    }
}

impl std::fmt::Display for Gate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.short_name())
    }
}

impl std::str::FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csum" => Ok(Gate::Csum),
            "cphase" | "cz" => Ok(Gate::Cphase),
            other => invalid(
                "gate",
                format!("unknown gate {other:?} (expected csum or cphase)"),
            ),
        }
    }
}

/// Phase-space step between neighbouring logical displacements for a
/// lattice/gate pair, as a complex displacement amplitude.
pub fn displacement_unit(lattice: Lattice, gate: Gate, d: usize) -> C64 {
    let d = d as f64;
    match (lattice, gate) {
        (Lattice::Square, Gate::Csum) => C64::new((2.0 * PI / d).sqrt(), 0.0),
        (Lattice::Square, Gate::Cphase) => C64::new(0.0, (2.0 * PI / d).sqrt()),
        (Lattice::Hexagonal, Gate::Csum) => {
            let s = (2.0 * PI / (3f64.sqrt() * d)).sqrt();
            C64::new(3f64.sqrt() / 2.0, -0.5) * s
        }
        (Lattice::Hexagonal, Gate::Cphase) => C64::new(0.0, (2.0 * PI / (3f64.sqrt() * d)).sqrt()),
    }
}

/// Coherent amplitudes and pre-displacement for one gate.
///
/// Pulse `k` (1-based) displaces the qudit by `±entry_k` with
/// `entry_k = α_k√(1−ζ) = unit · 2^{N−k} / 2`. The integer `2^{N−k}` is kept
/// so the telescoping sum over bits can be done exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSchedule {
    pub gate: Gate,
    pub code: GkpCode,
    /// Beamsplitter reflectivity used to inject each pulse.
    pub zeta: f64,
    pub alphas: Vec<C64>,
    pub pre_displacement: C64,
    unit: C64,
    half_units: Vec<u64>,
}

impl GateSchedule {
    pub fn unit(&self) -> C64 {
        self.unit
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    /// `α_k√(1−ζ)` for `k = 1..=N`.
    pub fn entries(&self) -> Vec<C64> {
        self.half_units
            .iter()
            .map(|&h| self.unit * (h as f64 / 2.0))
            .collect()
    }

    /// `S_m = Σ_k (−1)^{m_k+1} α_k√(1−ζ)`, summed in integer half-units.
    pub fn net_displacement(&self, m: usize) -> Result<C64> {
        let d = self.code.d();
        if m >= d {
            return Err(Error::IndexOutOfRange { index: m, d });
        }
        let n = self.n();
        let twice: i64 = self
            .half_units
            .iter()
            .enumerate()
            .map(|(k, &h)| {
                if memory_bit(m, k + 1, n) == 1 {
                    h as i64
                } else {
                    -(h as i64)
                }
            })
            .sum();
        Ok(self.unit * (twice as f64 / 2.0))
    }

    /// `S'_m = S_m + pre-displacement = m · unit`.
    pub fn shifted_displacement(&self, m: usize) -> Result<C64> {
        Ok(self.net_displacement(m)? + self.pre_displacement)
    }
}

/// Build the schedule for `gate` on `code` with beamsplitter reflectivity
/// `zeta ∈ [0, 1)`.
pub fn amplitude_schedule(code: GkpCode, gate: Gate, zeta: f64) -> Result<GateSchedule> {
    if !(0.0..1.0).contains(&zeta) {
        return invalid(
            "zeta",
            format!("beamsplitter reflectivity must lie in [0, 1), got {zeta}"),
        );
    }
    let n = code.n_qubits() as usize;
    let d = code.d();
    let unit = displacement_unit(code.lattice, gate, d);
    let half_units: Vec<u64> = (1..=n).map(|k| 1u64 << (n - k)).collect();
    let scale = 1.0 / (1.0 - zeta).sqrt();
    let alphas = half_units
        .iter()
        .map(|&h| unit * (h as f64 / 2.0) * scale)
        .collect();
    let pre_displacement = unit * ((d - 1) as f64 / 2.0);
    Ok(GateSchedule {
        gate,
        code,
        zeta,
        alphas,
        pre_displacement,
        unit,
        half_units,
    })
}

/// `S_m = (m − (d−1)/2) · unit` for the CSUM gate on `code`.
pub fn net_displacement(m: usize, code: &GkpCode) -> Result<C64> {
    let d = code.d();
    if m >= d {
        return Err(Error::IndexOutOfRange { index: m, d });
    }
    Ok(displacement_unit(code.lattice, Gate::Csum, d) * (m as f64 - (d - 1) as f64 / 2.0))
}

/// Memory relabelling by a Pauli-X on every memory.
pub fn flip_all(m: usize, d: usize) -> usize {
    m ^ (d - 1)
}

/// Memory–GKP state `Σ g_{mm'} |m⟩⟨m'| ⊗ D(β_m) ρ_G D†(β_{m'})` with the
/// `1/d` population factored out, so `g` has unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    pub d: usize,
    pub g: Array2<C64>,
    pub beta: Vec<C64>,
    /// Ideal `S_m` for each memory state, carried for the fidelity.
    pub target: Vec<C64>,
    /// Extra Gaussian displacement-noise variance from the beamsplitters.
    pub extra_noise: f64,
}

impl HybridState {
    /// Memory density matrix in the computational basis (trace one).
    pub fn memory_density(&self) -> Array2<C64> {
        self.g.mapv(|z| z / self.d as f64)
    }

    /// `max |g − g†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for ((i, j), z) in self.g.indexed_iter() {
            worst = worst.max((z - self.g[[j, i]].conj()).norm());
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimulationOptions {
    /// Add `N(1−ζ)` of Gaussian noise for beamsplitter transmission loss.
    pub beamsplitter_noise: bool,
    /// Reflection-coefficient form used for the displacement.
    pub variant: FormulaVariant,
    pub exec: Execution,
}

/// Mode-matched response `⟨f| r^{(b)} f⟩` for the memory in `|b⟩`.
pub fn matched_response(params: &CavityParams, pulse: &PulseSpec, coupled: bool) -> C64 {
    matched_response_with(params, pulse, coupled, FormulaVariant::default())
}

pub fn matched_response_with(
    params: &CavityParams,
    pulse: &PulseSpec,
    coupled: bool,
    variant: FormulaVariant,
) -> C64 {
    pulse.spectral_average(|w| reflection_coeffs_at(params, w, coupled, variant).r)
}

/// Per-memory overlaps `⟨δ_{b'}|δ_b⟩` of the light scattered out of the GKP
/// mode, `δ_b(ω) = entry·(r^{(b)}(ω) − ⟨f|r^{(b)}f⟩) f(ω)√dω`.
fn mismatch_overlaps(
    params: &CavityParams,
    pulse: &PulseSpec,
    entry: C64,
    rho: [C64; 2],
    variant: FormulaVariant,
) -> [[C64; 2]; 2] {
    let root = pulse.d_omega.sqrt();
    let mut log = C64::new(0.0, 0.0);
    for (&w, &f) in pulse.omegas.iter().zip(&pulse.amplitudes) {
        let amp = entry * f * root;
        let r0 = reflection_coeffs_at(params, w, false, variant).r;
        let r1 = reflection_coeffs_at(params, w, true, variant).r;
        let d0 = amp * (r0 - rho[0]);
        let d1 = amp * (r1 - rho[1]);
        log += -0.5 * d0.norm_sqr() - 0.5 * d1.norm_sqr() + d1.conj() * d0;
    }
    let one = C64::new(1.0, 0.0);
    let z = log.exp();
    // [b][b'] = ⟨δ_{b'}|δ_b⟩
    [[one, z.conj()], [z, one]]
}

/// Simulate the gate with the default options.
pub fn simulate_csum(
    schedule: &GateSchedule,
    cavity: &CavityParams,
    pulses: &[PulseSpec],
) -> Result<HybridState> {
    simulate_csum_with(schedule, cavity, pulses, SimulationOptions::default())
}

pub fn simulate_csum_with(
    schedule: &GateSchedule,
    cavity: &CavityParams,
    pulses: &[PulseSpec],
    options: SimulationOptions,
) -> Result<HybridState> {
    cavity.validate()?;
    let n = schedule.n();
    if pulses.len() != n {
        return Err(Error::PulseCount {
            expected: n,
            got: pulses.len(),
        });
    }
    for (k, (p, a)) in pulses.iter().zip(&schedule.alphas).enumerate() {
        if (p.alpha - a).norm() > 1e-9 * a.norm().max(1.0) {
            return invalid(
                "pulses",
                format!(
                    "pulse {} has α = {}, schedule requires {}",
                    k + 1,
                    p.alpha,
                    a
                ),
            );
        }
    }
    let d = schedule.code.d();
    let entries = schedule.entries();

    let mut rho = Vec::with_capacity(n);
    let mut tables = Vec::with_capacity(n);
    for (pulse, &entry) in pulses.iter().zip(&entries) {
        let r = [
            matched_response_with(cavity, pulse, false, options.variant),
            matched_response_with(cavity, pulse, true, options.variant),
        ];
        let lambda = pair_overlaps(cavity, pulse);
        let mismatch = mismatch_overlaps(cavity, pulse, entry, r, options.variant);
        let mut t = [[C64::new(1.0, 0.0); 2]; 2];
        for b in 0..2 {
            for bp in 0..2 {
                t[b][bp] = mismatch[b][bp] * lambda[b][bp].norm_sqr();
            }
        }
        rho.push(r);
        tables.push(t);
    }

    let beta: Vec<C64> = (0..d)
        .map(|m| {
            (0..n)
                .map(|j| entries[j] * rho[j][memory_bit(m, j + 1, n)])
                .sum()
        })
        .collect();
    let target = (0..d)
        .map(|m| schedule.net_displacement(m))
        .collect::<Result<Vec<_>>>()?;

    let rows = map_range(d, options.exec, |m| {
        (0..d)
            .map(|mp| {
                if m == mp {
                    return C64::new(1.0, 0.0);
                }
                let mut acc = C64::new(1.0, 0.0);
                for (j, t) in tables.iter().enumerate() {
                    acc *= t[memory_bit(m, j + 1, n)][memory_bit(mp, j + 1, n)];
                }
                acc
            })
            .collect::<Vec<_>>()
    });
    let g = Array2::from_shape_vec((d, d), rows.into_iter().flatten().collect())
        .expect("row lengths match d");
    let extra_noise = if options.beamsplitter_noise {
        n as f64 * (1.0 - schedule.zeta)
    } else {
        0.0
    };
    Ok(HybridState {
        d,
        g,
        beta,
        target,
        extra_noise,
    })
}

/// Gate fidelity against the ideal maximally entangled memory–GKP state.
///
/// Each memory branch is weighted by `c_m = exp(−|β_m − S_m|²/(8σ²))`, the
/// overlap of two Gaussian peaks of variance `σ²` offset by the displacement
/// error, and `F = (1/d²) Σ_{m,m'} Re(g_{mm'}) c_m c_{m'}`. At `σ² = 0` a
/// branch counts only if its displacement error is below 1e-12.
pub fn csum_fidelity(state: &HybridState, sigma2: f64) -> Result<f64> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return invalid("sigma2", format!("must be finite and ≥ 0, got {sigma2}"));
    }
    let s2 = sigma2 + state.extra_noise;
    let c: Vec<f64> = state
        .beta
        .iter()
        .zip(&state.target)
        .map(|(b, t)| {
            let e2 = (b - t).norm_sqr();
            if s2 == 0.0 {
                if e2.sqrt() <= 1e-12 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-e2 / (8.0 * s2)).exp()
            }
        })
        .collect();
    let d = state.d as f64;
    let mut total = 0.0;
    for ((m, mp), z) in state.g.indexed_iter() {
        total += z.re * c[m] * c[mp];
    }
    Ok((total / (d * d)).clamp(0.0, 1.0))
}
