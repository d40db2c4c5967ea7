//! Weyl–Heisenberg operators, two-qudit Bell states and the swap-outcome
//! label arithmetic for qudit entanglement swapping.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// `e^{i 2π p / d}` with the exponent reduced mod `d` first.
pub fn root_of_unity(p: usize, d: usize) -> C64 {
    let p = p % d;
    if p == 0 {
        return C64::new(1.0, 0.0);
    }
    C64::from_polar(1.0, 2.0 * PI * p as f64 / d as f64)
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Dimension(d));
    }
    Ok(())
}

fn check_index(index: usize, d: usize) -> Result<()> {
    if index >= d {
        return Err(Error::IndexOutOfRange { index, d });
    }
    Ok(())
}

/// `a ⊕ b` in `Z_d`.
#[inline]
pub fn add_mod(a: usize, b: usize, d: usize) -> usize {
    (a % d + b % d) % d
}

/// `a ⊖ b` in `Z_d`.
#[inline]
pub fn sub_mod(a: usize, b: usize, d: usize) -> usize {
    (a % d + d - b % d) % d
}

/// Dense `W^{(n,m)} = Σ_k e^{i2πkn/d} |k⟩⟨k⊕m|`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylOperator {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub matrix: Array2<C64>,
}

impl WeylOperator {
    pub fn new(d: usize, n: usize, m: usize) -> Result<Self> {
        check_dim(d)?;
        check_index(n, d)?;
        check_index(m, d)?;
        let mut matrix = Array2::zeros((d, d));
        for k in 0..d {
            matrix[[k, add_mod(k, m, d)]] = root_of_unity(k * n, d);
        }
        Ok(Self { d, n, m, matrix })
    }

    pub fn apply(&self, state: &Array1<C64>) -> Array1<C64> {
        self.matrix.dot(state)
    }

    pub fn adjoint(&self) -> Array2<C64> {
        self.matrix.t().mapv(|z| z.conj())
    }

    /// Largest entrywise deviation of `W W†` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.matrix.dot(&self.adjoint());
        prod.indexed_iter()
            .map(|((i, j), z)| {
                let target = if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                (z - target).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Shorthand for [`WeylOperator::new`].
pub fn weyl(d: usize, n: usize, m: usize) -> Result<WeylOperator> {
    WeylOperator::new(d, n, m)
}

/// Computational basis vector `|k⟩` of a `d`-level system.
pub fn basis_state(d: usize, k: usize) -> Result<Array1<C64>> {
    check_dim(d)?;
    check_index(k, d)?;
    let mut v = Array1::zeros(d);
    v[k] = C64::new(1.0, 0.0);
    Ok(v)
}

/// `|Ψ_{k,l}⟩ = d^{-1/2} Σ_{k'} e^{i2πk'l/d} |k'⟩|k'−k⟩`, stored with the
/// first qudit as the major index (`a·d + b`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuditBellState {
    pub d: usize,
    pub k: usize,
    pub l: usize,
    pub amplitudes: Array1<C64>,
}

impl QuditBellState {
    pub fn new(d: usize, k: usize, l: usize) -> Result<Self> {
        check_dim(d)?;
        check_index(k, d)?;
        check_index(l, d)?;
        let norm = 1.0 / (d as f64).sqrt();
        let mut amplitudes = Array1::zeros(d * d);
        for a in 0..d {
            let b = sub_mod(a, k, d);
            amplitudes[a * d + b] = root_of_unity(a * l, d) * norm;
        }
        Ok(Self {
            d,
            k,
            l,
            amplitudes,
        })
    }

    pub fn inner(&self, other: &QuditBellState) -> C64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Apply `A ⊗ B` to the two-qudit amplitudes.
    pub fn apply_local(&self, first: &Array2<C64>, second: &Array2<C64>) -> Array1<C64> {
        let d = self.d;
        let mut out = Array1::zeros(d * d);
        for a in 0..d {
            for b in 0..d {
                let amp = self.amplitudes[a * d + b];
                if amp == C64::new(0.0, 0.0) {
                    continue;
                }
                for a2 in 0..d {
                    let fa = first[[a2, a]];
                    if fa == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for b2 in 0..d {
                        out[a2 * d + b2] += fa * second[[b2, b]] * amp;
                    }
                }
            }
        }
        out
    }
}

pub fn bell_state(d: usize, k: usize, l: usize) -> Result<QuditBellState> {
    QuditBellState::new(d, k, l)
}

/// Label of the state left on the outer pair after a Bell measurement on the
/// inner pair of `|Ψ_{k1,l1}⟩ ⊗ |Ψ_{k2,l2}⟩` returns outcome `(r, s)`:
/// `k' = k1 + k2 − r`, `l' = l1 + l2 − s` (mod d).
///
/// The outcome label `(r, s)` refers to the Bell basis written with the
/// second pair's qudit as the first tensor factor, `|Ψ_{r,s}⟩_{3,2}`.
#[allow(clippy::too_many_arguments)]
pub fn swap_update(
    k1: usize,
    l1: usize,
    k2: usize,
    l2: usize,
    r: usize,
    s: usize,
    d: usize,
) -> Result<(usize, usize)> {
    check_dim(d)?;
    for idx in [k1, l1, k2, l2, r, s] {
        check_index(idx, d)?;
    }
    let k = sub_mod(add_mod(k1, k2, d), r, d);
    let l = sub_mod(add_mod(l1, l2, d), s, d);
    Ok((k, l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Contract `⟨Ψ_{r,s}|_{3,2}` against `|Ψ_{k1,l1}⟩_{12} |Ψ_{k2,l2}⟩_{34}`
    /// by summing over every basis tuple, returning the unnormalised state
    /// on systems (1,4).
    fn contract(
        d: usize,
        k1: usize,
        l1: usize,
        k2: usize,
        l2: usize,
        r: usize,
        s: usize,
    ) -> Vec<C64> {
        let p12 = bell_state(d, k1, l1).unwrap();
        let p34 = bell_state(d, k2, l2).unwrap();
        let m32 = bell_state(d, r, s).unwrap();
        let mut out = vec![c(0.0, 0.0); d * d];
        for a in 0..d {
            for b in 0..d {
                for cc in 0..d {
                    for e in 0..d {
                        let amp = p12.amplitudes[a * d + b] * p34.amplitudes[cc * d + e];
                        if amp.norm() == 0.0 {
                            continue;
                        }
                        // bra on (3,2): first factor system 3 = cc, second system 2 = b
                        let bra = m32.amplitudes[cc * d + b].conj();
                        out[a * d + e] += bra * amp;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn identity_and_pauli_x() {
        let w = weyl(2, 0, 0).unwrap();
        assert_eq!(
            w.matrix,
            Array2::from_diag(&Array1::from(vec![c(1.0, 0.0); 2]))
        );
        let x = weyl(2, 0, 1).unwrap();
        assert_eq!(x.matrix[[0, 1]], c(1.0, 0.0));
        assert_eq!(x.matrix[[1, 0]], c(1.0, 0.0));
        assert_eq!(x.matrix[[0, 0]], c(0.0, 0.0));
        assert_eq!(x.matrix[[1, 1]], c(0.0, 0.0));
    }

    #[test]
    fn weyl_3_1_2_maps_zero_to_one_with_row_phase() {
        // brute force from the defining sum
        let d = 3;
        let mut expected = Array1::<C64>::zeros(d);
        let input = basis_state(d, 0).unwrap();
        for k in 0..d {
            let col = (k + 2) % d;
            expected[k] += root_of_unity(k, d) * input[col];
        }
        let w = weyl(3, 1, 2).unwrap();
        let out = w.apply(&input);
        assert_eq!(out, expected);
        // row 1 carries e^{i2π·1·1/3}
        assert!((out[1] - root_of_unity(1, 3)).norm() < 1e-15);
        assert_eq!(out[0], c(0.0, 0.0));
        assert_eq!(out[2], c(0.0, 0.0));
    }

    #[test]
    fn weyl_rejects_bad_input() {
        assert_eq!(weyl(1, 0, 0).unwrap_err(), Error::Dimension(1));
        assert!(matches!(
            weyl(4, 4, 0),
            Err(Error::IndexOutOfRange { index: 4, d: 4 })
        ));
        assert!(matches!(weyl(4, 0, 7), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn weyl_unitary_up_to_eight() {
        for d in 2..=8 {
            for n in 0..d {
                for m in 0..d {
                    assert!(weyl(d, n, m).unwrap().unitarity_defect() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn basis_traversal() {
        for d in 2..=8 {
            for j in 0..d {
                for k in 0..d {
                    let ket = basis_state(d, k).unwrap();
                    let down = weyl(d, 0, j).unwrap().apply(&ket);
                    assert_eq!(down, basis_state(d, sub_mod(k, j, d)).unwrap());
                    let up = weyl(d, 0, (d - j) % d).unwrap().apply(&ket);
                    assert_eq!(up, basis_state(d, add_mod(k, j, d)).unwrap());
                }
            }
        }
    }

    #[test]
    fn bell_00_qubit() {
        let s = bell_state(2, 0, 0).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((s.amplitudes[0] - c(h, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes[3] - c(h, 0.0)).norm() < 1e-15);
        assert_eq!(s.amplitudes[1], c(0.0, 0.0));
        assert_eq!(s.amplitudes[2], c(0.0, 0.0));
    }

    #[test]
    fn bell_support() {
        let s = bell_state(4, 1, 0).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let on = b == (a + 3) % 4;
                assert_eq!(s.amplitudes[a * 4 + b].norm() > 0.0, on, "({a},{b})");
            }
        }
    }

    #[test]
    fn bell_orthonormal_d3() {
        let d = 3;
        let states: Vec<_> = (0..d * d)
            .map(|i| bell_state(d, i / d, i % d).unwrap())
            .collect();
        for (i, a) in states.iter().enumerate() {
            assert!((a.norm() - 1.0).abs() < 1e-12);
            for (j, b) in states.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((a.inner(b) - c(target, 0.0)).norm() < 1e-12, "{i} {j}");
            }
        }
    }

    #[test]
    fn swap_update_examples() {
        assert_eq!(swap_update(0, 0, 0, 0, 0, 0, 4).unwrap(), (0, 0));
        assert_eq!(swap_update(1, 0, 2, 0, 1, 0, 4).unwrap(), (2, 0));
        assert!(swap_update(0, 0, 0, 0, 4, 0, 4).is_err());
    }

    #[test]
    fn swap_update_matches_contraction() {
        for d in [2usize, 3] {
            for idx in 0..d.pow(6) {
                let mut t = idx;
                let mut take = || {
                    let v = t % d;
                    t /= d;
                    v
                };
                let (k1, l1, k2, l2, r, s) = (take(), take(), take(), take(), take(), take());
                let out = contract(d, k1, l1, k2, l2, r, s);
                let (kp, lp) = swap_update(k1, l1, k2, l2, r, s, d).unwrap();
                let target = bell_state(d, kp, lp).unwrap();
                let norm: f64 = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                // every outcome has probability 1/d²
                assert!((norm - 1.0 / d as f64).abs() < 1e-12);
                let overlap: C64 = target
                    .amplitudes
                    .iter()
                    .zip(&out)
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                assert!((overlap.norm() - norm).abs() < 1e-12, "d={d} tuple {idx}");
            }
        }
    }
}
