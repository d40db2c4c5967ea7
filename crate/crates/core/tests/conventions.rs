//! Characterization of the arm-combination conventions against Q₂.

use gkp_link::rate::{sweep, Combine, SweepGrid};
use gkp_link::{AmpMode, Execution, Lattice};

fn grid(combine: Combine, amp: AmpMode) -> SweepGrid {
    SweepGrid {
        lattices: Lattice::ALL.to_vec(),
        amps: vec![amp],
        combine,
        ns: (1..=10).collect(),
        squeezing_db: vec![f64::INFINITY, 10.0, 5.0],
        half_loss_db: (0..=300).map(|i| i as f64 / 100.0).collect(),
    }
}

fn max_excess(combine: Combine, amp: AmpMode, lattice: Lattice) -> f64 {
    sweep(&grid(combine, amp), Execution::Parallel)
        .unwrap()
        .iter()
        .filter(|p| p.lattice == lattice)
        .map(|p| p.rate - p.q2)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn summed_arms_stay_below_repeaterless_bound() {
    for amp in AmpMode::ALL {
        for lattice in Lattice::ALL {
            assert!(max_excess(Combine::SumArms, amp, lattice) <= 0.0);
        }
    }
}

#[test]
fn single_arm_pre_amplification_stays_below_bound() {
    for lattice in Lattice::ALL {
        assert!(max_excess(Combine::SingleArm, AmpMode::PreAmplify, lattice) <= 0.0);
    }
}

#[test]
fn single_arm_cc_amplification_exceeds_bound() {
    // a single-arm variance with the CC factor undercounts the noise
    let sq = max_excess(Combine::SingleArm, AmpMode::CcAmplify, Lattice::Square);
    let hex = max_excess(Combine::SingleArm, AmpMode::CcAmplify, Lattice::Hexagonal);
    assert!((sq - 0.43).abs() < 0.01, "{sq}");
    assert!((hex - 0.63).abs() < 0.01, "{hex}");
}
