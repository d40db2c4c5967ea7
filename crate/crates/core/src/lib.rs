//! Rate and gate models for a qudit entanglement-swapping link built from GKP
//! qudits and cavity-coupled quantum memories.
//!
//! The crate is organised bottom-up:
//!
//! * [`qudit`]: Weyl operators, qudit Bell states and the swap label rule.
//! * [`gkp`]: square and hexagonal GKP qudits, logical binning and the
//!   shift-error distribution of finitely squeezed states.
//! * [`channel`]: pure loss turned into Gaussian displacement noise, and
//!   seeded sampling.
//! * [`cavity`]: atom–cavity reflection and loss amplitudes, pulse spectra and
//!   loss-induced dephasing.
//! * [`csum`]: the memory → GKP controlled-displacement gate.
//! * [`rate`]: hashing-bound link rates, capacity benchmarks and asymptotics.
//! * [`montecarlo`]: sampling check of the swap's shift statistics.

// `!(x > 0.0)` is used deliberately so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod channel;
pub mod csum;
pub mod error;
pub mod exec;
pub mod gkp;
pub mod montecarlo;
pub mod qudit;
pub mod rate;

pub use channel::AmpMode;
pub use error::{Error, Result};
pub use exec::Execution;
pub use gkp::{GkpCode, Lattice};
pub use rate::Combine;
