//! Sequential generalized quantum measurements with normal, commuting
//! measurement operators: validation and canonical decomposition of
//! measurement-operator sets, Hilbert-Schmidt channel matrices and their
//! asymptotics, typical-sequence analysis, Monte Carlo trajectory
//! simulation, and the ancilla-qubit dephasing construction.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats and the
//! command-line front end live in the companion `seqpovm` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ancilla;
pub mod channel;
pub mod error;
pub mod hs;
pub mod linalg;
pub mod povm;
pub mod trajectory;
pub mod typicality;

mod analysis;
#[cfg(feature = "serde")]
mod serde_impls;

pub use analysis::{Analysis, AnalysisParams};
pub use error::Error;
pub use linalg::{CMat, CVec, C64};
pub use povm::{DensityMatrix, MeasurementSet};

/// Absolute tolerance for the numeric invariants of measurement sets.
pub const DEFAULT_VALIDATION_TOL: f64 = 1e-9;
/// Tolerance for the phase-equivalence grouping of coefficient columns.
pub const DEFAULT_GROUP_TOL: f64 = 1e-7;
/// Smallest branch probability that a selective update will divide by.
pub const DEFAULT_P_FLOOR: f64 = 1e-12;
/// Seed of the random Hermitian combination used by the simultaneous
/// diagonalization. Part of the call configuration, not global state.
pub const DEFAULT_DIAG_SEED: u64 = 0x9e37_79b9_7f4a_7c15;
/// Largest simplex grid the typicality enumeration will walk.
pub const DEFAULT_GRID_CAP: u64 = 2_000_000;
