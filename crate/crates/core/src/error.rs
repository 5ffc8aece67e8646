//! Error type shared by every module of the crate.

use alloc::string::String;
use core::fmt;

/// Everything that can go wrong while building or analyzing a measurement
/// set. Structural problems (shapes, indices) are distinct from numeric
/// ones (tolerance violations) so callers can map them to different exit
/// paths.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Entry count does not match the declared shape.
    ShapeMismatch {
        rows: usize,
        cols: usize,
        len: usize,
    },
    /// A matrix or vector entry is NaN or infinite.
    NonFinite,
    /// Rows of a nested-list matrix have different lengths.
    NonRectangular,
    /// An operation required a square matrix.
    NotSquare { rows: usize, cols: usize },
    /// Two operands have incompatible dimensions.
    DimensionMismatch { left: usize, right: usize },
    /// A vector cannot be reshaped into a square matrix.
    NotSquareLength { len: usize },
    /// Outcome index out of range.
    OutcomeOutOfRange { index: usize, r: usize },
    /// A numeric invariant of the measurement set failed.
    Validation {
        criterion: &'static str,
        residual: f64,
        tol: f64,
    },
    /// A matrix expected to be unitary is not, within tolerance.
    NotUnitary { residual: f64, tol: f64 },
    /// A density matrix failed one of its defining checks.
    InvalidDensity {
        criterion: &'static str,
        residual: f64,
        tol: f64,
    },
    /// The simultaneous diagonalization could not reach diagonality.
    Diagonalization { residual: f64, tol: f64 },
    /// The eigensolver failed to converge (should not happen in practice).
    EigenConvergence,
    /// The phase-equivalence relation on coefficient columns is not
    /// transitive at the requested tolerance.
    GroupingAmbiguity { i: usize, j: usize, overlap: f64 },
    /// Spectral gap is undefined because the decomposition has one group.
    NoSpectralGap,
    /// Channel powers start at m = 1; the identity is not a round.
    ZeroPower,
    /// A selective branch has probability below the configured floor.
    ZeroProbabilityBranch { outcome: usize, probability: f64 },
    /// Two signatures are identical where distinct ones are required.
    IdenticalSignatures { j: usize, k: usize },
    /// Separation analysis needs at least two distinct signatures.
    NoDistinctSignatures,
    /// The simplex grid exceeds the enumeration cap.
    GridTooLarge { points: u128, cap: u64 },
    /// Two typical neighborhoods share a grid point; delta is too large.
    OverlappingNeighborhoods { j: usize, k: usize, point: String },
    /// No signature gives the frequency a finite relative entropy.
    Unclassifiable,
    /// The Fock cutoff does not populate every modular class.
    TruncationTooSmall { truncation: usize, minimum: usize },
    /// Two sequences that must have equal length do not.
    LengthMismatch { left: usize, right: usize },
    /// The ancilla preparation state is not normalized.
    NotNormalized { norm: f64, tol: f64 },
    /// The classified group has no overlap with the initial state.
    NoGroupOverlap { group: usize, weight: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { rows, cols, len } => {
                write!(f, "{rows}x{cols} matrix cannot hold {len} entries")
            }
            Error::NonFinite => write!(f, "non-finite entry (NaN or infinity)"),
            Error::NonRectangular => write!(f, "rows have unequal lengths"),
            Error::NotSquare { rows, cols } => {
                write!(f, "expected a square matrix, got {rows}x{cols}")
            }
            Error::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            Error::NotSquareLength { len } => {
                write!(f, "length {len} is not a perfect square")
            }
            Error::OutcomeOutOfRange { index, r } => {
                write!(f, "outcome index {index} out of range for {r} outcomes")
            }
            Error::Validation {
                criterion,
                residual,
                tol,
            } => {
                write!(
                    f,
                    "{criterion} residual {residual:e} exceeds tolerance {tol:e}"
                )
            }
            Error::NotUnitary { residual, tol } => {
                write!(f, "matrix is not unitary: residual {residual:e} > {tol:e}")
            }
            Error::InvalidDensity {
                criterion,
                residual,
                tol,
            } => {
                write!(
                    f,
                    "invalid density matrix ({criterion}): residual {residual:e} > {tol:e}"
                )
            }
            Error::Diagonalization { residual, tol } => {
                write!(
                    f,
                    "simultaneous diagonalization stalled at residual {residual:e} (tol {tol:e})"
                )
            }
            Error::EigenConvergence => write!(f, "Hermitian eigensolver did not converge"),
            Error::GroupingAmbiguity { i, j, overlap } => {
                write!(
                    f,
                    "grouping ambiguous: columns {i} and {j} overlap at {overlap}; tighten the group tolerance"
                )
            }
            Error::NoSpectralGap => {
                write!(
                    f,
                    "spectral gap undefined: decomposition has a single group"
                )
            }
            Error::ZeroPower => write!(f, "channel power requires m >= 1"),
            Error::ZeroProbabilityBranch {
                outcome,
                probability,
            } => {
                write!(
                    f,
                    "outcome {outcome} has probability {probability:e} below the floor"
                )
            }
            Error::IdenticalSignatures { j, k } => {
                write!(f, "signatures {j} and {k} coincide")
            }
            Error::NoDistinctSignatures => {
                write!(f, "separation bound needs at least two distinct signatures")
            }
            Error::GridTooLarge { points, cap } => {
                write!(f, "simplex grid has {points} points, above the cap {cap}")
            }
            Error::OverlappingNeighborhoods { j, k, point } => {
                write!(
                    f,
                    "neighborhoods {j} and {k} overlap at grid point {point}; reduce delta"
                )
            }
            Error::Unclassifiable => {
                write!(
                    f,
                    "frequency has infinite relative entropy to every signature"
                )
            }
            Error::TruncationTooSmall {
                truncation,
                minimum,
            } => {
                write!(
                    f,
                    "Fock truncation {truncation} below the minimum {minimum}"
                )
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::NotNormalized { norm, tol } => {
                write!(f, "state norm {norm} differs from 1 beyond {tol:e}")
            }
            Error::NoGroupOverlap { group, weight } => {
                write!(
                    f,
                    "classified group {group} has weight {weight:e} in the initial state"
                )
            }
        }
    }
}

impl core::error::Error for Error {}

/// Structural errors come from malformed inputs; numeric errors from
/// tolerance violations in well-formed ones.
impl Error {
    pub fn is_structural(&self) -> bool {
        matches!(
            self,
            Error::ShapeMismatch { .. }
                | Error::NonFinite
                | Error::NonRectangular
                | Error::NotSquare { .. }
                | Error::DimensionMismatch { .. }
                | Error::NotSquareLength { .. }
                | Error::OutcomeOutOfRange { .. }
                | Error::ZeroPower
                | Error::LengthMismatch { .. }
                | Error::TruncationTooSmall { .. }
        )
    }
}
