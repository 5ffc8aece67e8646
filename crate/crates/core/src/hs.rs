//! Hilbert-Schmidt space conventions: row-stacking vectorization and the
//! inner product Tr(Y†X).
//!
//! Vectorization is row-major project-wide, so the superoperator X(.)Y
//! becomes the matrix X (x) Y^T acting on |rho>>. Column-stacking
//! conventions from other sources would instead give Y^T (x) X; they are
//! not used anywhere in this crate.

use crate::error::Error;
use crate::linalg::{CMat, CVec, C64};

/// Row-stacks a square matrix into a length-d^2 vector; component at flat
/// index `i*d + j` is the entry (i, j).
pub fn vectorize(x: &CMat) -> Result<CVec, Error> {
    if !x.is_square() {
        return Err(Error::NotSquare {
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    Ok(CVec::from(x.as_slice().to_vec()))
}

/// Inverse of [`vectorize`]; fails unless the length is a perfect square.
pub fn devectorize(v: &CVec) -> Result<CMat, Error> {
    let len = v.len();
    let d = isqrt(len);
    if d * d != len {
        return Err(Error::NotSquareLength { len });
    }
    CMat::new(d, d, v.as_slice().to_vec())
}

/// The d^2 x d^2 matrix of the superoperator X(.)Y: for every rho,
/// `vectorize(X rho Y) = sandwich_matrix(X, Y) . vectorize(rho)`.
pub fn sandwich_matrix(x: &CMat, y: &CMat) -> Result<CMat, Error> {
    if !x.is_square() {
        return Err(Error::NotSquare {
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    if !y.is_square() {
        return Err(Error::NotSquare {
            rows: y.rows(),
            cols: y.cols(),
        });
    }
    if x.rows() != y.rows() {
        return Err(Error::DimensionMismatch {
            left: x.rows(),
            right: y.rows(),
        });
    }
    Ok(x.kron(&y.transpose()))
}

/// Hilbert-Schmidt inner product <<Y|X>> = Tr(Y†X). Conjugate-symmetric;
/// `hs_inner(I, rho)` is the trace of rho.
pub fn hs_inner(y: &CMat, x: &CMat) -> Result<C64, Error> {
    if (y.rows(), y.cols()) != (x.rows(), x.cols()) {
        return Err(Error::DimensionMismatch {
            left: y.rows(),
            right: x.rows(),
        });
    }
    Ok(y.as_slice()
        .iter()
        .zip(x.as_slice())
        .map(|(a, b)| a.conj() * b)
        .sum())
}

fn isqrt(n: usize) -> usize {
    let mut r = 0usize;
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}
