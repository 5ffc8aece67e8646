//! Channel matrices in Hilbert-Schmidt space and their asymptotics:
//! closed-form powers, fixed/rotating/decaying point classification, the
//! asymptotic projective channel and the spectral gap that sets the
//! convergence rate.
//!
//! In the simultaneous eigenbasis the channel is diagonal with eigenvalues
//! c_j† c_i at flat index i*d + j, so powers are scalar powers of those
//! entries; the dense d^2 x d^2 matrix is only materialized on demand.

use alloc::vec::Vec;
// f64 math comes from the Float trait in no_std builds; toolchains that
// can see std resolve the same methods inherently and mark this unused.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::hs;
use crate::linalg::{CMat, C64};
use crate::povm::{self, CanonicalDecomposition, EigenStructure, MeasurementSet};

/// The d^2 x d^2 matrix of the non-selective channel in the computational
/// product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    dim: usize,
    matrix: CMat,
}

impl ChannelMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Deviation from trace preservation: || vec(I)† Phi - vec(I)† ||_max.
    pub fn trace_preservation_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for col in 0..d * d {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..d {
                acc += self.matrix.get(i * d + i, col);
            }
            let expected = if col / d == col % d { 1.0 } else { 0.0 };
            worst = worst.max((acc - C64::new(expected, 0.0)).norm());
        }
        worst
    }
}

/// Builds Phi = sum_alpha M_alpha (x) M_alpha* for a validated set.
pub fn channel_matrix(set: &MeasurementSet, tol: f64) -> Result<ChannelMatrix, Error> {
    povm::validate(set, tol).ensure()?;
    let d = set.dim();
    let mut matrix = CMat::zeros(d * d, d * d);
    for m in set.operators() {
        matrix = matrix.add(&m.kron(&m.conj()));
    }
    Ok(ChannelMatrix { dim: d, matrix })
}

/// Channel eigenvalue at HS flat index (i, j): c_j† c_i.
pub fn hs_eigenvalue(es: &EigenStructure, i: usize, j: usize) -> C64 {
    es.column(j).dot(&es.column(i))
}

fn complex_power(z: C64, m: u64) -> C64 {
    if m == 1 {
        return z;
    }
    let r = z.norm();
    if r == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let theta = z.arg();
    C64::from_polar(r.powi(m as i32), theta * m as f64)
}

fn materialize(es: &EigenStructure, diag: &[C64]) -> CMat {
    let basis = es.basis();
    let d = es.dim();
    let diag_mat = CMat::from_diag(diag);
    if basis == &CMat::identity(d) {
        return diag_mat;
    }
    let w = basis.kron(&basis.conj());
    w.matmul(&diag_mat).matmul(&w.dagger())
}

/// The m-th channel power from the eigenstructure: scalar powers of the d^2
/// eigenvalues, rotated back to the computational basis. O(d^2) for the
/// eigenvalue work instead of repeated dense multiplication.
pub fn channel_power(es: &EigenStructure, m: u64) -> Result<ChannelMatrix, Error> {
    if m == 0 {
        return Err(Error::ZeroPower);
    }
    let d = es.dim();
    let mut diag = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            diag.push(complex_power(hs_eigenvalue(es, i, j), m));
        }
    }
    Ok(ChannelMatrix {
        dim: d,
        matrix: materialize(es, &diag),
    })
}

/// The asymptotic channel sum_k (P~_k (x) P~_k*)^m. With all phases zero
/// this is the non-selective projective channel sum_k P_k (x) P_k,
/// independent of m.
pub fn asymptotic_channel(
    es: &EigenStructure,
    canon: &CanonicalDecomposition,
    m: u64,
) -> ChannelMatrix {
    let d = es.dim();
    let diag = asymptotic_diagonal(canon, d, m);
    ChannelMatrix {
        dim: d,
        matrix: materialize(es, &diag),
    }
}

fn asymptotic_diagonal(canon: &CanonicalDecomposition, d: usize, m: u64) -> Vec<C64> {
    let phases = canon.phases();
    let mut diag = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            if canon.group_of(i) == canon.group_of(j) {
                diag.push(C64::from_polar(1.0, (phases[i] - phases[j]) * m as f64));
            } else {
                diag.push(C64::new(0.0, 0.0));
            }
        }
    }
    diag
}

/// Max-entry distance between the m-th channel power and its asymptote,
/// evaluated in the eigenbasis where both are diagonal. Bounds the same
/// distance in any basis.
pub fn distance_to_asymptote(
    es: &EigenStructure,
    canon: &CanonicalDecomposition,
    m: u64,
) -> Result<f64, Error> {
    if m == 0 {
        return Err(Error::ZeroPower);
    }
    let d = es.dim();
    let asym = asymptotic_diagonal(canon, d, m);
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let lam = complex_power(hs_eigenvalue(es, i, j), m);
            worst = worst.max((lam - asym[i * d + j]).norm());
        }
    }
    Ok(worst)
}

/// Where each HS basis vector |ij>> sits in the spectrum of the channel.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HsPointClassification {
    /// Pairs with eigenvalue 1.
    pub fixed: Vec<(usize, usize)>,
    /// Same-group pairs with unimodular eigenvalue e^{i phi}, phi != 0.
    pub rotating: Vec<(usize, usize, f64)>,
    /// Cross-group pairs, with the eigenvalue magnitude |c~_p† c~_q| < 1.
    pub decaying: Vec<(usize, usize, f64)>,
}

/// Classifies every (i, j) pair: fixed iff i, j share a group and phases
/// agree mod 2pi, rotating for same-group phase mismatches, decaying across
/// groups.
pub fn classify_hs_points(canon: &CanonicalDecomposition, tol: f64) -> HsPointClassification {
    let d = canon.phases().len();
    let mut fixed = Vec::new();
    let mut rotating = Vec::new();
    let mut decaying = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let gi = canon.group_of(i);
            let gj = canon.group_of(j);
            if gi == gj {
                let delta = canon.phases()[i] - canon.phases()[j];
                let wrapped = wrap_phase(delta);
                if wrapped.abs() <= tol {
                    fixed.push((i, j));
                } else {
                    rotating.push((i, j, wrapped));
                }
            } else {
                let mag = canon.representatives()[gj]
                    .dot(&canon.representatives()[gi])
                    .norm();
                decaying.push((i, j, mag));
            }
        }
    }
    HsPointClassification {
        fixed,
        rotating,
        decaying,
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let tau = core::f64::consts::TAU;
    let mut x = phi % tau;
    if x > core::f64::consts::PI {
        x -= tau;
    } else if x < -core::f64::consts::PI {
        x += tau;
    }
    x
}

/// Largest cross-group representative overlap g = max |c~_p† c~_q|; the
/// channel converges to its asymptote like g^m. Undefined for a single
/// group, where the channel is already unitary on one block.
pub fn spectral_gap(canon: &CanonicalDecomposition) -> Result<f64, Error> {
    let s = canon.group_count();
    if s < 2 {
        return Err(Error::NoSpectralGap);
    }
    let mut g = 0.0f64;
    for p in 0..s {
        for q in p + 1..s {
            g = g.max(
                canon.representatives()[p]
                    .dot(&canon.representatives()[q])
                    .norm(),
            );
        }
    }
    Ok(g)
}

/// Applies a channel matrix to a vectorized state; convenience for tests
/// and the non-selective oracle.
pub fn apply_channel(channel: &ChannelMatrix, rho: &CMat) -> Result<CMat, Error> {
    let v = hs::vectorize(rho)?;
    if v.len() != channel.matrix.cols() {
        return Err(Error::DimensionMismatch {
            left: v.len(),
            right: channel.matrix.cols(),
        });
    }
    hs::devectorize(&channel.matrix.mul_vec(&v))
}
