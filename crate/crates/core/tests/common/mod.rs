//! Shared generators for the integration tests: seeded random matrices,
//! unitaries and valid measurement sets.
#![allow(dead_code)] // each test target uses a different subset

use rand_core::{RngCore, SeedableRng};
use seqpovm_core::{CMat, CVec, MeasurementSet, C64};

pub type TestRng = rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    TestRng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut TestRng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn signed_uniform(rng: &mut TestRng) -> f64 {
    2.0 * uniform(rng) - 1.0
}

pub fn random_complex(rng: &mut TestRng) -> C64 {
    C64::new(signed_uniform(rng), signed_uniform(rng))
}

pub fn random_matrix(d: usize, rng: &mut TestRng) -> CMat {
    let data: Vec<C64> = (0..d * d).map(|_| random_complex(rng)).collect();
    CMat::new(d, d, data).unwrap()
}

fn from_columns(cols: &[CVec]) -> CMat {
    let rows = cols[0].len();
    let data: Vec<C64> = (0..rows)
        .flat_map(|i| cols.iter().map(move |c| c.get(i)))
        .collect();
    CMat::new(rows, cols.len(), data).unwrap()
}

/// Modified Gram-Schmidt on a random complex matrix.
pub fn random_unitary(d: usize, rng: &mut TestRng) -> CMat {
    loop {
        let raw = random_matrix(d, rng);
        let mut cols: Vec<CVec> = (0..d).map(|j| raw.col(j)).collect();
        let mut ok = true;
        for j in 0..d {
            for k in 0..j {
                let overlap = cols[k].dot(&cols[j]);
                cols[j] = cols[j].sub(&cols[k].scale(overlap));
            }
            let norm = cols[j].norm();
            if norm < 1e-3 {
                ok = false;
                break;
            }
            cols[j] = cols[j].scale(C64::new(1.0 / norm, 0.0));
        }
        if !ok {
            continue;
        }
        let m = from_columns(&cols);
        if m.unitarity_residual() < 1e-12 {
            return m;
        }
    }
}

/// Unit column coefficient matrix; the last `phase_twins` columns repeat
/// earlier columns up to random phases, producing non-trivial canonical
/// groups.
pub fn random_coefficients(r: usize, d: usize, phase_twins: usize, rng: &mut TestRng) -> CMat {
    let fresh = d - phase_twins.min(d - 1);
    let mut cols: Vec<CVec> = Vec::with_capacity(d);
    for j in 0..d {
        if j >= fresh {
            let src = (rng.next_u64() % fresh as u64) as usize;
            let phase = C64::from_polar(1.0, signed_uniform(rng) * core::f64::consts::PI);
            cols.push(cols[src].scale(phase));
        } else {
            let raw: Vec<C64> = (0..r).map(|_| random_complex(rng)).collect();
            let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            cols.push(CVec::new(raw).unwrap().scale(C64::new(1.0 / norm, 0.0)));
        }
    }
    from_columns(&cols)
}

/// A valid normal commuting set: random simultaneous eigenbasis, random
/// unit coefficient columns.
pub fn random_set(r: usize, d: usize, phase_twins: usize, rng: &mut TestRng) -> MeasurementSet {
    let basis = random_unitary(d, rng);
    let coeff = random_coefficients(r, d, phase_twins, rng);
    let operators: Vec<CMat> = (0..r)
        .map(|alpha| {
            let diag = CMat::from_diag(coeff.row(alpha));
            basis.matmul(&diag).matmul(&basis.dagger())
        })
        .collect();
    MeasurementSet::new(operators).unwrap()
}

/// Random density matrix from a random pure-state mixture.
pub fn random_density(d: usize, rng: &mut TestRng) -> CMat {
    let u = random_unitary(d, rng);
    let mut probs: Vec<f64> = (0..d).map(|_| uniform(rng) + 1e-3).collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    let diag: Vec<C64> = probs.into_iter().map(|p| C64::new(p, 0.0)).collect();
    u.matmul(&CMat::from_diag(&diag)).matmul(&u.dagger())
}
