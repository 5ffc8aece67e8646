//! Dense complex matrices and vectors, plus the Hermitian eigensolver the
//! rest of the crate is built on.
//!
//! Storage is row-major `Vec<C64>`. Dimensions here are tiny (d <= 64), so
//! everything is straightforward O(n^3) dense arithmetic; values are
//! immutable after construction and validated to be finite.

use alloc::vec;
use alloc::vec::Vec;
// f64 math comes from the Float trait in no_std builds; toolchains that
// can see std resolve the same methods inherently and mark this unused.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;

pub type C64 = num_complex::Complex<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    /// Builds a matrix from row-major entries, checking shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, Error> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                len: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(CMat { rows, cols, data })
    }

    /// Builds a matrix from nested rows, rejecting ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, Error> {
        if rows.is_empty() {
            return Err(Error::ShapeMismatch {
                rows: 0,
                cols: 0,
                len: 0,
            });
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::NonRectangular);
        }
        let data: Vec<C64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        CMat::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = CMat::zeros(n, n);
        for (i, z) in diag.iter().enumerate() {
            m.data[i * n + i] = *z;
        }
        m
    }

    pub(crate) fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> C64,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.cols + j] = z;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> CVec {
        CVec::from((0..self.rows).map(|i| self.get(i, j)).collect::<Vec<_>>())
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> C64 {
        self.diag().into_iter().sum()
    }

    pub fn scale(&self, z: C64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|w| w * z).collect(),
        }
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &CVec) -> CVec {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        let out: Vec<C64> = (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j) * v.as_slice()[j])
                    .sum::<C64>()
            })
            .collect();
        CVec::from(out)
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &CMat) -> CMat {
        let (p, q) = (other.rows, other.cols);
        CMat::from_fn(self.rows * p, self.cols * q, |i, j| {
            self.get(i / p, j / q) * other.get(i % p, j % q)
        })
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference, the norm used for all convergence
    /// statements in this crate.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_diagonal_within(&self, tol: f64) -> bool {
        self.off_diagonal_max() <= tol
    }

    pub fn off_diagonal_max(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    worst = worst.max(self.get(i, j).norm());
                }
            }
        }
        worst
    }

    /// Hermitian part (A + A†)/2.
    pub fn hermitian_part(&self) -> CMat {
        self.add(&self.dagger()).scale(C64::new(0.5, 0.0))
    }

    /// Anti-Hermitian part divided by i, i.e. (A - A†)/(2i); Hermitian.
    pub fn antihermitian_part_over_i(&self) -> CMat {
        self.sub(&self.dagger()).scale(C64::new(0.0, -0.5))
    }

    /// Residual of U†U - I; zero for unitary matrices.
    pub fn unitarity_residual(&self) -> f64 {
        self.dagger()
            .matmul(self)
            .max_abs_diff(&CMat::identity(self.cols))
    }

    pub fn commutator(&self, other: &CMat) -> CMat {
        self.matmul(other).sub(&other.matmul(self))
    }
}

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVec {
    data: Vec<C64>,
}

impl From<Vec<C64>> for CVec {
    fn from(data: Vec<C64>) -> Self {
        CVec { data }
    }
}

impl CVec {
    pub fn new(data: Vec<C64>) -> Result<Self, Error> {
        if data.is_empty() {
            return Err(Error::ShapeMismatch {
                rows: 0,
                cols: 1,
                len: 0,
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(CVec { data })
    }

    pub fn zeros(n: usize) -> Self {
        CVec {
            data: vec![ZERO; n],
        }
    }

    pub fn basis_state(n: usize, index: usize) -> Self {
        let mut data = vec![ZERO; n];
        data[index] = ONE;
        CVec { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize) -> C64 {
        self.data[i]
    }

    /// Inner product `<self|other>` (conjugate-linear in `self`).
    pub fn dot(&self, other: &CVec) -> C64 {
        assert_eq!(self.len(), other.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, z: C64) -> CVec {
        CVec {
            data: self.data.iter().map(|w| w * z).collect(),
        }
    }

    pub fn sub(&self, other: &CVec) -> CVec {
        assert_eq!(self.len(), other.len());
        CVec {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &CVec) -> f64 {
        self.sub(other)
            .data
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Outer product |self><other|.
    pub fn outer(&self, other: &CVec) -> CMat {
        CMat::from_fn(self.len(), other.len(), |i, j| {
            self.data[i] * other.data[j].conj()
        })
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// a unitary whose columns are the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Cyclic complex Jacobi iteration. The input is symmetrized first, so only
/// its Hermitian part matters. Accurate to a few ulps at the sizes used
/// here (d <= 64).
pub fn eigh(matrix: &CMat) -> Result<Eigh, Error> {
    if !matrix.is_square() {
        return Err(Error::NotSquare {
            rows: matrix.rows(),
            cols: matrix.cols(),
        });
    }
    let n = matrix.rows();
    let mut a = matrix.hermitian_part();
    let mut v = CMat::identity(n);
    if n > 1 {
        let scale = a.max_abs().max(1e-300);
        let stop = f64::EPSILON * scale;
        let mut converged = false;
        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a.get(p, q);
                    let g = apq.norm();
                    off = off.max(g);
                    if g <= stop {
                        continue;
                    }
                    let app = a.get(p, p).re;
                    let aqq = a.get(q, q).re;
                    let phase = apq / g; // e^{i arg(apq)}
                    let tau = (aqq - app) / (2.0 * g);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // Unitary U: U_pp = c, U_pq = s, U_qp = -s e^{-i phi}, U_qq = c e^{-i phi}
                    let e_m = phase.conj();
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, akp * c - akq * (e_m * s));
                        a.set(k, q, akp * s + akq * (e_m * c));
                    }
                    let e_p = phase;
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, apk * c - aqk * (e_p * s));
                        a.set(q, k, apk * s + aqk * (e_p * c));
                    }
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, vkp * c - vkq * (e_m * s));
                        v.set(k, q, vkp * s + vkq * (e_m * c));
                    }
                }
            }
            if off <= stop {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::EigenConvergence);
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let values: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));

    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        let col = normalize_column_phase(&v.col(old_col));
        for i in 0..n {
            vectors.set(i, new_col, col.get(i));
        }
    }
    Ok(Eigh {
        values: sorted_values,
        vectors,
    })
}

/// Rotates a vector's global phase so its largest-magnitude component is
/// real and positive; pins the otherwise arbitrary eigenvector phase.
pub fn normalize_column_phase(col: &CVec) -> CVec {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, z) in col.as_slice().iter().enumerate() {
        let m = z.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag == 0.0 {
        return col.clone();
    }
    let z = col.get(best);
    col.scale(z.conj() / z.norm())
}
