//! Measurement-operator sets and their structure: validation of the
//! normal/commuting invariants, simultaneous diagonalization, the canonical
//! decomposition into phase-equivalent groups, unitary mixing, and
//! single-shot selective updates.

use alloc::vec;
use alloc::vec::Vec;
// f64 math comes from the Float trait in no_std builds; toolchains that
// can see std resolve the same methods inherently and mark this unused.
#[allow(unused_imports)]
use num_traits::Float;
use rand_core::{RngCore, SeedableRng};

use crate::error::Error;
use crate::linalg::{self, CMat, CVec, Eigh, C64};

/// The r measurement operators {M_alpha} of a generalized measurement on a
/// d-dimensional system. Construction checks shapes only; the numeric
/// invariants (completeness, normality, pairwise commutativity) are the
/// business of [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    dim: usize,
    operators: Vec<CMat>,
}

impl MeasurementSet {
    pub fn new(operators: Vec<CMat>) -> Result<Self, Error> {
        let first = operators.first().ok_or(Error::ShapeMismatch {
            rows: 0,
            cols: 0,
            len: 0,
        })?;
        if !first.is_square() {
            return Err(Error::NotSquare {
                rows: first.rows(),
                cols: first.cols(),
            });
        }
        let dim = first.rows();
        for op in &operators {
            if !op.is_square() {
                return Err(Error::NotSquare {
                    rows: op.rows(),
                    cols: op.cols(),
                });
            }
            if op.rows() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: op.rows(),
                });
            }
        }
        Ok(MeasurementSet { dim, operators })
    }

    /// Builds the diagonal set M_alpha = diag(row alpha of `c`); every
    /// unit-column coefficient matrix yields a valid set this way.
    pub fn from_diagonal_coefficients(c: &CMat) -> Self {
        let (r, d) = (c.rows(), c.cols());
        let operators = (0..r).map(|alpha| CMat::from_diag(c.row(alpha))).collect();
        MeasurementSet { dim: d, operators }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of outcomes r.
    pub fn outcomes(&self) -> usize {
        self.operators.len()
    }

    pub fn operators(&self) -> &[CMat] {
        &self.operators
    }

    pub fn operator(&self, alpha: usize) -> Result<&CMat, Error> {
        self.operators.get(alpha).ok_or(Error::OutcomeOutOfRange {
            index: alpha,
            r: self.operators.len(),
        })
    }
}

/// Residuals of the three defining invariants, with pass/fail at `tol`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ValidationReport {
    pub completeness_residual: f64,
    pub normality_residual: f64,
    pub commutator_residual: f64,
    pub tol: f64,
    pub completeness_pass: bool,
    pub normality_pass: bool,
    pub commutativity_pass: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.completeness_pass && self.normality_pass && self.commutativity_pass
    }

    /// First failed criterion as an error, for ops that require validity.
    pub fn ensure(&self) -> Result<(), Error> {
        if !self.completeness_pass {
            return Err(Error::Validation {
                criterion: "completeness",
                residual: self.completeness_residual,
                tol: self.tol,
            });
        }
        if !self.normality_pass {
            return Err(Error::Validation {
                criterion: "normality",
                residual: self.normality_residual,
                tol: self.tol,
            });
        }
        if !self.commutativity_pass {
            return Err(Error::Validation {
                criterion: "commutativity",
                residual: self.commutator_residual,
                tol: self.tol,
            });
        }
        Ok(())
    }
}

/// Checks completeness (sum M†M = I), normality of every operator, and
/// pairwise commutativity, all in the max-entry norm.
pub fn validate(set: &MeasurementSet, tol: f64) -> ValidationReport {
    let d = set.dim();
    let mut completeness = CMat::zeros(d, d);
    for m in set.operators() {
        completeness = completeness.add(&m.dagger().matmul(m));
    }
    let completeness_residual = completeness.max_abs_diff(&CMat::identity(d));

    let mut normality_residual = 0.0f64;
    for m in set.operators() {
        normality_residual = normality_residual.max(m.commutator(&m.dagger()).max_abs());
    }

    let mut commutator_residual = 0.0f64;
    for (a, ma) in set.operators().iter().enumerate() {
        for mb in set.operators().iter().skip(a + 1) {
            commutator_residual = commutator_residual.max(ma.commutator(mb).max_abs());
        }
    }

    ValidationReport {
        completeness_residual,
        normality_residual,
        commutator_residual,
        tol,
        completeness_pass: completeness_residual < tol,
        normality_pass: normality_residual < tol,
        commutativity_pass: commutator_residual < tol,
    }
}

/// A density matrix, validated to be Hermitian, unit-trace and positive
/// semidefinite within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat, tol: f64) -> Result<Self, Error> {
        if !mat.is_square() {
            return Err(Error::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        let herm = mat.max_abs_diff(&mat.dagger());
        if herm > tol {
            return Err(Error::InvalidDensity {
                criterion: "hermiticity",
                residual: herm,
                tol,
            });
        }
        let tr = mat.trace();
        let tr_residual = (tr - linalg::ONE).norm();
        if tr_residual > tol {
            return Err(Error::InvalidDensity {
                criterion: "trace",
                residual: tr_residual,
                tol,
            });
        }
        let eig = linalg::eigh(&mat)?;
        if let Some(&min) = eig.values.first() {
            if min < -tol {
                return Err(Error::InvalidDensity {
                    criterion: "positivity",
                    residual: -min,
                    tol,
                });
            }
        }
        Ok(DensityMatrix { mat })
    }

    pub(crate) fn new_unchecked(mat: CMat) -> Self {
        DensityMatrix { mat }
    }

    /// Pure state |psi><psi| from a normalized vector.
    pub fn pure(state: &CVec, tol: f64) -> Result<Self, Error> {
        let norm = state.norm();
        if (norm - 1.0).abs() > tol {
            return Err(Error::NotNormalized { norm, tol });
        }
        Ok(DensityMatrix {
            mat: state.outer(state),
        })
    }

    pub fn from_diagonal_probs(probs: &[f64], tol: f64) -> Result<Self, Error> {
        let diag: Vec<C64> = probs.iter().map(|&p| C64::new(p, 0.0)).collect();
        DensityMatrix::new(CMat::from_diag(&diag), tol)
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// Tr(rho^2); 1 for pure states.
    pub fn purity(&self) -> f64 {
        self.mat.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Dominant eigenvector when the state is pure within `tol`.
    pub fn as_pure(&self, tol: f64) -> Option<CVec> {
        if (self.purity() - 1.0).abs() > tol {
            return None;
        }
        let eig = linalg::eigh(&self.mat).ok()?;
        let top = eig.values.len() - 1;
        Some(eig.vectors.col(top))
    }
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2, clamped to [0, 1].
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, Error> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let ea = linalg::eigh(a.matrix())?;
    let sqrt_diag: Vec<C64> = ea
        .values
        .iter()
        .map(|&l| C64::new(l.max(0.0).sqrt(), 0.0))
        .collect();
    let sqrt_a = ea
        .vectors
        .matmul(&CMat::from_diag(&sqrt_diag))
        .matmul(&ea.vectors.dagger());
    let inner = sqrt_a.matmul(b.matrix()).matmul(&sqrt_a);
    let ei = linalg::eigh(&inner)?;
    let root_sum: f64 = ei.values.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

/// Born probability of outcome `alpha`: Tr(M rho M†).
pub fn outcome_probability(
    set: &MeasurementSet,
    rho: &DensityMatrix,
    alpha: usize,
) -> Result<f64, Error> {
    let m = set.operator(alpha)?;
    if rho.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            left: set.dim(),
            right: rho.dim(),
        });
    }
    Ok(m.matmul(rho.matrix()).matmul(&m.dagger()).trace().re)
}

/// Conditional post-measurement state M rho M† / p for outcome `alpha`.
pub fn selective_update(
    set: &MeasurementSet,
    rho: &DensityMatrix,
    alpha: usize,
    p_floor: f64,
) -> Result<DensityMatrix, Error> {
    let p = outcome_probability(set, rho, alpha)?;
    if p < p_floor {
        return Err(Error::ZeroProbabilityBranch {
            outcome: alpha,
            probability: p,
        });
    }
    let m = set.operator(alpha)?;
    let updated = m
        .matmul(rho.matrix())
        .matmul(&m.dagger())
        .scale(C64::new(1.0 / p, 0.0));
    Ok(DensityMatrix::new_unchecked(updated))
}

/// Replaces the operators by M' = T M with unitary T; the channel is
/// unchanged, only the outcome labels and operator mixtures move.
pub fn apply_unitary_mixing(
    set: &MeasurementSet,
    t: &CMat,
    tol: f64,
) -> Result<MeasurementSet, Error> {
    let r = set.outcomes();
    if !t.is_square() || t.rows() != r {
        return Err(Error::DimensionMismatch {
            left: r,
            right: t.rows(),
        });
    }
    let residual = t.unitarity_residual();
    if residual > tol {
        return Err(Error::NotUnitary { residual, tol });
    }
    let d = set.dim();
    let mut operators = Vec::with_capacity(r);
    for alpha in 0..r {
        let mut acc = CMat::zeros(d, d);
        for beta in 0..r {
            acc = acc.add(&set.operators()[beta].scale(t.get(alpha, beta)));
        }
        operators.push(acc);
    }
    Ok(MeasurementSet { dim: d, operators })
}

/// Simultaneous eigenbasis of a validated set: a unitary `basis` whose
/// columns diagonalize every operator, and the r x d coefficient matrix C
/// whose row alpha holds the diagonal of basis† M_alpha basis.
#[derive(Debug, Clone)]
pub struct EigenStructure {
    basis: CMat,
    coefficients: CMat,
}

impl EigenStructure {
    /// Validating constructor for externally supplied structures.
    pub fn new(basis: CMat, coefficients: CMat, tol: f64) -> Result<Self, Error> {
        if !basis.is_square() {
            return Err(Error::NotSquare {
                rows: basis.rows(),
                cols: basis.cols(),
            });
        }
        if coefficients.cols() != basis.rows() {
            return Err(Error::DimensionMismatch {
                left: coefficients.cols(),
                right: basis.rows(),
            });
        }
        let residual = basis.unitarity_residual();
        if residual > tol {
            return Err(Error::NotUnitary { residual, tol });
        }
        for j in 0..coefficients.cols() {
            let norm = coefficients.col(j).norm();
            if (norm - 1.0).abs() > tol {
                return Err(Error::NotNormalized { norm, tol });
            }
        }
        Ok(EigenStructure {
            basis,
            coefficients,
        })
    }

    pub(crate) fn assemble(basis: CMat, coefficients: CMat) -> Self {
        EigenStructure {
            basis,
            coefficients,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn outcomes(&self) -> usize {
        self.coefficients.rows()
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn coefficients(&self) -> &CMat {
        &self.coefficients
    }

    /// Coefficient column c_j, the unit vector attached to eigenvector j.
    pub fn column(&self, j: usize) -> CVec {
        self.coefficients.col(j)
    }
}

const MAX_REFINE_DEPTH: usize = 32;

/// Simultaneously diagonalizes a validated set.
///
/// Diagonalizes a random Hermitian combination
/// `H = sum_alpha x_alpha Herm(M_alpha) + y_alpha AntiHerm(M_alpha)/i`
/// with coefficients drawn from a ChaCha stream seeded by `seed`, then
/// refines inside degenerate eigenvalue clusters by recursing on the
/// operators restricted to the cluster subspace. Deterministic given the
/// seed. Sets that are already diagonal short-circuit to the identity
/// basis so exact inputs stay exact.
pub fn simultaneous_eigenbasis(
    set: &MeasurementSet,
    tol: f64,
    seed: u64,
) -> Result<EigenStructure, Error> {
    validate(set, tol).ensure()?;
    let d = set.dim();
    let r = set.outcomes();

    if set.operators().iter().all(|m| m.off_diagonal_max() <= tol) {
        let coefficients = CMat::from_fn(r, d, |alpha, i| set.operators()[alpha].get(i, i));
        return Ok(EigenStructure::assemble(CMat::identity(d), coefficients));
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut basis = CMat::identity(d);
    refine(set.operators(), &mut basis, 0, d, tol, &mut rng, 0)?;

    for j in 0..d {
        let col = linalg::normalize_column_phase(&basis.col(j));
        for i in 0..d {
            basis.set(i, j, col.get(i));
        }
    }

    let mut worst = 0.0f64;
    let mut coefficients = CMat::zeros(r, d);
    for (alpha, m) in set.operators().iter().enumerate() {
        let rotated = basis.dagger().matmul(m).matmul(&basis);
        worst = worst.max(rotated.off_diagonal_max());
        for i in 0..d {
            coefficients.set(alpha, i, rotated.get(i, i));
        }
    }
    if worst > tol {
        return Err(Error::Diagonalization {
            residual: worst,
            tol,
        });
    }
    Ok(EigenStructure::assemble(basis, coefficients))
}

fn uniform_signed(rng: &mut impl RngCore) -> f64 {
    2.0 * ((rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)) - 1.0
}

fn basis_block(basis: &CMat, lo: usize, hi: usize) -> CMat {
    CMat::from_fn(basis.rows(), hi - lo, |i, j| basis.get(i, lo + j))
}

fn write_block(basis: &mut CMat, lo: usize, block: &CMat) {
    for j in 0..block.cols() {
        for i in 0..basis.rows() {
            basis.set(i, lo + j, block.get(i, j));
        }
    }
}

fn refine(
    ops: &[CMat],
    basis: &mut CMat,
    lo: usize,
    hi: usize,
    tol: f64,
    rng: &mut impl RngCore,
    depth: usize,
) -> Result<(), Error> {
    let k = hi - lo;
    if k <= 1 {
        return Ok(());
    }
    let v = basis_block(basis, lo, hi);
    let restricted: Vec<CMat> = ops
        .iter()
        .map(|m| v.dagger().matmul(m).matmul(&v))
        .collect();
    let worst_offdiag = restricted
        .iter()
        .map(|m| m.off_diagonal_max())
        .fold(0.0, f64::max);
    if worst_offdiag <= tol * 0.5 {
        return Ok(());
    }
    if depth >= MAX_REFINE_DEPTH {
        return Err(Error::Diagonalization {
            residual: worst_offdiag,
            tol,
        });
    }

    let mut combo = CMat::zeros(k, k);
    for m in &restricted {
        let x = uniform_signed(rng);
        let y = uniform_signed(rng);
        combo = combo.add(&m.hermitian_part().scale(C64::new(x, 0.0)));
        combo = combo.add(&m.antihermitian_part_over_i().scale(C64::new(y, 0.0)));
    }
    let Eigh { values, vectors } = linalg::eigh(&combo)?;
    write_block(basis, lo, &v.matmul(&vectors));

    let scale = values.iter().fold(1.0f64, |acc, &x| acc.max(x.abs()));
    let cluster_tol = scale * 1e-8;
    let mut start = 0usize;
    for idx in 1..=k {
        let split = idx == k || (values[idx] - values[idx - 1]).abs() > cluster_tol;
        if split {
            refine(ops, basis, lo + start, lo + idx, tol, rng, depth + 1)?;
            start = idx;
        }
    }
    Ok(())
}

/// Grouping of the coefficient columns into s phase-equivalence classes:
/// index sets A_k, unit representatives, member phases, and the projectors
/// P_k and phased projectors P~_k in the original (computational) basis.
#[derive(Debug, Clone)]
pub struct CanonicalDecomposition {
    groups: Vec<Vec<usize>>,
    representatives: Vec<CVec>,
    phases: Vec<f64>,
    projectors: Vec<CMat>,
    phased_projectors: Vec<CMat>,
}

impl CanonicalDecomposition {
    /// Number of groups s.
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// Index sets A_k over eigenbasis columns, ordered by lowest member.
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    /// Unit representative column of each group (its lowest-index member).
    pub fn representatives(&self) -> &[CVec] {
        &self.representatives
    }

    /// Phase of each eigenbasis column relative to its group
    /// representative; the representative itself has phase 0.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn projectors(&self) -> &[CMat] {
        &self.projectors
    }

    pub fn phased_projectors(&self) -> &[CMat] {
        &self.phased_projectors
    }

    /// Group index of an eigenbasis column.
    pub fn group_of(&self, column: usize) -> usize {
        self.groups
            .iter()
            .position(|g| g.contains(&column))
            .expect("column index within dimension")
    }
}

/// Groups columns i, j together iff |c_i† c_j| > 1 - tol_group, with the
/// representative being each group's lowest-index column and phases
/// phi_j = arg(rep† c_j). Fails with an ambiguity error when the relation
/// is not transitive at this tolerance.
pub fn canonical_decomposition(
    es: &EigenStructure,
    tol_group: f64,
) -> Result<CanonicalDecomposition, Error> {
    let d = es.dim();
    let columns: Vec<CVec> = (0..d).map(|j| es.column(j)).collect();

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut representatives: Vec<CVec> = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        let mut assigned = false;
        for (k, rep) in representatives.iter().enumerate() {
            if rep.dot(col).norm() > 1.0 - tol_group {
                groups[k].push(j);
                assigned = true;
                break;
            }
        }
        if !assigned {
            groups.push(vec![j]);
            representatives.push(col.clone());
        }
    }

    // The relation must be a genuine equivalence at this tolerance:
    // every same-group pair close, every cross-group pair far.
    let group_of = |j: usize| groups.iter().position(|g| g.contains(&j)).unwrap();
    for i in 0..d {
        for j in i + 1..d {
            let overlap = columns[i].dot(&columns[j]).norm();
            let same = group_of(i) == group_of(j);
            if same && overlap <= 1.0 - tol_group {
                return Err(Error::GroupingAmbiguity { i, j, overlap });
            }
            if !same && overlap > 1.0 - tol_group {
                return Err(Error::GroupingAmbiguity { i, j, overlap });
            }
        }
    }

    let mut phases = vec![0.0f64; d];
    for (k, group) in groups.iter().enumerate() {
        for &j in group {
            let phase_factor = representatives[k].dot(&columns[j]);
            let phi = phase_factor.arg();
            phases[j] = phi;
            let rotated = representatives[k].scale(C64::from_polar(1.0, phi));
            let residual = columns[j].sub(&rotated).norm();
            if residual > tol_group {
                return Err(Error::GroupingAmbiguity {
                    i: group[0],
                    j,
                    overlap: phase_factor.norm(),
                });
            }
        }
    }

    let basis = es.basis();
    let mut projectors = Vec::with_capacity(groups.len());
    let mut phased_projectors = Vec::with_capacity(groups.len());
    for group in &groups {
        let mut p = CMat::zeros(d, d);
        let mut pt = CMat::zeros(d, d);
        for &j in group {
            let bj = basis.col(j);
            let outer = bj.outer(&bj);
            p = p.add(&outer);
            pt = pt.add(&outer.scale(C64::from_polar(1.0, phases[j])));
        }
        projectors.push(p);
        phased_projectors.push(pt);
    }

    Ok(CanonicalDecomposition {
        groups,
        representatives,
        phases,
        projectors,
        phased_projectors,
    })
}
