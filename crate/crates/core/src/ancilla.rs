//! Two-outcome measurement pairs from the ancilla-qubit pure-dephasing
//! scheme, polarization and degeneracy analysis, and the bosonic
//! modular-excitation-number construction.
//!
//! The physics enters only through the accumulated phases omega_j of the
//! conditional evolutions U_± = sum_j e^{±i omega_j}|j><j|; nothing here
//! integrates a time-dependent coupling.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
// f64 math comes from the Float trait in no_std builds; toolchains that
// can see std resolve the same methods inherently and mark this unused.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::linalg::{CMat, C64};
use crate::povm::MeasurementSet;

/// Spectrum and rotation phases defining one measurement round: the ancilla
/// is prepared with rotation phase `phi1`, dephases against the system for
/// accumulated phases `spectrum`, and is read out with rotation phase
/// `phi2`. Only the difference dphi = phi1 - phi2 enters the operators.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingScheme {
    spectrum: Vec<f64>,
    phi1: f64,
    phi2: f64,
    /// Exchange the two outcome labels of the returned pair; the physical
    /// labeling of ancilla outcomes is conventional.
    pub swap_outcomes: bool,
}

impl DephasingScheme {
    pub fn new(spectrum: Vec<f64>, phi1: f64, phi2: f64) -> Result<Self, Error> {
        if spectrum.is_empty() {
            return Err(Error::ShapeMismatch {
                rows: 0,
                cols: 0,
                len: 0,
            });
        }
        if spectrum.iter().any(|w| !w.is_finite()) || !phi1.is_finite() || !phi2.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(DephasingScheme {
            spectrum,
            phi1,
            phi2,
            swap_outcomes: false,
        })
    }

    pub fn from_dphi(spectrum: Vec<f64>, dphi: f64) -> Result<Self, Error> {
        DephasingScheme::new(spectrum, dphi, 0.0)
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    pub fn dphi(&self) -> f64 {
        self.phi1 - self.phi2
    }
}

/// The measurement pair of the scheme, diagonal in the given basis:
/// row entries (e^{i w_j} -+ e^{i(dphi - w_j)})/2 with the first outcome
/// carrying the minus sign.
pub fn build_measurement_pair(scheme: &DephasingScheme) -> MeasurementSet {
    let dphi = scheme.dphi();
    let d = scheme.dim();
    let mut coeff = CMat::zeros(2, d);
    for (j, &w) in scheme.spectrum.iter().enumerate() {
        let a = C64::from_polar(1.0, w);
        let b = C64::from_polar(1.0, dphi - w);
        let plus = (a - b) * C64::new(0.5, 0.0);
        let minus = (a + b) * C64::new(0.5, 0.0);
        let (row0, row1) = if scheme.swap_outcomes {
            (minus, plus)
        } else {
            (plus, minus)
        };
        coeff.set(0, j, row0);
        coeff.set(1, j, row1);
    }
    MeasurementSet::from_diagonal_coefficients(&coeff)
}

/// Stinespring pair for an arbitrary normalized ancilla preparation
/// (amplitudes in the sigma_z basis) and an arbitrary unitary readout basis
/// whose columns are |v_+> and |v_->:
/// M_alpha = sum_j <v_alpha| e^{i sigma_z w_j} |psi> |j><j|.
pub fn general_measurement_pair(
    spectrum: &[f64],
    preparation: [C64; 2],
    readout: &CMat,
    tol: f64,
) -> Result<MeasurementSet, Error> {
    if spectrum.is_empty() {
        return Err(Error::ShapeMismatch {
            rows: 0,
            cols: 0,
            len: 0,
        });
    }
    let norm = (preparation[0].norm_sqr() + preparation[1].norm_sqr()).sqrt();
    if (norm - 1.0).abs() > tol {
        return Err(Error::NotNormalized { norm, tol });
    }
    if !readout.is_square() || readout.rows() != 2 {
        return Err(Error::NotSquare {
            rows: readout.rows(),
            cols: readout.cols(),
        });
    }
    let residual = readout.unitarity_residual();
    if residual > tol {
        return Err(Error::NotUnitary { residual, tol });
    }
    let d = spectrum.len();
    let mut coeff = CMat::zeros(2, d);
    for (j, &w) in spectrum.iter().enumerate() {
        let evolved = [
            C64::from_polar(1.0, w) * preparation[0],
            C64::from_polar(1.0, -w) * preparation[1],
        ];
        for alpha in 0..2 {
            let amp = readout.get(0, alpha).conj() * evolved[0]
                + readout.get(1, alpha).conj() * evolved[1];
            coeff.set(alpha, j, amp);
        }
    }
    Ok(MeasurementSet::from_diagonal_coefficients(&coeff))
}

/// The readout basis of the printed scheme, |v_±> = R_{phi2}(-pi/2)|±>.
pub fn scheme_readout(phi2: f64) -> CMat {
    let h = C64::new(0.5f64.sqrt(), 0.0);
    let i = C64::new(0.0, 1.0);
    // Columns (1, i e^{i phi2})/sqrt 2 and (i e^{-i phi2}, 1)/sqrt 2.
    CMat::from_fn(2, 2, |row, col| match (row, col) {
        (0, 0) => h,
        (1, 0) => i * C64::from_polar(1.0, phi2) * h,
        (0, 1) => i * C64::from_polar(1.0, -phi2) * h,
        _ => h,
    })
}

/// The ancilla preparation of the printed scheme, R_{phi1}(pi/2)|+>.
pub fn scheme_preparation(phi1: f64) -> [C64; 2] {
    let h = 0.5f64.sqrt();
    [
        C64::new(h, 0.0),
        C64::new(0.0, -1.0) * C64::from_polar(h, phi1),
    ]
}

/// Polarization per eigenstate, df_j = f_{-,j} - f_{+,j} with the printed
/// (unswapped) outcome labels; equals cos(2 w_j - dphi).
pub fn polarization_table(scheme: &DephasingScheme) -> Vec<f64> {
    let dphi = scheme.dphi();
    scheme
        .spectrum
        .iter()
        .map(|&w| {
            let a = C64::from_polar(1.0, w);
            let b = C64::from_polar(1.0, dphi - w);
            let f_plus = ((a - b) * C64::new(0.5, 0.0)).norm_sqr();
            let f_minus = ((a + b) * C64::new(0.5, 0.0)).norm_sqr();
            f_minus - f_plus
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum DegeneracyCase {
    /// w_j + w_k = dphi + n pi: the two eigenstates share their typical
    /// sequences; a different dphi separates them.
    I,
    /// w_j - w_k = n pi: the eigenstates sit in the same canonical group
    /// and the typical sequences induce P_j + (-1)^n P_k.
    II,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DegeneratePair {
    pub j: usize,
    pub k: usize,
    pub case: DegeneracyCase,
    pub n: i64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DegeneracyRecord {
    pub pairs: Vec<DegeneratePair>,
}

impl DegeneracyRecord {
    pub fn pairs_of_case(&self, case: DegeneracyCase) -> impl Iterator<Item = &DegeneratePair> {
        self.pairs.iter().filter(move |p| p.case == case)
    }

    pub fn contains_pair(&self, j: usize, k: usize, case: DegeneracyCase) -> bool {
        self.pairs
            .iter()
            .any(|p| p.j == j && p.k == k && p.case == case)
    }
}

/// Finds every pair of spectrum entries with equal polarization and
/// classifies it: case I when w_j + w_k = dphi + n pi, case II when
/// w_k - w_j = n pi (either may hold; both are recorded if both do).
pub fn degeneracy_analysis(scheme: &DephasingScheme, tol: f64) -> DegeneracyRecord {
    let dphi = scheme.dphi();
    let spectrum = scheme.spectrum();
    let max_omega = spectrum.iter().fold(0.0f64, |acc, &w| acc.max(w.abs()));
    let n_cap = 4 * (max_omega / core::f64::consts::PI).ceil() as i64 + 2;
    let mut pairs = Vec::new();
    for j in 0..spectrum.len() {
        for k in j + 1..spectrum.len() {
            let case1 = nearest_multiple(spectrum[j] + spectrum[k] - dphi, n_cap);
            if let Some((n, residual)) = case1 {
                if residual < tol {
                    pairs.push(DegeneratePair {
                        j,
                        k,
                        case: DegeneracyCase::I,
                        n,
                        note: Some(String::from(
                            "typical sequences for the two projections coincide; choose a different dphi",
                        )),
                    });
                }
            }
            let case2 = nearest_multiple(spectrum[k] - spectrum[j], n_cap);
            if let Some((n, residual)) = case2 {
                if residual < tol {
                    pairs.push(DegeneratePair {
                        j,
                        k,
                        case: DegeneracyCase::II,
                        n,
                        note: None,
                    });
                }
            }
        }
    }
    DegeneracyRecord { pairs }
}

fn nearest_multiple(x: f64, n_cap: i64) -> Option<(i64, f64)> {
    let n = libm::round(x / core::f64::consts::PI) as i64;
    if n.abs() > n_cap {
        return None;
    }
    Some((n, (x - n as f64 * core::f64::consts::PI).abs()))
}

/// The bosonic modular-excitation scheme: ancilla dispersively coupled to a
/// truncated mode, with the 2N modular projectors P_{2N}^l restricted to
/// the truncation.
#[derive(Debug, Clone)]
pub struct BosonicModularScheme {
    modulus: usize,
    truncation: usize,
    dphi: f64,
    spectrum: Vec<f64>,
    modular_projectors: Vec<CMat>,
}

impl BosonicModularScheme {
    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn dphi(&self) -> f64 {
        self.dphi
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn modular_projectors(&self) -> &[CMat] {
        &self.modular_projectors
    }

    pub fn dephasing_scheme(&self) -> DephasingScheme {
        DephasingScheme::from_dphi(self.spectrum.clone(), self.dphi).expect("finite spectrum")
    }
}

/// Fock truncation that populates every modular class four times.
pub fn default_truncation(n: usize) -> usize {
    8 * n.max(1)
}

/// The linear dephasing spectrum of the dispersive coupling at the modular
/// working point. For N >= 2 this is w_n = n pi / N. At N = 1 the full
/// period makes the two conditional evolutions coincide (e^{±i n pi} are
/// equal) and the pair carries no information, so the parity scheme runs
/// at the half period, w_n = n pi / 2.
pub fn modular_spectrum(n: usize, truncation: usize) -> Vec<f64> {
    let divisor = if n <= 1 { 2.0 } else { n as f64 };
    (0..truncation)
        .map(|k| k as f64 * core::f64::consts::PI / divisor)
        .collect()
}

/// Builds the modular scheme and its measurement pair. `truncation` must
/// cover every modular class at least once (>= 2N).
pub fn bosonic_modular_scheme(
    n: usize,
    truncation: usize,
    dphi: f64,
) -> Result<(BosonicModularScheme, MeasurementSet), Error> {
    let n = n.max(1);
    let minimum = 2 * n;
    if truncation < minimum {
        return Err(Error::TruncationTooSmall {
            truncation,
            minimum,
        });
    }
    let spectrum = modular_spectrum(n, truncation);
    let scheme = DephasingScheme::from_dphi(spectrum.clone(), dphi)?;
    let pair = build_measurement_pair(&scheme);

    let classes = 2 * n;
    let mut modular_projectors = Vec::with_capacity(classes);
    for l in 0..classes {
        let diag: Vec<C64> = (0..truncation)
            .map(|fock| {
                if fock % classes == l {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        modular_projectors.push(CMat::from_diag(&diag));
    }

    Ok((
        BosonicModularScheme {
            modulus: n,
            truncation,
            dphi,
            spectrum,
            modular_projectors,
        },
        pair,
    ))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OptimalDphi {
    pub dphi: f64,
    /// Smallest pairwise polarization split the choice achieves.
    pub min_polarization_gap: f64,
}

/// The prescribed readout offset: 0 for the parity scheme (N = 1), and
/// pi/(2N) for N >= 2 where it breaks the cosine's reflection symmetry so
/// all N polarizations stay distinct.
pub fn optimal_dphi(n: usize) -> OptimalDphi {
    let n = n.max(1);
    let dphi = if n == 1 {
        0.0
    } else {
        core::f64::consts::PI / (2.0 * n as f64)
    };
    let class_polarizations: Vec<f64> = if n == 1 {
        vec![1.0, -1.0]
    } else {
        (0..n)
            .map(|k| (2.0 * k as f64 * core::f64::consts::PI / n as f64 - dphi).cos())
            .collect()
    };
    let mut min_gap = f64::INFINITY;
    for j in 0..class_polarizations.len() {
        for k in j + 1..class_polarizations.len() {
            min_gap = min_gap.min((class_polarizations[j] - class_polarizations[k]).abs());
        }
    }
    OptimalDphi {
        dphi,
        min_polarization_gap: min_gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::channel_matrix;
    use crate::linalg::{CVec, I, ONE, ZERO};
    use crate::povm::validate;
    use crate::typicality::group_signatures;
    use crate::{Analysis, AnalysisParams, DEFAULT_VALIDATION_TOL};
    use rand_core::{RngCore, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn projective_pair_from_quarter_spectrum() {
        let scheme =
            DephasingScheme::from_dphi(vec![0.0, core::f64::consts::FRAC_PI_2], 0.0).unwrap();
        let set = build_measurement_pair(&scheme);
        let expected_plus = CMat::from_diag(&[ZERO, I]);
        let expected_minus = CMat::from_diag(&[ONE, ZERO]);
        assert!(set.operators()[0].max_abs_diff(&expected_plus) < 1e-15);
        assert!(set.operators()[1].max_abs_diff(&expected_minus) < 1e-15);
        let report = validate(&set, DEFAULT_VALIDATION_TOL);
        assert!(report.passed());
        assert!(report.completeness_residual < 1e-14);
    }

    #[test]
    fn flat_spectrum_gives_trivial_channel() {
        let scheme = DephasingScheme::from_dphi(vec![0.0, 0.0, 0.0], 0.8).unwrap();
        let set = build_measurement_pair(&scheme);
        for m in set.operators() {
            // Proportional to the identity.
            let z = m.get(0, 0);
            assert!(m.max_abs_diff(&CMat::identity(3).scale(z)) < 1e-15);
        }
        let analysis = Analysis::new(set, AnalysisParams::default()).unwrap();
        assert_eq!(analysis.canon().group_count(), 1);
    }

    #[test]
    fn weak_pair_signatures() {
        let theta = 0.3f64;
        let scheme = DephasingScheme::from_dphi(vec![0.0, theta], 0.0).unwrap();
        let set = build_measurement_pair(&scheme);
        let analysis = Analysis::new(set, AnalysisParams::default()).unwrap();
        let sigs = group_signatures(analysis.canon());
        assert_eq!(sigs.len(), 2);
        assert!((sigs[0].probs()[0] - 0.0).abs() < 1e-15);
        assert!((sigs[0].probs()[1] - 1.0).abs() < 1e-15);
        assert!((sigs[1].probs()[0] - theta.sin().powi(2)).abs() < 1e-15);
        assert!((sigs[1].probs()[1] - theta.cos().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn swapped_labels_exchange_operators() {
        let mut scheme = DephasingScheme::from_dphi(vec![0.0, 0.4], 0.1).unwrap();
        let plain = build_measurement_pair(&scheme);
        scheme.swap_outcomes = true;
        let swapped = build_measurement_pair(&scheme);
        assert_eq!(plain.operators()[0], swapped.operators()[1]);
        assert_eq!(plain.operators()[1], swapped.operators()[0]);
    }

    #[test]
    fn completeness_is_exact_for_random_schemes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let mut uniform = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let mut worst_completeness = 0.0f64;
        let mut worst_polarization = 0.0f64;
        for _ in 0..1000 {
            let d = 2 + (uniform() * 4.0) as usize;
            let spectrum: Vec<f64> = (0..d).map(|_| (uniform() - 0.5) * 20.0).collect();
            let dphi = (uniform() - 0.5) * 20.0;
            let scheme = DephasingScheme::from_dphi(spectrum.clone(), dphi).unwrap();
            let set = build_measurement_pair(&scheme);
            let report = validate(&set, DEFAULT_VALIDATION_TOL);
            worst_completeness = worst_completeness.max(report.completeness_residual);
            for (j, df) in polarization_table(&scheme).into_iter().enumerate() {
                worst_polarization =
                    worst_polarization.max((df - (2.0 * spectrum[j] - dphi).cos()).abs());
            }
        }
        assert!(
            worst_completeness < 1e-14,
            "completeness {worst_completeness}"
        );
        assert!(
            worst_polarization < 1e-12,
            "polarization {worst_polarization}"
        );
    }

    #[test]
    fn general_pair_reproduces_printed_scheme_up_to_outcome_phase() {
        let spectrum = [0.3, 1.2, -0.7];
        let (phi1, phi2) = (0.9, 0.25);
        let scheme = DephasingScheme::new(spectrum.to_vec(), phi1, phi2).unwrap();
        let printed = build_measurement_pair(&scheme);
        let general = general_measurement_pair(
            &spectrum,
            scheme_preparation(phi1),
            &scheme_readout(phi2),
            1e-12,
        )
        .unwrap();
        // The plus operator matches entrywise; the minus operator carries
        // the readout's global phase -i e^{i phi2}, which the printed form
        // drops. Physically both label the same measurement.
        assert!(general.operators()[0].max_abs_diff(&printed.operators()[0]) < 1e-14);
        let phase = C64::new(0.0, -1.0) * C64::from_polar(1.0, phi2);
        let rephased = printed.operators()[1].scale(phase);
        assert!(general.operators()[1].max_abs_diff(&rephased) < 1e-14);
        let ch_a = channel_matrix(&printed, 1e-9).unwrap();
        let ch_b = channel_matrix(&general, 1e-9).unwrap();
        assert!(ch_a.matrix().max_abs_diff(ch_b.matrix()) < 1e-13);
    }

    #[test]
    fn sigma_z_eigenstate_preparation_learns_nothing() {
        let spectrum = [0.3, 1.2];
        let set =
            general_measurement_pair(&spectrum, [ONE, ZERO], &CMat::identity(2), 1e-12).unwrap();
        // First operator is the conditional unitary, second vanishes.
        for (j, &w) in spectrum.iter().enumerate() {
            assert!((set.operators()[0].get(j, j) - C64::from_polar(1.0, w)).norm() < 1e-15);
        }
        assert!(set.operators()[1].max_abs() < 1e-15);
    }

    #[test]
    fn rotated_readout_is_unitary_mixing() {
        let spectrum = [0.2, 0.9, 1.7];
        let (phi1, phi2) = (0.4, -0.3);
        let angle = 0.6f64;
        let t = CMat::new(
            2,
            2,
            vec![
                c(angle.cos(), 0.0),
                c(-angle.sin(), 0.0),
                c(angle.sin(), 0.0),
                c(angle.cos(), 0.0),
            ],
        )
        .unwrap();
        let baseline = general_measurement_pair(
            &spectrum,
            scheme_preparation(phi1),
            &scheme_readout(phi2),
            1e-12,
        )
        .unwrap();
        let rotated = general_measurement_pair(
            &spectrum,
            scheme_preparation(phi1),
            &scheme_readout(phi2).matmul(&t),
            1e-12,
        )
        .unwrap();
        let ch_a = channel_matrix(&baseline, 1e-9).unwrap();
        let ch_b = channel_matrix(&rotated, 1e-9).unwrap();
        assert!(ch_a.matrix().max_abs_diff(ch_b.matrix()) < 1e-12);
    }

    #[test]
    fn general_pair_rejects_bad_inputs() {
        let err = general_measurement_pair(&[0.1], [ONE, ONE], &CMat::identity(2), 1e-9);
        assert!(matches!(err, Err(Error::NotNormalized { .. })));
        let skew = CMat::new(2, 2, vec![ONE, ONE, ZERO, ONE]).unwrap();
        let err = general_measurement_pair(&[0.1], [ONE, ZERO], &skew, 1e-9);
        assert!(matches!(err, Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn polarization_examples() {
        let scheme = DephasingScheme::from_dphi(vec![0.0], 0.0).unwrap();
        assert!((polarization_table(&scheme)[0] - 1.0).abs() < 1e-15);

        // Parity scheme: alternating +1, -1 per Fock level, exactly.
        let (bosonic, _) = bosonic_modular_scheme(1, 8, 0.0).unwrap();
        let table = polarization_table(&bosonic.dephasing_scheme());
        for (n, df) in table.iter().enumerate() {
            let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(*df, expected, "level {n}");
        }

        // N = 2 at the prescribed offset: cos((2k - 1/2) pi / N).
        let (bosonic, _) = bosonic_modular_scheme(2, 8, optimal_dphi(2).dphi).unwrap();
        let table = polarization_table(&bosonic.dephasing_scheme());
        let magnitude = 0.5f64.sqrt();
        for (n, df) in table.iter().enumerate() {
            let expected = if n % 2 == 0 { magnitude } else { -magnitude };
            assert!((df - expected).abs() < 1e-12, "level {n}");
        }
    }

    #[test]
    fn degeneracy_case_i_detected() {
        let dphi = 0.5;
        let w0 = 0.2;
        let w1 = dphi - w0 + core::f64::consts::PI;
        let scheme = DephasingScheme::from_dphi(vec![w0, w1], dphi).unwrap();
        let record = degeneracy_analysis(&scheme, 1e-9);
        assert!(record.contains_pair(0, 1, DegeneracyCase::I));
        let pair = record.pairs_of_case(DegeneracyCase::I).next().unwrap();
        assert_eq!(pair.n, 1);
        assert!(pair.note.is_some());
        // Equal polarizations, as the relation demands.
        let table = polarization_table(&scheme);
        assert!((table[0] - table[1]).abs() < 1e-12);
    }

    #[test]
    fn degeneracy_case_ii_detected() {
        let scheme =
            DephasingScheme::from_dphi(vec![0.2, 0.2 + core::f64::consts::PI], 0.9).unwrap();
        let record = degeneracy_analysis(&scheme, 1e-9);
        assert!(record.contains_pair(0, 1, DegeneracyCase::II));
        let pair = record.pairs_of_case(DegeneracyCase::II).next().unwrap();
        assert_eq!(pair.n, 1);
    }

    #[test]
    fn incommensurate_spectrum_has_no_degeneracies() {
        let scheme = DephasingScheme::from_dphi(vec![0.21, 0.93, 1.57], 0.11).unwrap();
        assert!(degeneracy_analysis(&scheme, 1e-9).pairs.is_empty());
    }

    #[test]
    fn case_ii_pairs_match_canonical_groups() {
        let pi = core::f64::consts::PI;
        let scheme =
            DephasingScheme::from_dphi(vec![0.3, 0.3 + pi, 1.1, 0.3 + 2.0 * pi], 0.7).unwrap();
        let record = degeneracy_analysis(&scheme, 1e-8);
        let analysis =
            Analysis::new(build_measurement_pair(&scheme), AnalysisParams::default()).unwrap();
        for j in 0..4 {
            for k in j + 1..4 {
                let same_group = analysis.canon().group_of(j) == analysis.canon().group_of(k);
                let case_ii = record.contains_pair(j, k, DegeneracyCase::II);
                assert_eq!(same_group, case_ii, "pair ({j},{k})");
            }
        }
    }

    #[test]
    fn parity_scheme_groups_even_and_odd() {
        let (_, set) = bosonic_modular_scheme(1, 8, 0.0).unwrap();
        let analysis = Analysis::new(set, AnalysisParams::default()).unwrap();
        assert_eq!(analysis.canon().group_count(), 2);
        assert_eq!(analysis.canon().groups()[0], [0, 2, 4, 6]);
        assert_eq!(analysis.canon().groups()[1], [1, 3, 5, 7]);
        let sigs = analysis.signatures();
        assert!((sigs[0].probs()[1] - 1.0).abs() < 1e-14);
        assert!((sigs[1].probs()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn modular_two_scheme_structure() {
        let (scheme, set) = bosonic_modular_scheme(2, 8, optimal_dphi(2).dphi).unwrap();
        let analysis = Analysis::new(set, AnalysisParams::default()).unwrap();
        assert_eq!(analysis.canon().group_count(), 2);
        assert_eq!(analysis.canon().groups()[0], [0, 2, 4, 6]);
        assert_eq!(analysis.canon().groups()[1], [1, 3, 5, 7]);
        // Phases alternate 0, pi inside each group.
        for group in analysis.canon().groups() {
            for (pos, &j) in group.iter().enumerate() {
                let expected = if pos % 2 == 0 {
                    0.0
                } else {
                    core::f64::consts::PI
                };
                let phi = analysis.canon().phases()[j].abs();
                assert!((phi - expected).abs() < 1e-12, "column {j}");
            }
        }
        // Modular projectors resolve the identity and are orthogonal.
        let mut sum = CMat::zeros(8, 8);
        for p in scheme.modular_projectors() {
            sum = sum.add(p);
            assert!(p.matmul(p).max_abs_diff(p) < 1e-15);
        }
        assert_eq!(sum, CMat::identity(8));
        for (l, p) in scheme.modular_projectors().iter().enumerate() {
            for q in scheme.modular_projectors().iter().skip(l + 1) {
                assert!(p.matmul(q).max_abs() < 1e-15);
            }
        }
    }

    #[test]
    fn modular_hs_points_and_parity_of_asymptotes() {
        use crate::channel::{asymptotic_channel, classify_hs_points};
        let (_, set) = bosonic_modular_scheme(2, 8, optimal_dphi(2).dphi).unwrap();
        let analysis = Analysis::new(set, AnalysisParams::default()).unwrap();
        let cls = classify_hs_points(analysis.canon(), 1e-9);
        // Inside each modular group the phases alternate 0, pi, so half of
        // the same-group pairs are fixed, half rotate; cross-group decays.
        assert_eq!(cls.fixed.len(), 16);
        assert_eq!(cls.rotating.len(), 16);
        assert_eq!(cls.decaying.len(), 32);
        for &(_, _, phi) in &cls.rotating {
            assert!((phi.abs() - core::f64::consts::PI).abs() < 1e-12);
        }

        // Odd rounds carry the intra-group unitary; even rounds land on the
        // plain modular projection.
        let es = analysis.eigen();
        let odd = asymptotic_channel(es, analysis.canon(), 1);
        let even = asymptotic_channel(es, analysis.canon(), 2);
        assert!(odd.matrix().max_abs_diff(even.matrix()) > 1.9);
        let odd3 = asymptotic_channel(es, analysis.canon(), 3);
        let even200 = asymptotic_channel(es, analysis.canon(), 200);
        assert!(odd.matrix().max_abs_diff(odd3.matrix()) < 1e-12);
        assert!(even.matrix().max_abs_diff(even200.matrix()) < 1e-12);
        // The intra-group unitaries square to the group projections.
        for (k, pt) in analysis.canon().phased_projectors().iter().enumerate() {
            let squared = pt.matmul(pt);
            assert!(squared.max_abs_diff(&analysis.canon().projectors()[k]) < 1e-12);
        }
    }

    #[test]
    fn modular_three_polarizations() {
        let (scheme, _) = bosonic_modular_scheme(3, 12, optimal_dphi(3).dphi).unwrap();
        let table = polarization_table(&scheme.dephasing_scheme());
        let pi = core::f64::consts::PI;
        for (n, df) in table.iter().enumerate() {
            let k = (n % 3) as f64;
            let expected = ((2.0 * k - 0.5) * pi / 3.0).cos();
            assert!((df - expected).abs() < 1e-12, "level {n}");
        }
        let distinct = [table[0], table[1], table[2]];
        assert!((distinct[0] - distinct[1]).abs() > 0.5);
        assert!((distinct[1] - distinct[2]).abs() > 0.5);
    }

    #[test]
    fn truncation_must_cover_every_class() {
        assert!(matches!(
            bosonic_modular_scheme(3, 5, 0.0),
            Err(Error::TruncationTooSmall { minimum: 6, .. })
        ));
        assert_eq!(default_truncation(3), 24);
    }

    #[test]
    fn optimal_dphi_prescriptions() {
        let n1 = optimal_dphi(1);
        assert_eq!(n1.dphi, 0.0);
        assert!((n1.min_polarization_gap - 2.0).abs() < 1e-15);

        let n2 = optimal_dphi(2);
        assert!((n2.dphi - core::f64::consts::FRAC_PI_4).abs() < 1e-15);

        let n4 = optimal_dphi(4);
        assert!((n4.dphi - core::f64::consts::PI / 8.0).abs() < 1e-15);
        let pi = core::f64::consts::PI;
        let expected_gap = (0..4)
            .flat_map(|j| (0..4).map(move |k| (j, k)))
            .filter(|&(j, k)| j < k)
            .map(|(j, k)| {
                let df = |q: usize| ((2.0 * q as f64 - 0.5) * pi / 4.0).cos();
                (df(j) - df(k)).abs()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((n4.min_polarization_gap - expected_gap).abs() < 1e-12);
    }

    #[test]
    fn scheme_state_vector_is_normalized() {
        let prep = scheme_preparation(0.37);
        let norm = CVec::from(prep.to_vec()).norm();
        assert!((norm - 1.0).abs() < 1e-15);
        assert!(scheme_readout(1.3).unitarity_residual() < 1e-15);
    }
}
