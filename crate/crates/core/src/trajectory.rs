//! Seeded Monte Carlo simulation of sequential selective measurements.
//!
//! Each shot draws its outcomes from a counter-based ChaCha stream keyed by
//! (seed, shot index); round t consumes the t-th word of that stream, so a
//! trajectory is reproducible regardless of how shots are scheduled across
//! workers. Pure initial states use the cheaper vector update
//! M|psi> / sqrt(p); mixed states evolve the full density matrix.

use alloc::vec;
use alloc::vec::Vec;
// f64 math comes from the Float trait in no_std builds; toolchains that
// can see std resolve the same methods inherently and mark this unused.
#[allow(unused_imports)]
use num_traits::Float;
use rand_core::{RngCore, SeedableRng};

use crate::analysis::Analysis;
use crate::error::Error;
use crate::linalg::{CMat, CVec, C64};
use crate::povm::{fidelity, DensityMatrix};
use crate::typicality::{classify_frequency, FrequencyDistribution};

/// One sampled outcome sequence with its conditional end state.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub outcomes: Vec<u32>,
    pub frequency: FrequencyDistribution,
    pub final_state: DensityMatrix,
    pub classified_group: usize,
    pub margin: f64,
    pub log_likelihood: f64,
}

/// A trajectory record plus its conditional-projector fidelity.
#[derive(Debug, Clone)]
pub struct ShotSummary {
    pub record: TrajectoryRecord,
    /// Uhlmann fidelity to the phased-projector target, when the target
    /// has weight in the initial state.
    pub fidelity: Option<f64>,
    /// Trace weight of the target P~_k^m rho0 (P~_k^m)†.
    pub target_weight: f64,
}

fn shot_rng(seed: u64, shot: u64) -> rand_chacha::ChaCha8Rng {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

enum State {
    Pure(CVec),
    Mixed(CMat),
}

impl State {
    fn probabilities(&self, operators: &[CMat]) -> Vec<f64> {
        match self {
            State::Pure(psi) => operators
                .iter()
                .map(|m| m.mul_vec(psi).norm_sqr())
                .collect(),
            State::Mixed(rho) => operators
                .iter()
                .map(|m| m.matmul(rho).matmul(&m.dagger()).trace().re)
                .collect(),
        }
    }

    fn update(&mut self, operator: &CMat, p: f64) {
        match self {
            State::Pure(psi) => {
                let scaled = operator.mul_vec(psi).scale(C64::new(1.0 / p.sqrt(), 0.0));
                let norm = scaled.norm();
                *psi = scaled.scale(C64::new(1.0 / norm, 0.0));
            }
            State::Mixed(rho) => {
                let updated = operator
                    .matmul(rho)
                    .matmul(&operator.dagger())
                    .scale(C64::new(1.0 / p, 0.0));
                *rho = updated;
            }
        }
    }

    fn into_density(self) -> DensityMatrix {
        match self {
            State::Pure(psi) => DensityMatrix::new_unchecked(psi.outer(&psi)),
            State::Mixed(rho) => {
                let tr = rho.trace().re;
                DensityMatrix::new_unchecked(rho.scale(C64::new(1.0 / tr, 0.0)))
            }
        }
    }
}

/// Samples one trajectory of m rounds from the stream (seed, shot).
pub fn run_trajectory(
    analysis: &Analysis,
    rho0: &DensityMatrix,
    m: u64,
    seed: u64,
    shot: u64,
    p_floor: f64,
) -> Result<TrajectoryRecord, Error> {
    if m == 0 {
        return Err(Error::ZeroPower);
    }
    if rho0.dim() != analysis.set().dim() {
        return Err(Error::DimensionMismatch {
            left: analysis.set().dim(),
            right: rho0.dim(),
        });
    }
    let operators = analysis.set().operators();
    let r = operators.len();
    let mut rng = shot_rng(seed, shot);
    let mut state = match rho0.as_pure(1e-12) {
        Some(psi) => State::Pure(psi),
        None => State::Mixed(rho0.matrix().clone()),
    };
    let mut outcomes = Vec::with_capacity(m as usize);
    let mut counts = vec![0u64; r];
    let mut log_likelihood = 0.0f64;

    for _ in 0..m {
        let probs = state.probabilities(operators);
        let u = uniform(&mut rng);
        let mut cumulative = 0.0f64;
        let mut chosen = r - 1;
        for (alpha, &p) in probs.iter().enumerate() {
            cumulative += p.max(0.0);
            if u < cumulative {
                chosen = alpha;
                break;
            }
        }
        let p = probs[chosen];
        if p < p_floor {
            return Err(Error::ZeroProbabilityBranch {
                outcome: chosen,
                probability: p,
            });
        }
        state.update(&operators[chosen], p);
        outcomes.push(chosen as u32);
        counts[chosen] += 1;
        log_likelihood += p.ln();
    }

    let frequency = FrequencyDistribution::new(counts)?;
    let class = classify_frequency(&frequency.probs(), analysis.signatures())?;
    Ok(TrajectoryRecord {
        outcomes,
        frequency,
        final_state: state.into_density(),
        classified_group: class.group,
        margin: class.margin,
        log_likelihood,
    })
}

/// The target state a correctly classified trajectory should end in:
/// P~_k^m rho0 (P~_k^m)† normalized, which is the bare projection
/// P_k rho0 P_k / Tr when the group carries no phases.
pub fn conditional_target(
    analysis: &Analysis,
    group: usize,
    rho0: &DensityMatrix,
    m: u64,
) -> (DensityMatrix, f64) {
    let basis = analysis.eigen().basis();
    let phases = analysis.canon().phases();
    let d = basis.rows();
    let mut projector = CMat::zeros(d, d);
    for &j in &analysis.canon().groups()[group] {
        let bj = basis.col(j);
        let phase = C64::from_polar(1.0, phases[j] * m as f64);
        projector = projector.add(&bj.outer(&bj).scale(phase));
    }
    let raw = projector.matmul(rho0.matrix()).matmul(&projector.dagger());
    let weight = raw.trace().re;
    if weight <= 0.0 {
        return (DensityMatrix::new_unchecked(raw), 0.0);
    }
    (
        DensityMatrix::new_unchecked(raw.scale(C64::new(1.0 / weight, 0.0))),
        weight,
    )
}

/// Uhlmann fidelity between a trajectory's final state and the target of
/// its classified group.
pub fn conditional_projector_fidelity(
    analysis: &Analysis,
    record: &TrajectoryRecord,
    rho0: &DensityMatrix,
    m: u64,
    p_floor: f64,
) -> Result<(f64, f64), Error> {
    let (target, weight) = conditional_target(analysis, record.classified_group, rho0, m);
    if weight < p_floor {
        return Err(Error::NoGroupOverlap {
            group: record.classified_group,
            weight,
        });
    }
    Ok((fidelity(&record.final_state, &target)?, weight))
}

/// One shot end to end: trajectory plus its fidelity check.
pub fn simulate_shot(
    analysis: &Analysis,
    rho0: &DensityMatrix,
    m: u64,
    seed: u64,
    shot: u64,
    p_floor: f64,
) -> Result<ShotSummary, Error> {
    let record = run_trajectory(analysis, rho0, m, seed, shot, p_floor)?;
    match conditional_projector_fidelity(analysis, &record, rho0, m, p_floor) {
        Ok((fidelity, target_weight)) => Ok(ShotSummary {
            record,
            fidelity: Some(fidelity),
            target_weight,
        }),
        Err(Error::NoGroupOverlap { weight, .. }) => Ok(ShotSummary {
            record,
            fidelity: None,
            target_weight: weight,
        }),
        Err(e) => Err(e),
    }
}

/// Aggregate statistics of an ensemble of shots.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EnsembleReport {
    pub shots: u64,
    pub seed: u64,
    pub group_counts: Vec<u64>,
    /// Classified-group fractions among completed shots.
    pub empirical_probs: Vec<f64>,
    /// Mean conditional-projector fidelity per group; absent for groups
    /// without classified shots.
    pub mean_fidelity: Vec<Option<f64>>,
    /// Trajectories that hit a zero-probability branch.
    pub aborted: u64,
}

/// Deterministic reduction of per-shot results, in shot order. Splitting
/// the shots across workers and reducing the ordered results reproduces
/// the sequential report bit for bit.
pub fn reduce_ensemble(
    group_count: usize,
    shots: u64,
    seed: u64,
    results: impl IntoIterator<Item = Result<ShotSummary, Error>>,
) -> Result<EnsembleReport, Error> {
    let mut group_counts = vec![0u64; group_count];
    let mut fidelity_sums = vec![0.0f64; group_count];
    let mut fidelity_counts = vec![0u64; group_count];
    let mut aborted = 0u64;
    for result in results {
        match result {
            Ok(summary) => {
                let g = summary.record.classified_group;
                group_counts[g] += 1;
                if let Some(f) = summary.fidelity {
                    fidelity_sums[g] += f;
                    fidelity_counts[g] += 1;
                }
            }
            Err(Error::ZeroProbabilityBranch { .. }) => aborted += 1,
            Err(e) => return Err(e),
        }
    }
    let completed: u64 = group_counts.iter().sum();
    let empirical_probs = group_counts
        .iter()
        .map(|&c| {
            if completed > 0 {
                c as f64 / completed as f64
            } else {
                0.0
            }
        })
        .collect();
    let mean_fidelity = fidelity_sums
        .iter()
        .zip(&fidelity_counts)
        .map(|(&s, &n)| if n > 0 { Some(s / n as f64) } else { None })
        .collect();
    Ok(EnsembleReport {
        shots,
        seed,
        group_counts,
        empirical_probs,
        mean_fidelity,
        aborted,
    })
}

/// Runs `shots` independent trajectories with per-shot streams derived
/// from (seed, shot index).
pub fn run_ensemble(
    analysis: &Analysis,
    rho0: &DensityMatrix,
    m: u64,
    shots: u64,
    seed: u64,
    p_floor: f64,
) -> Result<EnsembleReport, Error> {
    reduce_ensemble(
        analysis.canon().group_count(),
        shots,
        seed,
        (0..shots).map(|shot| simulate_shot(analysis, rho0, m, seed, shot, p_floor)),
    )
}
