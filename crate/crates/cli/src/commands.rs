//! The seven subcommands. Each returns the process exit code: 0 for
//! success, 1 for numeric failures, with structural problems surfacing as
//! errors mapped to exit 2 in main.

use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;

use seqpovm_core::ancilla::{
    bosonic_modular_scheme, build_measurement_pair, default_truncation, optimal_dphi,
    DephasingScheme,
};
use seqpovm_core::channel::{
    classify_hs_points, distance_to_asymptote, spectral_gap, HsPointClassification,
};
use seqpovm_core::povm::{validate, ValidationReport};
use seqpovm_core::trajectory::{reduce_ensemble, simulate_shot, EnsembleReport, ShotSummary};
use seqpovm_core::typicality::{
    relative_entropy, sequence_weight_exact, sequence_weight_stirling, simplex_grid,
    simplex_grid_len, typicality_report, FrequencyDistribution, GroupSignature,
};
use seqpovm_core::{Analysis, AnalysisParams, CMat, CVec, Error as CoreError, MeasurementSet};

use crate::input;
use crate::output::{csv_float, csv_writer, emit_json};

pub struct AnalysisFlags {
    pub tol: f64,
    pub group_tol: f64,
    pub diag_seed: u64,
}

impl AnalysisFlags {
    fn params(&self) -> AnalysisParams {
        AnalysisParams {
            tol: self.tol,
            group_tol: self.group_tol,
            diag_seed: self.diag_seed,
        }
    }
}

pub fn cmd_validate(input: Option<&PathBuf>, output: Option<&PathBuf>, tol: f64) -> Result<i32> {
    let set = input::read_measurement_set(input)?;
    let report = validate(&set, tol);
    emit_json(&report, output)?;
    Ok(if report.passed() { 0 } else { 1 })
}

#[derive(Serialize)]
struct DecomposeReport<'a> {
    dim: usize,
    outcomes: usize,
    s: usize,
    groups: &'a [Vec<usize>],
    cardinalities: Vec<usize>,
    phases: &'a [f64],
    representatives: &'a [CVec],
    projectors: &'a [CMat],
    phased_projectors: &'a [CMat],
    basis: &'a CMat,
    coefficients: &'a CMat,
    signatures: Vec<Vec<f64>>,
    validation: ValidationReport,
}

pub fn cmd_decompose(
    input: Option<&PathBuf>,
    output: Option<&PathBuf>,
    flags: &AnalysisFlags,
) -> Result<i32> {
    let set = input::read_measurement_set(input)?;
    let analysis = Analysis::new(set, flags.params())?;
    let report = DecomposeReport {
        dim: analysis.set().dim(),
        outcomes: analysis.set().outcomes(),
        s: analysis.canon().group_count(),
        groups: analysis.canon().groups(),
        cardinalities: analysis.canon().cardinalities(),
        phases: analysis.canon().phases(),
        representatives: analysis.canon().representatives(),
        projectors: analysis.canon().projectors(),
        phased_projectors: analysis.canon().phased_projectors(),
        basis: analysis.eigen().basis(),
        coefficients: analysis.eigen().coefficients(),
        signatures: analysis
            .signatures()
            .iter()
            .map(|s| s.probs().to_vec())
            .collect(),
        validation: analysis.validation_report(),
    };
    emit_json(&report, output)?;
    Ok(0)
}

#[derive(Serialize)]
struct ChannelReport {
    m: u64,
    distance_to_asymptote: f64,
    gap: Option<f64>,
    classification: HsPointClassification,
}

pub fn cmd_channel(
    input: Option<&PathBuf>,
    output: Option<&PathBuf>,
    flags: &AnalysisFlags,
    m: u64,
) -> Result<i32> {
    let set = input::read_measurement_set(input)?;
    let analysis = Analysis::new(set, flags.params())?;
    let gap = match spectral_gap(analysis.canon()) {
        Ok(g) => Some(g),
        Err(CoreError::NoSpectralGap) => None,
        Err(e) => return Err(e.into()),
    };
    let report = ChannelReport {
        m,
        distance_to_asymptote: distance_to_asymptote(analysis.eigen(), analysis.canon(), m)?,
        gap,
        classification: classify_hs_points(analysis.canon(), flags.tol),
    };
    emit_json(&report, output)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_typicality(
    input: Option<&PathBuf>,
    output: Option<&PathBuf>,
    flags: &AnalysisFlags,
    m: u64,
    eta: f64,
    delta: f64,
    cap: u64,
    stirling: bool,
    csv: Option<&PathBuf>,
) -> Result<i32> {
    let set = input::read_measurement_set(input)?;
    let analysis = Analysis::new(set, flags.params())?;
    let report = typicality_report(analysis.signatures(), m, eta, delta, cap)?;
    if let Some(path) = csv {
        write_grid_csv(path, analysis.signatures(), m, delta, cap, stirling)?;
    }
    emit_json(&report, output)?;
    Ok(0)
}

/// One row per grid point: the counts, the neighborhood it belongs to (if
/// any), and its weight under every group signature.
fn write_grid_csv(
    path: &std::path::Path,
    signatures: &[GroupSignature],
    m: u64,
    delta: f64,
    cap: u64,
    stirling: bool,
) -> Result<()> {
    let r = signatures[0].outcomes();
    let points = simplex_grid_len(m, r).unwrap_or(u128::MAX);
    if points > cap as u128 {
        return Err(CoreError::GridTooLarge { points, cap }.into());
    }
    let mut w = csv_writer(path)?;
    let mut header: Vec<String> = (0..r).map(|i| format!("count_{i}")).collect();
    header.push("neighborhood".to_string());
    for k in 0..signatures.len() {
        header.push(format!("weight_{k}"));
    }
    writeln!(w, "{}", header.join(","))?;
    for counts in simplex_grid(m, r) {
        let fd = FrequencyDistribution::new(counts)?;
        let probs = fd.probs();
        let mut member = String::new();
        for (k, sig) in signatures.iter().enumerate() {
            if relative_entropy(&probs, sig.probs())? <= delta {
                member = k.to_string();
                break;
            }
        }
        let mut row: Vec<String> = fd.counts().iter().map(|c| c.to_string()).collect();
        row.push(member);
        for sig in signatures {
            let weight = if stirling {
                sequence_weight_stirling(&fd, sig)?
            } else {
                sequence_weight_exact(&fd, sig)?
            };
            row.push(csv_float(weight));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_simulate(
    input: Option<&PathBuf>,
    output: Option<&PathBuf>,
    flags: &AnalysisFlags,
    state: &str,
    m: u64,
    shots: u64,
    seed: u64,
    p_floor: f64,
    csv: Option<&PathBuf>,
    threads: Option<usize>,
) -> Result<i32> {
    let set = input::read_measurement_set(input)?;
    let analysis = Analysis::new(set, flags.params())?;
    let rho0 = input::read_state(state, flags.tol)?;

    let results: Vec<Result<ShotSummary, CoreError>> = match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| anyhow::anyhow!("building thread pool: {e}"))?;
            pool.install(|| {
                (0..shots)
                    .into_par_iter()
                    .map(|shot| simulate_shot(&analysis, &rho0, m, seed, shot, p_floor))
                    .collect()
            })
        }
        None => (0..shots)
            .into_par_iter()
            .map(|shot| simulate_shot(&analysis, &rho0, m, seed, shot, p_floor))
            .collect(),
    };

    if let Some(path) = csv {
        write_trajectory_csv(path, &results)?;
    }
    let report: EnsembleReport =
        reduce_ensemble(analysis.canon().group_count(), shots, seed, results)?;
    emit_json(&report, output)?;
    Ok(0)
}

fn outcome_string(outcomes: &[u32], r: usize) -> String {
    if r <= 10 {
        outcomes.iter().map(|o| o.to_string()).collect()
    } else {
        outcomes
            .iter()
            .map(|o| o.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

fn write_trajectory_csv(
    path: &std::path::Path,
    results: &[Result<ShotSummary, CoreError>],
) -> Result<()> {
    let mut w = csv_writer(path)?;
    let r = results
        .iter()
        .find_map(|res| res.as_ref().ok().map(|s| s.record.frequency.outcomes()))
        .unwrap_or(0);
    let mut header = vec!["shot".to_string(), "outcomes".to_string()];
    for i in 0..r {
        header.push(format!("count_{i}"));
    }
    header.extend(
        ["group", "margin", "log_likelihood", "fidelity"]
            .iter()
            .map(|s| s.to_string()),
    );
    writeln!(w, "{}", header.join(","))?;
    for (shot, result) in results.iter().enumerate() {
        let Ok(summary) = result else { continue };
        let rec = &summary.record;
        let mut row = vec![shot.to_string(), outcome_string(&rec.outcomes, r)];
        row.extend(rec.frequency.counts().iter().map(|c| c.to_string()));
        row.push(rec.classified_group.to_string());
        row.push(csv_float(rec.margin));
        row.push(csv_float(rec.log_likelihood));
        row.push(summary.fidelity.map(csv_float).unwrap_or_default());
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn cmd_scheme(
    omega: &str,
    dphi: f64,
    swap_outcomes: bool,
    output: Option<&PathBuf>,
) -> Result<i32> {
    let spectrum = input::parse_omega_list(omega)?;
    let mut scheme = DephasingScheme::from_dphi(spectrum, dphi)?;
    scheme.swap_outcomes = swap_outcomes;
    let set: MeasurementSet = build_measurement_pair(&scheme);
    emit_json(&set, output)?;
    Ok(0)
}

pub fn cmd_bosonic(
    n: usize,
    truncation: Option<usize>,
    dphi: Option<f64>,
    output: Option<&PathBuf>,
) -> Result<i32> {
    let truncation = truncation.unwrap_or_else(|| default_truncation(n));
    let dphi = dphi.unwrap_or_else(|| optimal_dphi(n).dphi);
    let (_, set) = bosonic_modular_scheme(n, truncation, dphi)?;
    emit_json(&set, output)?;
    Ok(0)
}
