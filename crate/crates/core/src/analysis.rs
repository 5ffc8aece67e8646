//! One-stop bundle of everything derived from a measurement set: its
//! eigenstructure, canonical decomposition and group signatures. Built once
//! and shared by the channel, typicality and trajectory layers.

use crate::error::Error;
use crate::povm::{
    canonical_decomposition, simultaneous_eigenbasis, CanonicalDecomposition, EigenStructure,
    MeasurementSet, ValidationReport,
};
use crate::typicality::{group_signatures, GroupSignature};
use crate::{DEFAULT_DIAG_SEED, DEFAULT_GROUP_TOL, DEFAULT_VALIDATION_TOL};

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy)]
pub struct AnalysisParams {
    pub tol: f64,
    pub group_tol: f64,
    pub diag_seed: u64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams {
            tol: DEFAULT_VALIDATION_TOL,
            group_tol: DEFAULT_GROUP_TOL,
            diag_seed: DEFAULT_DIAG_SEED,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    set: MeasurementSet,
    eigen: EigenStructure,
    canon: CanonicalDecomposition,
    signatures: Vec<GroupSignature>,
    params: AnalysisParams,
}

impl Analysis {
    pub fn new(set: MeasurementSet, params: AnalysisParams) -> Result<Self, Error> {
        let eigen = simultaneous_eigenbasis(&set, params.tol, params.diag_seed)?;
        let canon = canonical_decomposition(&eigen, params.group_tol)?;
        let signatures = group_signatures(&canon);
        Ok(Analysis {
            set,
            eigen,
            canon,
            signatures,
            params,
        })
    }

    pub fn set(&self) -> &MeasurementSet {
        &self.set
    }

    pub fn eigen(&self) -> &EigenStructure {
        &self.eigen
    }

    pub fn canon(&self) -> &CanonicalDecomposition {
        &self.canon
    }

    pub fn signatures(&self) -> &[GroupSignature] {
        &self.signatures
    }

    pub fn params(&self) -> AnalysisParams {
        self.params
    }

    pub fn validation_report(&self) -> ValidationReport {
        crate::povm::validate(&self.set, self.params.tol)
    }
}
