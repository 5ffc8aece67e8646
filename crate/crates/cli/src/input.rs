//! Input parsing: the measurement-set JSON schema from a file or stdin,
//! and initial states given inline or as a path, as either a vector
//! (pure state) or a matrix (density matrix).

use std::fs;
use std::io::Read;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use seqpovm_core::{CMat, CVec, DensityMatrix, MeasurementSet, C64};

/// Reads the measurement set from `path`, or stdin when the path is `-`
/// or absent.
pub fn read_measurement_set(input: Option<&PathBuf>) -> Result<MeasurementSet> {
    let text = match input {
        Some(path) if path.as_os_str() != "-" => {
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
        }
        _ => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .context("reading measurement set from stdin")?;
            buf
        }
    };
    let set: MeasurementSet =
        serde_json::from_str(&text).context("parsing measurement-set JSON")?;
    Ok(set)
}

fn number(v: &serde_json::Value) -> Option<f64> {
    v.as_f64()
}

fn parse_pair(v: &serde_json::Value) -> Option<C64> {
    let arr = v.as_array()?;
    if arr.len() != 2 {
        return None;
    }
    Some(C64::new(number(&arr[0])?, number(&arr[1])?))
}

/// A JSON array of [re, im] pairs is a state vector; an array of rows of
/// pairs is a density matrix.
pub fn parse_state(value: &serde_json::Value, tol: f64) -> Result<DensityMatrix> {
    let outer = value
        .as_array()
        .context("state must be a JSON array (vector or matrix)")?;
    if outer.is_empty() {
        bail!("state array is empty");
    }
    let first = outer[0]
        .as_array()
        .context("state entries must be arrays")?;
    let is_vector = first.iter().all(|x| x.is_number());
    if is_vector {
        let amps: Option<Vec<C64>> = outer.iter().map(parse_pair).collect();
        let amps = amps.context("state vector entries must be [re, im] pairs")?;
        let vec = CVec::new(amps).map_err(anyhow::Error::new)?;
        DensityMatrix::pure(&vec, tol).map_err(anyhow::Error::new)
    } else {
        let rows: Option<Vec<Vec<C64>>> = outer
            .iter()
            .map(|row| row.as_array().map(|r| r.iter().map(parse_pair).collect()))
            .map(|row| row.flatten())
            .collect();
        let rows = rows.context("state matrix entries must be [re, im] pairs")?;
        let mat = CMat::from_rows(&rows).map_err(anyhow::Error::new)?;
        DensityMatrix::new(mat, tol).map_err(anyhow::Error::new)
    }
}

/// `--state` accepts inline JSON first, then a path to a JSON file.
pub fn read_state(spec: &str, tol: f64) -> Result<DensityMatrix> {
    let value: serde_json::Value = match serde_json::from_str(spec) {
        Ok(v) => v,
        Err(_) => {
            let text = fs::read_to_string(spec).with_context(|| {
                format!("--state is neither inline JSON nor a readable file: {spec}")
            })?;
            serde_json::from_str(&text).context("parsing state JSON file")?
        }
    };
    parse_state(&value, tol)
}

/// Comma-separated accumulated phases for the `scheme` subcommand.
pub fn parse_omega_list(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid omega entry {s:?}"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_and_matrix_states_parse() {
        let v: serde_json::Value = serde_json::from_str("[[1.0, 0.0], [0.0, 0.0]]").unwrap();
        let pure = parse_state(&v, 1e-9).unwrap();
        assert_eq!(pure.dim(), 2);
        assert!((pure.matrix().get(0, 0).re - 1.0).abs() < 1e-15);

        let m: serde_json::Value =
            serde_json::from_str("[[[0.5,0.0],[0.0,0.0]],[[0.0,0.0],[0.5,0.0]]]").unwrap();
        let mixed = parse_state(&m, 1e-9).unwrap();
        assert!((mixed.matrix().get(1, 1).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unnormalized_vector_is_rejected() {
        let v: serde_json::Value = serde_json::from_str("[[1.0, 0.0], [1.0, 0.0]]").unwrap();
        assert!(parse_state(&v, 1e-9).is_err());
    }

    #[test]
    fn omega_lists_parse() {
        assert_eq!(parse_omega_list("0,0.3").unwrap(), vec![0.0, 0.3]);
        assert!(parse_omega_list("0,abc").is_err());
    }
}
