//! Wire representations: complex numbers as [re, im] pairs, matrices as
//! nested row arrays, and the measurement-set schema
//! `{ "dim": d, "operators": [matrix, ...] }`. Deserialization rejects
//! ragged rows, non-finite entries and dimension mismatches.

use alloc::vec::Vec;
use serde::de::Error as _;
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{CMat, CVec, C64};
use crate::povm::MeasurementSet;

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

impl Serialize for CVec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for z in self.as_slice() {
            seq.serialize_element(&pair(*z))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for CVec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
        let data: Vec<C64> = raw.into_iter().map(|[re, im]| C64::new(re, im)).collect();
        CVec::new(data).map_err(D::Error::custom)
    }
}

impl Serialize for CMat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows()))?;
        for i in 0..self.rows() {
            let row: Vec<[f64; 2]> = self.row(i).iter().map(|&z| pair(z)).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for CMat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let rows: Vec<Vec<C64>> = raw
            .into_iter()
            .map(|row| row.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        CMat::from_rows(&rows).map_err(D::Error::custom)
    }
}

impl Serialize for MeasurementSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("MeasurementSet", 2)?;
        s.serialize_field("dim", &self.dim())?;
        s.serialize_field("operators", self.operators())?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for MeasurementSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            dim: usize,
            operators: Vec<CMat>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let set = MeasurementSet::new(raw.operators).map_err(D::Error::custom)?;
        if set.dim() != raw.dim {
            return Err(D::Error::custom(crate::Error::DimensionMismatch {
                left: raw.dim,
                right: set.dim(),
            }));
        }
        Ok(set)
    }
}
