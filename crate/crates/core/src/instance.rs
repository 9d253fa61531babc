//! JSON instance files.
//!
//! ```json
//! { "statistics": "boson", "k": 1,
//!   "blocks": [ { "d": 1, "terms": [ { "occ": [1], "amp": [1.0, 0.0] } ] } ],
//!   "u": [ [ [2.0, 0.0] ] ],
//!   "v": [ [ [3.0, 0.0] ] ] }
//! ```
//!
//! Complex numbers are `[re, im]` pairs. Row `i` of `u` (column `i` of `v`)
//! belongs to global mode `i`, with modes numbered block-major. When
//! `ket_blocks` is present, `blocks` is the bra and `ket_blocks` the ket.

use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate_instance, FactorState, Instance, ModelError, ProductState, Statistics};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub occ: Vec<i64>,
    pub amp: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub d: usize,
    pub terms: Vec<TermSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub statistics: Statistics,
    pub k: usize,
    pub blocks: Vec<BlockSpec>,
    pub u: Vec<Vec<[f64; 2]>>,
    pub v: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ket_blocks: Option<Vec<BlockSpec>>,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed instance: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid instance: {0}")]
    Invalid(#[from] ModelError),
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<Instance, InstanceError> {
        Ok(validate_instance(self)?)
    }

    /// Serializes a validated instance; the ket is written only when it
    /// differs from the bra.
    pub fn from_instance(inst: &Instance) -> Self {
        InstanceFile {
            statistics: inst.bra.statistics(),
            k: inst.op.k(),
            blocks: blocks_of(&inst.bra),
            u: matrix_rows(inst.op.u()),
            v: matrix_rows(inst.op.v()),
            ket_blocks: (!inst.bra_is_ket()).then(|| blocks_of(&inst.ket)),
        }
    }
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    InstanceFile::from_json(&text)?.validate()
}

fn blocks_of(state: &ProductState) -> Vec<BlockSpec> {
    state.factors().iter().map(block_of).collect()
}

fn block_of(f: &FactorState) -> BlockSpec {
    BlockSpec {
        d: f.d(),
        terms: f
            .terms()
            .iter()
            .map(|(occ, a)| TermSpec {
                occ: occ.iter().map(|&x| x as i64).collect(),
                amp: [a.re, a.im],
            })
            .collect(),
    }
}

fn matrix_rows(m: &Array2<Complex64>) -> Vec<Vec<[f64; 2]>> {
    m.rows()
        .into_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "statistics": "boson", "k": 1,
        "blocks": [ { "d": 1, "terms": [ { "occ": [1], "amp": [1.0, 0.0] } ] } ],
        "u": [ [ [2.0, 0.0] ] ],
        "v": [ [ [3.0, 0.0] ] ]
    }"#;

    #[test]
    fn parses_minimal_file() {
        let raw = InstanceFile::from_json(MINIMAL).unwrap();
        let inst = raw.validate().unwrap();
        assert_eq!(inst.op.dense()[(0, 0)], Complex64::new(6.0, 0.0));
        assert_eq!(InstanceFile::from_instance(&inst), raw);
    }

    #[test]
    fn unknown_statistics_names_field() {
        let text = MINIMAL.replace("\"boson\"", "\"anyon\"");
        let err = InstanceFile::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("anyon"), "{err}");
    }

    #[test]
    fn missing_field_is_reported() {
        let text = MINIMAL.replace("\"k\": 1,", "");
        let err = InstanceFile::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("`k`"), "{err}");
    }

    #[test]
    fn invalid_block_reports_path() {
        let text = MINIMAL
            .replace("\"boson\"", "\"fermion\"")
            .replace("[1], \"amp\"", "[2], \"amp\"");
        let err = InstanceFile::from_json(&text)
            .unwrap()
            .validate()
            .unwrap_err()
            .to_string();
        assert!(err.contains("blocks[0].terms[0].occ"), "{err}");
    }
}
