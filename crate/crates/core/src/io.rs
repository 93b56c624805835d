//! JSON pair files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "dim": 2,
//!   "count": 2,
//!   "phi": [[[1.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
//!   "psi": [[[1.0, 0.0], [0.0, 0.0]], [[-1.0, 0.0], [1.0, 0.0]]],
//!   "label": "optional"
//! }
//! ```
//!
//! `phi` and `psi` are row-major `dim x count` arrays of `[re, im]`. Floats
//! are written in shortest round-trip form and parsed exactly, so
//! save-then-load reproduces every entry bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, C64};
use crate::pair::TruncatedPair;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    pub schema_version: u32,
    pub dim: usize,
    pub count: usize,
    pub phi: Vec<Vec<[f64; 2]>>,
    pub psi: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl PairFile {
    pub fn from_pair(pair: &TruncatedPair) -> Self {
        let label = pair.label();
        PairFile {
            schema_version: SCHEMA_VERSION,
            dim: pair.dim(),
            count: pair.count(),
            phi: pair.phi().to_row_major_pairs(),
            psi: pair.psi().to_row_major_pairs(),
            label: (!label.is_empty()).then(|| label.to_string()),
        }
    }

    /// Checks shape and finiteness, then builds the pair.
    pub fn into_pair(self) -> Result<TruncatedPair> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        if self.dim == 0 || self.count == 0 {
            return Err(Error::Schema("dim and count must be positive".into()));
        }
        if self.count > self.dim {
            return Err(Error::Schema(format!(
                "count {} exceeds dim {}",
                self.count, self.dim
            )));
        }
        let phi = matrix_from_rows("phi", &self.phi, self.dim, self.count)?;
        let psi = matrix_from_rows("psi", &self.psi, self.dim, self.count)?;
        TruncatedPair::new(phi, psi, self.label.unwrap_or_default()).map_err(|e| match e {
            Error::DimensionMismatch(m) => Error::Schema(m),
            other => other,
        })
    }
}

fn matrix_from_rows(
    name: &str,
    rows: &[Vec<[f64; 2]>],
    dim: usize,
    count: usize,
) -> Result<ComplexMatrix> {
    if rows.len() != dim {
        return Err(Error::Schema(format!(
            "{name} has {} rows, dim is {dim}",
            rows.len()
        )));
    }
    let mut entries = Vec::with_capacity(dim * count);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != count {
            return Err(Error::Schema(format!(
                "{name} row {i} has {} entries, count is {count}",
                row.len()
            )));
        }
        for (j, [re, im]) in row.iter().enumerate() {
            if !(re.is_finite() && im.is_finite()) {
                return Err(Error::Validation(format!("{name}[{i}][{j}] is not finite")));
            }
            entries.push(C64::new(*re, *im));
        }
    }
    ComplexMatrix::from_row_slice(dim, count, &entries)
}

/// Parses a pair file from raw bytes.
///
/// Malformed JSON is a [`Error::Parse`], a well-formed document of the wrong
/// structure or shape is a [`Error::Schema`], and numbers that overflow to
/// infinity or zero columns are a [`Error::Validation`].
pub fn parse_pair(bytes: &[u8]) -> Result<TruncatedPair> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| {
        if e.to_string().starts_with("number out of range") {
            Error::Validation(format!("non-finite number: {e}"))
        } else {
            Error::Parse(e.to_string())
        }
    })?;
    if let Some(v) = value.get("schema_version") {
        if v.as_u64() != Some(SCHEMA_VERSION as u64) {
            return Err(Error::Schema(format!(
                "unsupported schema_version {v}, expected {SCHEMA_VERSION}"
            )));
        }
    }
    let file: PairFile = serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
    file.into_pair()
}

pub fn load_pair(path: impl AsRef<Path>) -> Result<TruncatedPair> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_pair(&bytes)
}

/// Pretty JSON with a trailing newline.
pub fn pair_to_json(pair: &TruncatedPair) -> String {
    let mut s = serde_json::to_string_pretty(&PairFile::from_pair(pair))
        .expect("pair files contain only finite numbers and strings");
    s.push('\n');
    s
}

pub fn save_pair(pair: &TruncatedPair, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, pair_to_json(pair)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::PairFamily;

    fn golden_pair() -> TruncatedPair {
        let phi = ComplexMatrix::from_real_rows(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let psi = ComplexMatrix::from_real_rows(2, 2, &[1.0, 0.0, -1.0, 1.0]).unwrap();
        TruncatedPair::new(phi, psi, "golden").unwrap()
    }

    #[test]
    fn identity_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("id.json");
        let p = PairFamily::Identity.generate(3).unwrap();
        save_pair(&p, &path).unwrap();
        assert_eq!(load_pair(&path).unwrap(), p);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for p in [
            golden_pair(),
            PairFamily::RandomRegular {
                kappa: 1e3,
                seed: 5,
            }
            .generate(7)
            .unwrap(),
            PairFamily::BoundedPerturbation { eps: 0.3, seed: 2 }
                .generate(5)
                .unwrap(),
        ] {
            let back = parse_pair(pair_to_json(&p).as_bytes()).unwrap();
            for (x, y) in p
                .phi()
                .iter()
                .zip(back.phi().iter())
                .chain(p.psi().iter().zip(back.psi().iter()))
            {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
            assert_eq!(back.label(), p.label());
        }
    }

    #[test]
    fn serialized_layout() {
        let json = pair_to_json(&golden_pair());
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["phi"][0][1], serde_json::json!([1.0, 0.0]));
        assert_eq!(v["psi"][1][0], serde_json::json!([-1.0, 0.0]));
        assert!(json.ends_with("}\n"));
    }

    #[test]
    fn shape_errors() {
        let bad = r#"{"schema_version":1,"dim":3,"count":2,
            "phi":[[[1,0],[0,0]],[[0,0],[1,0]]],
            "psi":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(matches!(parse_pair(bad.as_bytes()), Err(Error::Schema(_))));
        let ragged = r#"{"schema_version":1,"dim":2,"count":2,
            "phi":[[[1,0],[0,0]],[[0,0]]],
            "psi":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(matches!(
            parse_pair(ragged.as_bytes()),
            Err(Error::Schema(_))
        ));
        let wide = r#"{"schema_version":1,"dim":1,"count":2,
            "phi":[[[1,0],[1,0]]],"psi":[[[1,0],[1,0]]]}"#;
        assert!(matches!(parse_pair(wide.as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn version_and_type_errors() {
        let v2 = r#"{"schema_version":2,"dim":1,"count":1,"phi":[[[1,0]]],"psi":[[[1,0]]]}"#;
        assert!(matches!(parse_pair(v2.as_bytes()), Err(Error::Schema(_))));
        let missing = r#"{"schema_version":1,"dim":1,"count":1,"phi":[[[1,0]]]}"#;
        assert!(matches!(
            parse_pair(missing.as_bytes()),
            Err(Error::Schema(_))
        ));
        let extra =
            r#"{"schema_version":1,"dim":1,"count":1,"phi":[[[1,0]]],"psi":[[[1,0]]],"x":0}"#;
        assert!(matches!(
            parse_pair(extra.as_bytes()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn parse_and_validation_errors() {
        assert!(matches!(parse_pair(b"{not json"), Err(Error::Parse(_))));
        assert!(matches!(parse_pair(b""), Err(Error::Parse(_))));
        let huge = r#"{"schema_version":1,"dim":1,"count":1,"phi":[[[1e999,0]]],"psi":[[[1,0]]]}"#;
        assert!(matches!(
            parse_pair(huge.as_bytes()),
            Err(Error::Validation(_))
        ));
        let nonfinite = PairFile {
            schema_version: 1,
            dim: 1,
            count: 1,
            phi: vec![vec![[f64::NAN, 0.0]]],
            psi: vec![vec![[1.0, 0.0]]],
            label: None,
        };
        assert!(matches!(nonfinite.into_pair(), Err(Error::Validation(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_pair("/nonexistent/pair.json"),
            Err(Error::Io(_))
        ));
    }
}
