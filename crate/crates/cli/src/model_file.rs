//! Versioned on-disk model format.
//!
//! The file is a one-line header followed by a JSON payload:
//!
//! ```text
//! magicint-model 1 sha256=<hex digest of the payload bytes>
//! {"format_version":1, ...}
//! ```
//!
//! Floats are written in shortest round-trip form and read back with exact
//! parsing, so every stored number survives a save/load cycle bit for bit.
//! Complex numbers are `[re, im]` pairs. Basis functions on the training grid
//! are not stored; off-grid evaluation only needs the snapshot expansion.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use magicint::eim::{MagicPoint, ModelParts, QuadratureRule};
use magicint::{Interval, MagicModel, ValueKind};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "magicint-model";

#[derive(Debug, Error, PartialEq)]
pub enum ModelFileError {
    #[error("model file checksum mismatch: header says {expected}, payload hashes to {actual}")]
    ChecksumMismatch { expected: String, actual: String },
    #[error("unsupported model format version {found} (this build reads version {FORMAT_VERSION})")]
    UnsupportedVersion { found: String },
    #[error("malformed model file: {0}")]
    MalformedField(String),
    #[error("cannot access model file {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StoredPoint {
    z: f64,
    index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Payload {
    format_version: u32,
    family: String,
    value_kind: String,
    domain: [f64; 2],
    grid: Vec<f64>,
    magic_points: Vec<StoredPoint>,
    magic_params: Vec<Vec<f64>>,
    b_matrix: Vec<[f64; 2]>,
    snapshot_coeffs: Vec<[f64; 2]>,
    pivots: Vec<[f64; 2]>,
    history: Vec<f64>,
    tolerance: Option<f64>,
    max_m: usize,
    basis_integrals: Option<Vec<[f64; 2]>>,
    weights: Option<Vec<[f64; 2]>>,
    weight_abs_tol: Option<f64>,
    stop_reason: String,
    /// Resolved settings of the training run, as `key = value` pairs.
    config: Vec<(String, String)>,
}

/// A model together with the settings it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: MagicModel,
    pub stop_reason: String,
    pub config: Vec<(String, String)>,
}

fn pack(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

fn unpack(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|c| Complex64::new(c[0], c[1])).collect()
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.model.parts();
        let q = p.quadrature.as_ref();
        let payload = Payload {
            format_version: FORMAT_VERSION,
            family: p.family_tag.clone(),
            value_kind: match p.value_kind {
                ValueKind::Real => "real".into(),
                ValueKind::Complex => "complex".into(),
            },
            domain: [p.domain.lo, p.domain.hi],
            grid: p.grid.clone(),
            magic_points: p
                .magic_points
                .iter()
                .map(|m| StoredPoint {
                    z: m.z,
                    index: m.index,
                })
                .collect(),
            magic_params: p.magic_params.clone(),
            b_matrix: pack(&p.b_matrix),
            snapshot_coeffs: pack(&p.snapshot_coeffs),
            pivots: pack(&p.pivots),
            history: p.history.clone(),
            tolerance: p.tolerance,
            max_m: p.max_m,
            basis_integrals: q.map(|r| pack(&r.basis_integrals)),
            weights: q.map(|r| pack(&r.weights)),
            weight_abs_tol: q.map(|r| r.abs_tol),
            stop_reason: self.stop_reason.clone(),
            config: self.config.clone(),
        };
        let body = serde_json::to_string(&payload).map_err(|_| fmt::Error)?;
        write!(
            f,
            "{MAGIC} {FORMAT_VERSION} sha256={}\n{body}\n",
            digest(body.as_bytes())
        )
    }
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, ModelFileError> {
        let malformed = |s: &str| ModelFileError::MalformedField(s.to_string());
        let (header, rest) = text
            .split_once('\n')
            .ok_or_else(|| malformed("missing header line"))?;
        let mut fields = header.split(' ');
        if fields.next() != Some(MAGIC) {
            return Err(malformed("not a magicint model file"));
        }
        let version = fields.next().ok_or_else(|| malformed("header lacks a version"))?;
        if version != FORMAT_VERSION.to_string() {
            return Err(ModelFileError::UnsupportedVersion {
                found: version.to_string(),
            });
        }
        let expected = fields
            .next()
            .and_then(|f| f.strip_prefix("sha256="))
            .ok_or_else(|| malformed("header lacks a checksum"))?
            .to_string();
        let body = rest.strip_suffix('\n').unwrap_or(rest);
        let payload: Payload = serde_json::from_str(body)
            .map_err(|e| ModelFileError::MalformedField(format!("payload: {e}")))?;
        let actual = digest(body.as_bytes());
        if actual != expected {
            return Err(ModelFileError::ChecksumMismatch { expected, actual });
        }
        if payload.format_version != FORMAT_VERSION {
            return Err(ModelFileError::UnsupportedVersion {
                found: payload.format_version.to_string(),
            });
        }
        Self::from_payload(payload)
    }

    fn from_payload(p: Payload) -> Result<Self, ModelFileError> {
        let value_kind = match p.value_kind.as_str() {
            "real" => ValueKind::Real,
            "complex" => ValueKind::Complex,
            other => return Err(ModelFileError::MalformedField(format!("value_kind '{other}'"))),
        };
        let domain = Interval::new(p.domain[0], p.domain[1])
            .map_err(|e| ModelFileError::MalformedField(format!("domain: {e}")))?;
        let quadrature = match (p.basis_integrals, p.weights, p.weight_abs_tol) {
            (Some(s), Some(w), Some(t)) => Some(QuadratureRule {
                basis_integrals: unpack(&s),
                weights: unpack(&w),
                abs_tol: t,
            }),
            (None, None, None) => None,
            _ => {
                return Err(ModelFileError::MalformedField(
                    "incomplete quadrature block".into(),
                ))
            }
        };
        let parts = ModelParts {
            family_tag: p.family,
            value_kind,
            domain,
            grid: p.grid,
            magic_params: p.magic_params,
            magic_points: p
                .magic_points
                .iter()
                .map(|m| MagicPoint {
                    z: m.z,
                    index: m.index,
                })
                .collect(),
            b_matrix: unpack(&p.b_matrix),
            snapshot_coeffs: unpack(&p.snapshot_coeffs),
            pivots: unpack(&p.pivots),
            basis_grid: None,
            history: p.history,
            tolerance: p.tolerance,
            max_m: p.max_m,
            quadrature,
        };
        let model =
            MagicModel::from_parts(parts).map_err(|e| ModelFileError::MalformedField(e.to_string()))?;
        Ok(Self {
            model,
            stop_reason: p.stop_reason,
            config: p.config,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelFileError> {
        write_atomic(path, self.to_string().as_bytes()).map_err(|e| ModelFileError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ModelFileError> {
        let text = fs::read_to_string(path).map_err(|e| ModelFileError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
