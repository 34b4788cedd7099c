//! JSON forms of the descriptor and of verification reports.
//!
//! Exact numbers are `"num/den"` strings. Floats are written by serde_json's
//! shortest round-trip formatter and read back with its exact parser, so a
//! saved descriptor reloads bit for bit.

use std::path::Path;

use denjoy_core::surgery::{DescriptorParts, RecordParts, SurgeredMapDescriptor, SCHEMA_VERSION};
use denjoy_core::verify::CheckReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum JsonError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: malformed descriptor: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("{path}: descriptor schema version {found}, this build reads {expected}")]
    Schema { path: String, found: u32, expected: u32 },
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaJson {
    /// Integer coefficients, leading first.
    pub min_poly: Vec<String>,
    pub isolate: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordJson {
    pub word: String,
    pub level: usize,
    pub side: String,
    pub point: Vec<String>,
    pub length: Vec<String>,
    pub iota_minus: [f64; 2],
    pub branch: String,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptorJson {
    pub schema_version: u32,
    pub beta: BetaJson,
    /// Critical orbit, exact coefficient vectors in ℚ(β).
    pub orbit: Vec<Vec<String>>,
    pub t: usize,
    pub m: usize,
    /// Deepest materialized level.
    pub depth: usize,
    /// Truncation depth of the mass stream.
    #[serde(rename = "N")]
    pub n: u64,
    pub eps: f64,
    pub growth: f64,
    pub kernel_len: usize,
    #[serde(rename = "L")]
    pub total_length: [f64; 2],
    pub unit_scale: f64,
    pub records: Vec<RecordJson>,
}

impl From<&DescriptorParts> for DescriptorJson {
    fn from(p: &DescriptorParts) -> Self {
        DescriptorJson {
            schema_version: p.schema_version,
            beta: BetaJson { min_poly: p.min_poly.clone(), isolate: [p.isolate.0.clone(), p.isolate.1.clone()] },
            orbit: p.orbit.clone(),
            t: p.preperiod,
            m: p.period,
            depth: p.depth,
            n: p.truncation_depth,
            eps: p.eps,
            growth: p.growth,
            kernel_len: p.kernel_len,
            total_length: [p.total_length.0, p.total_length.1],
            unit_scale: p.unit_scale,
            records: p
                .records
                .iter()
                .map(|r| RecordJson {
                    word: r.word.clone(),
                    level: r.level,
                    side: r.side.clone(),
                    point: r.point.clone(),
                    length: r.length.clone(),
                    iota_minus: [r.iota_minus.0, r.iota_minus.1],
                    branch: r.branch.clone(),
                    target: r.target,
                })
                .collect(),
        }
    }
}

impl From<DescriptorJson> for DescriptorParts {
    fn from(j: DescriptorJson) -> Self {
        let [lo, hi] = j.beta.isolate;
        DescriptorParts {
            schema_version: j.schema_version,
            min_poly: j.beta.min_poly,
            isolate: (lo, hi),
            orbit: j.orbit,
            preperiod: j.t,
            period: j.m,
            depth: j.depth,
            eps: j.eps,
            growth: j.growth,
            kernel_len: j.kernel_len,
            truncation_depth: j.n,
            total_length: (j.total_length[0], j.total_length[1]),
            unit_scale: j.unit_scale,
            records: j
                .records
                .into_iter()
                .map(|r| RecordParts {
                    word: r.word,
                    level: r.level,
                    side: r.side,
                    point: r.point,
                    length: r.length,
                    iota_minus: (r.iota_minus[0], r.iota_minus[1]),
                    branch: r.branch,
                    target: r.target,
                })
                .collect(),
        }
    }
}

pub fn descriptor_to_string(d: &SurgeredMapDescriptor) -> String {
    let j = DescriptorJson::from(&d.to_parts());
    let mut s = serde_json::to_string_pretty(&j).expect("descriptor serializes");
    s.push('\n');
    s
}

pub fn descriptor_from_str(text: &str, origin: &str) -> Result<SurgeredMapDescriptor, JsonError> {
    // Read the version first so that a newer file is reported as such rather
    // than as a shape mismatch.
    #[derive(Deserialize)]
    struct Version {
        schema_version: u32,
    }
    let v: Version =
        serde_json::from_str(text).map_err(|source| JsonError::Parse { path: origin.into(), source })?;
    if v.schema_version != SCHEMA_VERSION {
        return Err(JsonError::Schema { path: origin.into(), found: v.schema_version, expected: SCHEMA_VERSION });
    }
    let j: DescriptorJson =
        serde_json::from_str(text).map_err(|source| JsonError::Parse { path: origin.into(), source })?;
    SurgeredMapDescriptor::from_parts(&j.into())
        .map_err(|e| JsonError::Invalid { path: origin.into(), msg: e.to_string() })
}

pub fn save_descriptor(d: &SurgeredMapDescriptor, path: &Path) -> Result<(), JsonError> {
    write_file(path, &descriptor_to_string(d))
}

pub fn load_descriptor(path: &Path) -> Result<SurgeredMapDescriptor, JsonError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| JsonError::Io { path: path.display().to_string(), source })?;
    descriptor_from_str(&text, &path.display().to_string())
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), JsonError> {
    let io = |source| JsonError::Io { path: path.display().to_string(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}

/// One verification line as written to the JSON report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub suite: String,
    pub check_name: String,
    pub status: String,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl ReportJson {
    pub fn new(suite: &str, r: &CheckReport) -> Self {
        ReportJson {
            suite: suite.into(),
            check_name: r.check_name.clone(),
            status: r.status.to_string(),
            // JSON has no infinities; a non-finite value becomes the largest float.
            measured: finite(r.measured),
            bound: finite(r.bound),
            tolerance: finite(r.tolerance),
            detail: r.detail.clone(),
        }
    }
}

fn finite(x: f64) -> f64 {
    if x.is_nan() {
        f64::MAX
    } else {
        x.clamp(-f64::MAX, f64::MAX)
    }
}

pub fn reports_to_string(reports: &[ReportJson]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
    s.push('\n');
    s
}
