//! Plain-data form of a descriptor for persistence.
//!
//! Exact numbers travel as decimal `num/den` strings; floats are stored as
//! they are (the serializer is expected to round-trip them). Loading
//! recomputes the critical orbit and the mass model and refuses data that
//! does not reproduce.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{BranchKind, InsertedIntervalRecord, Side, SurgeredMapDescriptor, SurgeryError};
use crate::enclosure::Interval;
use crate::preimage::{LengthSchedule, MassModel, PreimageNode};
use crate::tent_core::{critical_orbit, AlgebraicParameter, AlgebraicPoint, CriticalOrbitData, DEFAULT_MAX_ITER};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct RecordParts {
    pub word: String,
    pub level: usize,
    pub side: String,
    pub point: Vec<String>,
    pub length: Vec<String>,
    pub iota_minus: (f64, f64),
    pub branch: String,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescriptorParts {
    pub schema_version: u32,
    /// Integer coefficients, leading first.
    pub min_poly: Vec<String>,
    pub isolate: (String, String),
    pub orbit: Vec<Vec<String>>,
    pub preperiod: usize,
    pub period: usize,
    pub depth: usize,
    pub eps: f64,
    pub growth: f64,
    pub kernel_len: usize,
    pub truncation_depth: u64,
    pub total_length: (f64, f64),
    pub unit_scale: f64,
    pub records: Vec<RecordParts>,
}

fn point_strings(x: &AlgebraicPoint) -> Vec<String> {
    x.coeffs().iter().map(|c| c.to_string()).collect()
}

fn bad(msg: impl Into<String>) -> SurgeryError {
    SurgeryError::Descriptor(msg.into())
}

fn parse_rational(s: &str) -> Result<BigRational, SurgeryError> {
    s.parse::<BigRational>().map_err(|_| bad(format!("not a rational: {s:?}")))
}

fn parse_point(beta: &AlgebraicParameter, v: &[String]) -> Result<AlgebraicPoint, SurgeryError> {
    let coeffs = v.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?;
    AlgebraicPoint::from_coeffs(coeffs, beta.degree()).map_err(|e| bad(e.to_string()))
}

impl SurgeredMapDescriptor {
    pub fn to_parts(&self) -> DescriptorParts {
        let (lo, hi) = self.beta.isolating_interval();
        DescriptorParts {
            schema_version: SCHEMA_VERSION,
            min_poly: self.beta.min_poly().iter().map(|c| c.to_string()).collect(),
            isolate: (lo.to_string(), hi.to_string()),
            orbit: self.orbit.points.iter().map(point_strings).collect(),
            preperiod: self.orbit.preperiod,
            period: self.orbit.period,
            depth: self.depth,
            eps: self.eps,
            growth: self.growth,
            kernel_len: self.kernel_len,
            truncation_depth: self.mass.depth(),
            total_length: (self.total.lo, self.total.hi),
            unit_scale: self.b,
            records: self
                .records
                .iter()
                .map(|r| RecordParts {
                    word: r.host.word.to_string(),
                    level: r.host.level,
                    side: r.side.to_string(),
                    point: point_strings(&r.host.point),
                    length: point_strings(&r.length),
                    iota_minus: (r.iota_minus.lo, r.iota_minus.hi),
                    branch: r.branch.name().to_string(),
                    target: r.target,
                })
                .collect(),
        }
    }

    pub fn from_parts(p: &DescriptorParts) -> Result<Self, SurgeryError> {
        if p.schema_version != SCHEMA_VERSION {
            return Err(bad(format!("schema version {} (expected {SCHEMA_VERSION})", p.schema_version)));
        }
        let min_poly =
            p.min_poly.iter().map(|s| s.parse::<BigInt>()).collect::<Result<Vec<_>, _>>().map_err(|_| bad("min_poly"))?;
        let beta = AlgebraicParameter::new(min_poly, parse_rational(&p.isolate.0)?, parse_rational(&p.isolate.1)?)?;
        let points = p.orbit.iter().map(|v| parse_point(&beta, v)).collect::<Result<Vec<_>, _>>()?;
        let orbit = CriticalOrbitData { points, preperiod: p.preperiod, period: p.period };
        let fresh = critical_orbit(&beta, DEFAULT_MAX_ITER)?.finite().ok_or_else(|| bad("critical orbit is not finite"))?;
        if fresh != orbit {
            return Err(bad("stored orbit is not the critical orbit of beta"));
        }
        let mass = MassModel::new(&beta, &orbit, Some(p.growth), p.eps / 4.0, p.kernel_len)?;
        let total = mass.total_length();
        if mass.depth() != p.truncation_depth || (total.lo, total.hi) != p.total_length {
            return Err(bad("mass model does not reproduce the stored total length"));
        }
        let mut records = Vec::with_capacity(p.records.len());
        for (i, r) in p.records.iter().enumerate() {
            let point = parse_point(&beta, &r.point)?;
            let length = parse_point(&beta, &r.length)?;
            let word = r.word.parse().map_err(|_| bad(format!("record {i}: word")))?;
            let side: Side = r.side.parse().map_err(|_| bad(format!("record {i}: side")))?;
            let branch: BranchKind = r.branch.parse().map_err(|_| bad(format!("record {i}: branch")))?;
            if r.target >= p.records.len() {
                return Err(bad(format!("record {i}: target out of range")));
            }
            records.push(InsertedIntervalRecord {
                host_f: beta.to_interval(&point).mid(),
                length_enc: beta.to_interval(&length),
                host: PreimageNode {
                    on_orbit: matches!(side, Side::Orbit(_) | Side::Critical),
                    point,
                    level: r.level,
                    word,
                },
                side,
                length,
                branch,
                iota_minus: Interval::new(r.iota_minus.0, r.iota_minus.1),
                target: r.target,
            });
        }
        let critical =
            records.iter().position(|r| r.side == Side::Critical).ok_or_else(|| bad("no record at the critical point"))?;
        Ok(SurgeredMapDescriptor {
            schedule: LengthSchedule::new(&beta),
            beta: beta.clone(),
            orbit,
            depth: p.depth,
            eps: p.eps,
            growth: p.growth,
            kernel_len: p.kernel_len,
            mass,
            total,
            records,
            critical,
            b: p.unit_scale,
            host_scan: super::host_scan_depth(&beta, p.eps, p.kernel_len),
        })
    }
}
