//! The surgered map `g_β` on the fattened interval `I_β = [0, 1 + L]`.
//!
//! Every first-hit preimage `x` of `c_t` is blown up into an interval
//! `[ι⁻(x), ι⁺(x)]` with `ι⁻(x) = x + Λ(x)`. Intervals up to a chosen level
//! are materialized as records; deeper ones are reached on demand through
//! the left-mass model.

pub mod branch;
mod locate;
mod parts;

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

pub use branch::{
    deriv_extrema, endpoint_derivative_exact, local_deriv, local_value, local_value_interval, max_abs_deriv,
    turning_deriv, turning_value, BranchError, BranchKind, CubicBranch,
};
pub use locate::{Classification, Location};
pub use parts::{DescriptorParts, RecordParts, SCHEMA_VERSION};

use crate::enclosure::Interval;
use crate::markov::{build_matrix, build_partition, growth_constant, MarkovError};
use crate::preimage::{
    enumerate_tree, sort_points, LengthSchedule, MassModel, PreimageError, PreimageNode, DEFAULT_KERNEL_LEN,
    DEFAULT_TREE_CAP,
};
use crate::tent_core::{
    tent_apply, AlgebraicParameter, AlgebraicPoint, CriticalOrbitData, FieldError, ItineraryWord, TentError,
};

/// Default evaluation tolerance.
pub const DEFAULT_EPS: f64 = 1e-6;
/// Default depth of materialized records.
pub const DEFAULT_RECORD_DEPTH: usize = 12;
/// Path length used when scanning the Markov matrix for the growth constant.
const GROWTH_SCAN: u32 = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurgeryError {
    #[error(transparent)]
    Preimage(#[from] PreimageError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error("tolerance must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("coordinate {0} lies outside I_beta")]
    OutOfRange(f64),
    #[error("branch ratio check failed at record {0}")]
    Ratio(usize),
    #[error("invalid descriptor: {0}")]
    Descriptor(String),
}

impl From<TentError> for SurgeryError {
    fn from(e: TentError) -> Self {
        SurgeryError::Preimage(PreimageError::Tent(e))
    }
}

impl From<FieldError> for SurgeryError {
    fn from(e: FieldError) -> Self {
        SurgeryError::Preimage(e.into())
    }
}

/// Which branch family an inserted interval uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    L,
    R,
    Orbit(usize),
    Critical,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::L => f.write_str("L"),
            Side::R => f.write_str("R"),
            Side::Orbit(i) => write!(f, "ORBIT({i})"),
            Side::Critical => f.write_str("CRITICAL"),
        }
    }
}

impl core::str::FromStr for Side {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "L" => Ok(Side::L),
            "R" => Ok(Side::R),
            "CRITICAL" => Ok(Side::Critical),
            _ => {
                let i = s.strip_prefix("ORBIT(").and_then(|r| r.strip_suffix(')')).ok_or(())?;
                i.parse().map(Side::Orbit).map_err(|_| ())
            }
        }
    }
}

/// Label of an inserted interval for the symbolic dynamics.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Word(ItineraryWord),
    Orbit(usize),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Word(w) => write!(f, "{w}"),
            Label::Orbit(i) => write!(f, "J{i}"),
        }
    }
}

/// One step of the label shift: words lose their leading symbol, a single
/// symbol is the interval at `c_t`, and orbit intervals follow the orbit.
pub fn symbolic_step(orbit: &CriticalOrbitData, label: &Label) -> Label {
    match label {
        Label::Word(w) if w.len() <= 2 => Label::Orbit(orbit.preperiod),
        Label::Word(w) => Label::Word(w.shift()),
        Label::Orbit(i) => Label::Orbit(orbit.next_index(*i)),
    }
}

/// Whether a label names an interval on the periodic part of the orbit.
pub fn on_cycle(orbit: &CriticalOrbitData, label: &Label) -> bool {
    match label {
        Label::Word(w) => w.len() == 1,
        Label::Orbit(i) => *i >= orbit.preperiod,
    }
}

/// A materialized inserted interval.
#[derive(Clone, Debug, PartialEq)]
pub struct InsertedIntervalRecord {
    pub host: PreimageNode,
    pub side: Side,
    /// Exact length: 1 on the critical orbit, `a(n)` otherwise.
    pub length: AlgebraicPoint,
    pub length_enc: Interval,
    pub branch: BranchKind,
    /// Enclosure of `ι⁻(host)`.
    pub iota_minus: Interval,
    /// Index of the record at `f(host)`.
    pub target: usize,
    pub host_f: f64,
}

impl InsertedIntervalRecord {
    pub fn iota_plus(&self) -> Interval {
        self.iota_minus + self.length_enc
    }

    pub fn level(&self) -> usize {
        self.host.level
    }

    pub fn word(&self) -> &ItineraryWord {
        &self.host.word
    }

    /// Orbit intervals are labelled by orbit index, the rest by word.
    pub fn label(&self) -> Label {
        match self.side {
            Side::Orbit(i) => Label::Orbit(i),
            Side::Critical => Label::Orbit(0),
            _ => Label::Word(self.host.word.clone()),
        }
    }
}

/// The laid-out surgered map.
#[derive(Clone, Debug)]
pub struct SurgeredMapDescriptor {
    beta: AlgebraicParameter,
    orbit: CriticalOrbitData,
    depth: usize,
    eps: f64,
    growth: f64,
    kernel_len: usize,
    mass: MassModel,
    total: Interval,
    schedule: LengthSchedule,
    records: Vec<InsertedIntervalRecord>,
    critical: usize,
    /// Right end `1 + L.mid` used by the unit conjugate.
    b: f64,
    /// Deepest level checked when deciding whether a point is a host.
    host_scan: usize,
}

/// Smallest level whose insertions are negligible next to `eps`.
fn host_scan_depth(beta: &AlgebraicParameter, eps: f64, kernel_len: usize) -> usize {
    let bi = beta.beta_interval();
    (1..kernel_len).find(|&n| crate::preimage::level_length(bi, n).hi < eps * 1e-4).unwrap_or(kernel_len)
}

/// Knobs for [`layout_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayoutOptions {
    pub depth: usize,
    pub eps: f64,
    /// Overrides the certified growth constant (must still be a valid bound).
    pub growth: Option<f64>,
    pub kernel_len: usize,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        LayoutOptions { depth: DEFAULT_RECORD_DEPTH, eps: DEFAULT_EPS, growth: None, kernel_len: DEFAULT_KERNEL_LEN }
    }
}

/// Lays out `g_β` with records to level `depth` and tolerance `eps`.
pub fn layout(
    beta: &AlgebraicParameter,
    orbit: &CriticalOrbitData,
    depth: usize,
    eps: f64,
) -> Result<SurgeredMapDescriptor, SurgeryError> {
    layout_with(beta, orbit, LayoutOptions { depth, eps, ..LayoutOptions::default() })
}

/// Certified `M` with `F(n) ≤ M βⁿ`.
pub fn certified_growth(beta: &AlgebraicParameter, orbit: &CriticalOrbitData) -> Result<f64, SurgeryError> {
    let partition = build_partition(beta, orbit)?;
    let matrix = build_matrix(&partition)?;
    Ok(growth_constant(beta, &partition, &matrix, GROWTH_SCAN)?.m)
}

pub fn layout_with(
    beta: &AlgebraicParameter,
    orbit: &CriticalOrbitData,
    opts: LayoutOptions,
) -> Result<SurgeredMapDescriptor, SurgeryError> {
    let eps = opts.eps;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(SurgeryError::Tolerance(eps));
    }
    if opts.depth > DEFAULT_TREE_CAP {
        return Err(PreimageError::CapExceeded { depth: opts.depth, cap: DEFAULT_TREE_CAP }.into());
    }
    let growth = match opts.growth {
        Some(m) => m,
        None => certified_growth(beta, orbit)?,
    };
    let mass = MassModel::new(beta, orbit, Some(growth), eps / 4.0, opts.kernel_len)?;
    let total = mass.total_length();
    let schedule = LengthSchedule::new(beta);

    let orbit_depth = (0..orbit.len()).map(|i| orbit.level_of(i)).max().unwrap_or(0);
    let levels = enumerate_tree(beta, orbit, opts.depth.max(orbit_depth))?;
    let mut hosts: Vec<PreimageNode> =
        levels.into_iter().flatten().filter(|n| n.level <= opts.depth || n.on_orbit).collect();
    sort_points(beta, &mut hosts, |n| &n.point)?;

    let half = beta.half();
    let mut records = Vec::with_capacity(hosts.len());
    for host in hosts {
        let side = match orbit.index_of(&host.point) {
            Some(0) => Side::Critical,
            Some(i) => Side::Orbit(i),
            None if beta.compare(&host.point, &half)? == Ordering::Less => Side::L,
            None => Side::R,
        };
        let below = beta.compare(&host.point, &half)? == Ordering::Less;
        let branch = match side {
            Side::L => BranchKind::HInc,
            Side::R => BranchKind::RDec,
            Side::Critical => BranchKind::CritF1,
            Side::Orbit(_) if below => BranchKind::UnitG,
            Side::Orbit(_) => BranchKind::UnitW,
        };
        let length = if host.on_orbit { beta.one() } else { schedule.exact(host.level) };
        let iota_minus = beta.to_interval(&host.point) + mass.left_mass(&host.point, eps / 64.0)?;
        records.push(InsertedIntervalRecord {
            host_f: beta.to_interval(&host.point).mid(),
            length_enc: beta.to_interval(&length),
            host,
            side,
            length,
            branch,
            iota_minus,
            target: 0,
        });
    }
    for i in 0..records.len() {
        let image = tent_apply(beta, &records[i].host.point)?;
        let t = find_record(beta, &records, &image)?
            .ok_or_else(|| SurgeryError::Descriptor(alloc::format!("record {i} has no materialized image")))?;
        records[i].target = t;
        if matches!(records[i].side, Side::L | Side::R) {
            let need = beta.mul(&beta.beta(), &records[i].length);
            if beta.compare(&records[t].length, &need)? == Ordering::Less {
                return Err(SurgeryError::Ratio(i));
            }
        }
    }
    let critical = records.iter().position(|r| r.side == Side::Critical).expect("c is always a host");
    let b = 1.0 + total.mid();
    Ok(SurgeredMapDescriptor {
        beta: beta.clone(),
        orbit: orbit.clone(),
        depth: opts.depth,
        eps,
        growth,
        kernel_len: opts.kernel_len,
        mass,
        total,
        schedule,
        records,
        critical,
        b,
        host_scan: host_scan_depth(beta, eps, opts.kernel_len),
    })
}

/// Binary search of the host-sorted records for an exact point.
fn find_record(
    beta: &AlgebraicParameter,
    records: &[InsertedIntervalRecord],
    x: &AlgebraicPoint,
) -> Result<Option<usize>, FieldError> {
    let xf = beta.to_interval(x);
    let start = records.partition_point(|r| r.host_f < xf.lo - 1e-12);
    for (i, r) in records.iter().enumerate().skip(start) {
        if r.host_f > xf.hi + 1e-12 {
            break;
        }
        if r.host.point == *x {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

impl SurgeredMapDescriptor {
    pub fn beta(&self) -> &AlgebraicParameter {
        &self.beta
    }

    pub fn orbit(&self) -> &CriticalOrbitData {
        &self.orbit
    }

    /// Level of the deepest materialized non-orbit record.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn kernel_len(&self) -> usize {
        self.kernel_len
    }

    pub fn mass(&self) -> &MassModel {
        &self.mass
    }

    pub fn schedule(&self) -> &LengthSchedule {
        &self.schedule
    }

    /// Truncation depth of the mass stream.
    pub fn truncation_depth(&self) -> u64 {
        self.mass.depth()
    }

    /// Enclosure of the total inserted length `L`.
    pub fn total_length(&self) -> Interval {
        self.total
    }

    /// Enclosure of the right end `b_β = 1 + L`.
    pub fn right_end(&self) -> Interval {
        Interval::point(1.0) + self.total
    }

    /// The number used for `b_β` by the unit conjugate.
    pub fn unit_scale(&self) -> f64 {
        self.b
    }

    /// Enclosure of the Cantor-set share `1/(1 + L)` of `I_β`.
    pub fn cantor_fraction(&self) -> Interval {
        self.right_end().recip()
    }

    pub fn records(&self) -> &[InsertedIntervalRecord] {
        &self.records
    }

    pub fn record(&self, i: usize) -> &InsertedIntervalRecord {
        &self.records[i]
    }

    /// Index of the record at c.
    pub fn critical_record(&self) -> usize {
        self.critical
    }

    /// Record index of an exact host point, if materialized.
    pub fn find_record(&self, x: &AlgebraicPoint) -> Result<Option<usize>, FieldError> {
        find_record(&self.beta, &self.records, x)
    }

    /// Record index of the orbit point `c_i`.
    pub fn orbit_record(&self, i: usize) -> usize {
        self.find_record(&self.orbit.points[i]).ok().flatten().expect("orbit points are always materialized")
    }

    pub fn symbolic_step(&self, label: &Label) -> Label {
        symbolic_step(&self.orbit, label)
    }

    /// `Λ(x)`, the inserted length strictly below x.
    pub fn left_mass(&self, x: &AlgebraicPoint) -> Result<Interval, SurgeryError> {
        Ok(self.mass.left_mass(x, self.eps / 64.0)?)
    }

    /// Length of the interval inserted at `x`, or `None` if x is not a host.
    pub fn host_length(&self, x: &AlgebraicPoint) -> Result<Option<AlgebraicPoint>, SurgeryError> {
        if let Some(i) = self.find_record(x)? {
            return Ok(Some(self.records[i].length.clone()));
        }
        if self.orbit.index_of(x).is_some() {
            return Ok(Some(self.beta.one()));
        }
        Ok(self.mass.preimage_level(x, self.kernel_len)?.map(|n| self.schedule.exact(n)))
    }

    /// `ι⁻(x)` (`plus = false`) or `ι⁺(x)`; the two agree off the hosts.
    pub fn embed(&self, x: &AlgebraicPoint, plus: bool) -> Result<Interval, SurgeryError> {
        if let Some(i) = self.find_record(x)? {
            let r = &self.records[i];
            return Ok(if plus { r.iota_plus() } else { r.iota_minus });
        }
        let base = self.beta.to_interval(x) + self.left_mass(x)?;
        if plus {
            if let Some(len) = self.host_length(x)? {
                return Ok(base + self.beta.to_interval(&len));
            }
        }
        Ok(base)
    }

    /// Upper bound for `|g_β'|` on the whole domain.
    ///
    /// Hosts past the materialized depth have targets of length
    /// `a(n−1) = a(n) β (n+1)/(n−1)`, so their slopes are at most
    /// `β (1 + 3/depth)`.
    pub fn lipschitz_bound(&self) -> f64 {
        let beta = self.beta.approx();
        let mut m = beta * (1.0 + 3.0 / self.depth.max(1) as f64);
        for r in &self.records {
            let l2 = self.records[r.target].length_enc.mid();
            m = m.max(max_abs_deriv(r.branch, beta, r.length_enc.mid(), l2));
        }
        m * (1.0 + 1e-9)
    }

    /// `π(y)` as an enclosure in [0, 1].
    pub fn collapse(&self, y: f64) -> Result<Interval, SurgeryError> {
        Ok(match self.classify(y)? {
            Classification::Inserted { host, .. } => self.beta.to_interval(&host.point),
            Classification::Cantor { pi, .. } => pi,
            Classification::Unresolved { candidates } => {
                let mut acc: Option<Interval> = None;
                for c in &candidates {
                    let p = match c {
                        Location::Inserted { host, .. } => self.beta.to_interval(&host.point),
                        Location::Gap { left, right } => {
                            self.beta.to_interval(&left.x).hull(&self.beta.to_interval(&right.x))
                        }
                    };
                    acc = Some(acc.map_or(p, |a| a.hull(&p)));
                }
                acc.expect("nonempty")
            }
        })
    }

    /// `φ(y) = y / b`.
    pub fn to_unit(&self, y: f64) -> f64 {
        y / self.b
    }

    /// `φ⁻¹(x) = x b`.
    pub fn from_unit(&self, x: f64) -> f64 {
        x * self.b
    }

    /// `g̃_β(x) = φ(g_β(φ⁻¹(x)))`.
    pub fn eval_unit(&self, x: f64) -> Result<Interval, SurgeryError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(SurgeryError::OutOfRange(x));
        }
        let v = self.eval(self.from_unit(x))?;
        Ok(Interval::new((v.lo / self.b).next_down(), (v.hi / self.b).next_up()))
    }

    /// Derivative of `g̃_β` at x; equal to that of `g_β` at `φ⁻¹(x)`.
    pub fn deriv_unit(&self, x: f64) -> Result<Interval, SurgeryError> {
        self.deriv(self.from_unit(x))
    }
}

