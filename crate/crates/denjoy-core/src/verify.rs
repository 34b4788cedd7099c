//! Numerical checks on a laid-out map: difference quotients across the
//! Cantor part, inserted length, hyperbolicity of endpoint orbits, absorption
//! into the orbit intervals, the attractor's location and entropy.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::enclosure::Interval;
use crate::markov::{build_matrix, build_partition, char_poly, min_poly_divides, spectral_radius, MarkovError};
use crate::preimage::{enumerate_tree, level_count, sort_points, CountTable, PreimageError, PreimageNode};
use crate::surgery::{
    endpoint_derivative_exact, local_deriv, local_value, on_cycle, BranchKind, SurgeredMapDescriptor,
    SurgeryError,
};
use crate::tent_core::{
    core_interval, renorm_depth, restrictive_interval, tent_apply, AlgebraicParameter, AlgebraicPoint, Catalog,
    CriticalOrbitData, FieldError, ItineraryWord, TentError,
};

/// Relative accuracy asked of mass differences in quotient checks.
const QUOTIENT_REL: f64 = 1e-10;
/// Levels past the base depth searched for a quotient partner.
const PARTNER_EXTRA: usize = 3;
/// Steps on the orbit cycle allowed for locating the attracting cycle.
const CYCLE_ITER: usize = 20_000;
/// Longest return-map period looked for.
const MAX_RETURN_PERIOD: usize = 8;
const CYCLE_TOL: f64 = 1e-12;
/// Relative distance to an end below which a seed counts as landing on the
/// Cantor part.
const END_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Surgery(#[from] SurgeryError),
    #[error(transparent)]
    Preimage(#[from] PreimageError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error("no quotient partner at depth {0}")]
    InsufficientDepth(usize),
    #[error("growth constant {0} is not finite")]
    NonFinite(f64),
}

impl From<FieldError> for VerifyError {
    fn from(e: FieldError) -> Self {
        VerifyError::Surgery(e.into())
    }
}

impl From<TentError> for VerifyError {
    fn from(e: TentError) -> Self {
        VerifyError::Surgery(e.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Status::Pass
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        })
    }
}

/// One line of a verification suite.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub check_name: String,
    pub status: Status,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckReport {
    pub fn new(name: &str, ok: bool, measured: f64, bound: f64, tolerance: f64, detail: String) -> Self {
        CheckReport { check_name: name.into(), status: Status::from_bool(ok), measured, bound, tolerance, detail }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} measured={:.9e} bound={:.9e} tol={:.1e}",
            self.status, self.check_name, self.measured, self.bound, self.tolerance
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Difference quotients

/// Quotient `(g(z) − g(y)) / (z − y)` across the gap between two hosts.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientSample {
    pub base: ItineraryWord,
    pub partner: ItineraryWord,
    pub depth: usize,
    pub quotient: Interval,
    /// `β + 6/(n − 1)`.
    pub bound: f64,
}

impl QuotientSample {
    /// `|q| ∈ [β − tol, bound + tol]`.
    pub fn within(&self, beta: f64, tol: f64) -> bool {
        let a = self.quotient.abs();
        a.lo >= beta - tol && a.hi <= self.bound + tol
    }
}

fn host_len(d: &SurgeredMapDescriptor, p: &AlgebraicPoint, level: usize) -> AlgebraicPoint {
    if d.orbit().index_of(p).is_some() {
        d.beta().one()
    } else {
        d.schedule().exact(level.max(1))
    }
}

/// Length of `(ι⁺(u), ι⁻(v))` for hosts `u < v`.
fn host_gap(
    d: &SurgeredMapDescriptor,
    u: &AlgebraicPoint,
    lu: usize,
    v: &AlgebraicPoint,
) -> Result<Interval, VerifyError> {
    let beta = d.beta();
    let exact = v.sub(u).sub(&host_len(d, u, lu));
    Ok(beta.to_interval(&exact) + d.mass().mass_between(u, v, QUOTIENT_REL)?)
}

/// Difference quotient of `g_β` over the gap between hosts `u < v`.
pub fn gap_quotient(
    d: &SurgeredMapDescriptor,
    u: &PreimageNode,
    v: &PreimageNode,
) -> Result<Interval, VerifyError> {
    let beta = d.beta();
    let den = host_gap(d, &u.point, u.level, &v.point)?;
    let fu = tent_apply(beta, &u.point)?;
    let fv = tent_apply(beta, &v.point)?;
    let (lu, lv) = (u.level.saturating_sub(1), v.level.saturating_sub(1));
    let num = if beta.compare(&u.point, &beta.half())? == Ordering::Less {
        host_gap(d, &fu, lu, &fv)?
    } else {
        // ι⁺(u) ↦ ι⁻(f u) and ι⁻(v) ↦ ι⁺(f v); at u = c both ends of its
        // interval go to ι⁻(c₁), which is the same rule.
        -host_gap(d, &fv, lv, &fu)?
    };
    Ok(num.div(&den))
}

/// Sorted hosts of levels `0..=depth`.
pub fn sorted_hosts(
    beta: &AlgebraicParameter,
    orbit: &CriticalOrbitData,
    depth: usize,
) -> Result<Vec<PreimageNode>, VerifyError> {
    let mut all: Vec<PreimageNode> = enumerate_tree(beta, orbit, depth)?.into_iter().flatten().collect();
    sort_points(beta, &mut all, |n| &n.point)?;
    Ok(all)
}

/// Quotients at `samples_per_depth` level-n hosts for each n in `depths`,
/// each paired with its nearest neighbour of level at most n + 3.
pub fn check_quotients(
    d: &SurgeredMapDescriptor,
    depths: &[usize],
    samples_per_depth: usize,
    seed: u64,
) -> Result<Vec<QuotientSample>, VerifyError> {
    let Some(&max_n) = depths.iter().max() else {
        return Ok(Vec::new());
    };
    let hosts = sorted_hosts(d.beta(), d.orbit(), max_n + PARTNER_EXTRA)?;
    let beta = d.beta().approx();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &n in depths {
        if n < 2 {
            return Err(VerifyError::InsufficientDepth(n));
        }
        let mut idx: Vec<usize> = (0..hosts.len()).filter(|&i| hosts[i].level == n && !hosts[i].on_orbit).collect();
        if idx.is_empty() {
            return Err(VerifyError::InsufficientDepth(n));
        }
        let take = samples_per_depth.min(idx.len());
        let (chosen, _) = idx.partial_shuffle(&mut rng, take);
        for &i in chosen.iter() {
            let cap = n + PARTNER_EXTRA;
            let right = (i + 1..hosts.len()).find(|&j| hosts[j].level <= cap);
            let (u, v) = match right {
                Some(j) => (i, j),
                None => match (0..i).rev().find(|&j| hosts[j].level <= cap) {
                    Some(j) => (j, i),
                    None => return Err(VerifyError::InsufficientDepth(n)),
                },
            };
            let quotient = gap_quotient(d, &hosts[u], &hosts[v])?;
            let partner = if u == i { v } else { u };
            out.push(QuotientSample {
                base: hosts[i].word.clone(),
                partner: hosts[partner].word.clone(),
                depth: n,
                quotient,
                bound: beta + 6.0 / (n as f64 - 1.0),
            });
        }
    }
    Ok(out)
}

/// One line summarizing quotient samples against `[β, β + 6/(n − 1)] ± tol`.
pub fn quotient_report(samples: &[QuotientSample], beta: f64, tol: f64) -> CheckReport {
    let outside = samples.iter().filter(|q| !q.within(beta, tol)).count();
    let lo = samples.iter().map(|q| q.quotient.abs().lo).fold(f64::INFINITY, f64::min);
    let excess = samples.iter().map(|q| q.quotient.abs().hi - q.bound).fold(f64::NEG_INFINITY, f64::max);
    CheckReport::new(
        "difference_quotients",
        outside == 0 && !samples.is_empty(),
        lo,
        beta,
        tol,
        format!("{} samples, {outside} outside, min |q| {lo:.6}, max excess over bound {excess:.3e}", samples.len()),
    )
}

// ---------------------------------------------------------------------------
// Inserted length

/// `Σ_{n ≥ from} F(n) a(n)`.
pub fn partial_level_sum(d: &SurgeredMapDescriptor, from: usize) -> Result<Interval, VerifyError> {
    let beta = d.beta();
    let mut head = beta.zero();
    for n in 1..from {
        let f = level_count(beta, d.orbit(), n)?;
        let f = num_rational::BigRational::from_integer(num_bigint::BigInt::from(f));
        head = head.add(&d.schedule().exact(n).scale(&f));
    }
    Ok(d.mass().level_mass_sum() - beta.to_interval(&head))
}

fn contains_rational(enc: Interval, num: i64, den: i64) -> bool {
    let q = num_rational::BigRational::new(num.into(), den.into());
    enc.contains_interval(&Interval::from_rational(&q))
}

/// Length accounting, with the known constants for the catalog slopes.
pub fn check_lengths(d: &SurgeredMapDescriptor) -> Result<Vec<CheckReport>, VerifyError> {
    let mut out = Vec::new();
    let total = d.total_length();
    let frac = d.cantor_fraction();
    let sum = d.mass().level_mass_sum();
    out.push(CheckReport::new(
        "level_sum_finite",
        sum.is_finite(),
        sum.mid(),
        f64::INFINITY,
        sum.width(),
        format!("sum F(n)a(n) in {sum}"),
    ));
    out.push(CheckReport::new(
        "cantor_fraction_positive",
        frac.lo > 0.0,
        frac.mid(),
        0.0,
        frac.width(),
        format!("1/(1+L) in {frac}"),
    ));
    match Catalog::identify(d.beta()) {
        Some(Catalog::Full) => {
            let part = partial_level_sum(d, 3)?;
            let tol = 1e-6;
            out.push(CheckReport::new(
                "partial_sum_n3",
                contains_rational(part, 1, 6) && part.width() <= tol,
                part.mid(),
                1.0 / 6.0,
                tol,
                format!("enclosure {part}, width {:.3e}", part.width()),
            ));
            out.push(CheckReport::new(
                "total_length",
                contains_rational(total, 19, 6),
                total.mid(),
                19.0 / 6.0,
                total.width(),
                format!("L in {total}"),
            ));
            let dev = (frac.lo - 0.24).abs().max((frac.hi - 0.24).abs());
            out.push(CheckReport::new(
                "cantor_fraction",
                dev <= tol,
                frac.mid(),
                0.24,
                tol,
                format!("1/(1+L) in {frac}"),
            ));
        }
        Some(Catalog::Golden) => {
            out.push(CheckReport::new(
                "level_sum_below_4",
                sum.hi < 4.0,
                sum.hi,
                4.0,
                0.0,
                format!("sum F(n)a(n) in {sum}"),
            ));
        }
        _ => {
            out.push(CheckReport::new(
                "total_length_baseline",
                total.is_finite(),
                total.mid(),
                f64::INFINITY,
                total.width(),
                format!("L in {total}"),
            ));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Hyperbolicity

/// Exact `(g^j)'` at an end of a record's interval, following record targets.
///
/// Returns the product together with the record and side reached.
pub fn symbolic_derivative(
    d: &SurgeredMapDescriptor,
    record: usize,
    at_right: bool,
    j: usize,
) -> (AlgebraicPoint, usize, bool) {
    let beta = d.beta();
    let mut prod = beta.one();
    let (mut r, mut right) = (record, at_right);
    for _ in 0..j {
        let rec = d.record(r);
        let tgt = d.record(rec.target);
        let dv = endpoint_derivative_exact(beta, rec.branch, &rec.length, &tgt.length, right);
        prod = beta.mul(&prod, &dv);
        right = match rec.branch {
            BranchKind::HInc | BranchKind::UnitG => right,
            BranchKind::RDec | BranchKind::UnitW => !right,
            BranchKind::CritF1 | BranchKind::CritF2 => false,
        };
        r = rec.target;
    }
    (prod, r, right)
}

/// `|(g^j)'| = β^j` exactly at random record endpoints for `1 ≤ j ≤ j_max`.
pub fn hyperbolicity(
    d: &SurgeredMapDescriptor,
    seeds: usize,
    j_max: usize,
    seed: u64,
) -> Result<CheckReport, VerifyError> {
    let beta = d.beta();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = d.records().len();
    let mut bad = 0usize;
    let mut checked = 0usize;
    for _ in 0..seeds {
        let r = rng.random_range(0..n);
        let right = rng.random::<bool>();
        for j in 1..=j_max {
            let (p, _, _) = symbolic_derivative(d, r, right, j);
            let bj = beta.pow_beta(j as i64);
            checked += 1;
            if p != bj && p != bj.neg() {
                bad += 1;
            }
        }
    }
    Ok(CheckReport::new(
        "hyperbolicity",
        bad == 0,
        bad as f64,
        0.0,
        0.0,
        format!("{checked} exact products over {seeds} endpoints, j <= {j_max}"),
    ))
}

// ---------------------------------------------------------------------------
// Basins

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasinClass {
    PeriodicCycle,
    Cantor,
    Exceptional,
    Undecided,
}

impl fmt::Display for BasinClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasinClass::PeriodicCycle => "PERIODIC_CYCLE",
            BasinClass::Cantor => "CANTOR",
            BasinClass::Exceptional => "EXCEPTIONAL",
            BasinClass::Undecided => "UNDECIDED",
        })
    }
}

/// An attracting cycle inside the orbit intervals, in local coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleData {
    pub period: usize,
    pub multiplier: f64,
    /// Records visited, starting from the first cycle record reached.
    pub records: Vec<usize>,
    /// Offsets from the left end of each record's interval.
    pub points: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasinReport {
    pub classification: BasinClass,
    /// Steps taken before entering an interval on the orbit cycle.
    pub entry_steps: Option<usize>,
    pub iterations: usize,
    pub cycle: Option<CycleData>,
}

fn step_local(d: &SurgeredMapDescriptor, r: usize, xi: f64) -> (usize, f64) {
    let rec = d.record(r);
    let tgt = d.record(rec.target);
    let l2 = tgt.length_enc.mid();
    let v = local_value(rec.branch, d.beta().approx(), rec.length_enc.mid(), l2, xi);
    (rec.target, v.clamp(0.0, l2))
}

fn deriv_local(d: &SurgeredMapDescriptor, r: usize, xi: f64) -> f64 {
    let rec = d.record(r);
    let l2 = d.record(rec.target).length_enc.mid();
    local_deriv(rec.branch, d.beta().approx(), rec.length_enc.mid(), l2, xi)
}

/// Whether a local offset is within `tol` (relative to the length) of an end
/// or of the turning point.
fn near_end(d: &SurgeredMapDescriptor, r: usize, xi: f64, tol: f64) -> bool {
    let rec = d.record(r);
    let len = rec.length_enc.mid();
    let crit = matches!(rec.branch, BranchKind::CritF1 | BranchKind::CritF2);
    let t = tol * len;
    xi <= t || xi >= len - t || (crit && (xi - 0.5).abs() <= t)
}

/// Follows a seed inside record `r` at offset `xi`.
///
/// `max_iter` bounds the steps before the orbit cycle is entered; locating
/// the attracting cycle afterwards has its own budget.
pub fn simulate_local(d: &SurgeredMapDescriptor, r: usize, xi: f64, max_iter: usize) -> BasinReport {
    let orbit = d.orbit();
    let tol = END_TOL;
    let (mut r, mut xi) = (r, xi);
    let mut steps = 0;
    while !on_cycle(orbit, &d.record(r).label()) {
        if steps >= max_iter {
            return BasinReport { classification: BasinClass::Undecided, entry_steps: None, iterations: steps, cycle: None };
        }
        if near_end(d, r, xi, tol) {
            return BasinReport {
                classification: BasinClass::Exceptional,
                entry_steps: None,
                iterations: steps,
                cycle: None,
            };
        }
        (r, xi) = step_local(d, r, xi);
        steps += 1;
    }
    let entry = steps;
    let base = r;
    let m = orbit.period;
    let mut hist = Vec::new();
    hist.push(xi);
    let mut used = 0;
    while used < CYCLE_ITER {
        for _ in 0..m {
            if near_end(d, r, xi, tol) {
                return BasinReport {
                    classification: BasinClass::Exceptional,
                    entry_steps: Some(entry),
                    iterations: entry + used,
                    cycle: None,
                };
            }
            (r, xi) = step_local(d, r, xi);
            used += 1;
        }
        debug_assert_eq!(r, base);
        hist.push(xi);
        let k = hist.len() - 1;
        for p in 1..=MAX_RETURN_PERIOD {
            if k < 2 * p {
                break;
            }
            let settled = (hist[k] - hist[k - p]).abs() < CYCLE_TOL && (hist[k - 1] - hist[k - 1 - p]).abs() < CYCLE_TOL;
            if settled {
                // An orientation-reversing cycle settles at twice its period
                // first; keep the least period that still closes.
                let q = (1..=p).find(|&q| p % q == 0 && (hist[k] - hist[k - q]).abs() < 1e3 * CYCLE_TOL).unwrap_or(p);
                let cycle = trace_cycle(d, base, xi, q * m);
                let class =
                    if cycle.multiplier.abs() < 1.0 { BasinClass::PeriodicCycle } else { BasinClass::Undecided };
                return BasinReport {
                    classification: class,
                    entry_steps: Some(entry),
                    iterations: entry + used,
                    cycle: Some(cycle),
                };
            }
        }
    }
    BasinReport { classification: BasinClass::Undecided, entry_steps: Some(entry), iterations: entry + used, cycle: None }
}

fn trace_cycle(d: &SurgeredMapDescriptor, r: usize, xi: f64, period: usize) -> CycleData {
    let (mut r, mut xi) = (r, xi);
    let mut records = Vec::with_capacity(period);
    let mut points = Vec::with_capacity(period);
    let mut multiplier = 1.0;
    for _ in 0..period {
        records.push(r);
        points.push(xi);
        multiplier *= deriv_local(d, r, xi);
        (r, xi) = step_local(d, r, xi);
    }
    CycleData { period, multiplier, records, points }
}

/// Iterates `g_β` from `y0 ∈ I_β` until the orbit lands in a materialized
/// interval, then continues as [`simulate_local`].
pub fn simulate_basin(d: &SurgeredMapDescriptor, y0: f64, max_iter: usize) -> Result<BasinReport, VerifyError> {
    let mut y = y0;
    for it in 0..=max_iter {
        if let crate::surgery::Classification::Inserted { host, xi } = d.classify(y)? {
            if let Some(r) = host.record {
                let mut rep = simulate_local(d, r, xi.mid(), max_iter - it);
                rep.iterations += it;
                rep.entry_steps = rep.entry_steps.map(|e| e + it);
                return Ok(rep);
            }
        }
        if it == max_iter {
            break;
        }
        y = d.eval(y)?.mid().clamp(0.0, d.right_end().lo);
    }
    Ok(BasinReport { classification: BasinClass::Undecided, entry_steps: None, iterations: max_iter, cycle: None })
}

/// Endpoint orbits stay on endpoints: exact seeds are tracked symbolically.
pub fn endpoint_orbit(d: &SurgeredMapDescriptor, record: usize, at_right: bool, steps: usize) -> Vec<(usize, bool)> {
    let mut out = Vec::with_capacity(steps + 1);
    let (mut r, mut right) = (record, at_right);
    out.push((r, right));
    for _ in 0..steps {
        (_, r, right) = symbolic_derivative(d, r, right, 1);
        out.push((r, right));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbsorptionReport {
    pub words_checked: usize,
    /// Records whose target disagrees with the shifted label, or whose label
    /// does not reach the cycle in `length − 1` steps.
    pub word_mismatches: usize,
    pub seeds: usize,
    /// Seeds that entered the orbit cycle within the iteration budget.
    pub entered: usize,
    pub max_entry_steps: usize,
    pub periodic: usize,
    pub exceptional: usize,
    pub undecided: usize,
    /// Distinct attracting cycles found.
    pub cycles: Vec<CycleData>,
}

impl AbsorptionReport {
    pub fn checks(&self) -> Vec<CheckReport> {
        let worst = self.cycles.iter().map(|c| c.multiplier.abs()).fold(0.0, f64::max);
        let cycle_ok = !self.cycles.is_empty() && worst < 1.0 && self.periodic + self.exceptional == self.seeds;
        let detail = if self.cycles.is_empty() {
            format!("no attracting cycle: {} of {} seeds undecided", self.undecided, self.seeds)
        } else {
            format!("{} cycle(s), periods {:?}", self.cycles.len(), self.cycles.iter().map(|c| c.period).collect::<Vec<_>>())
        };
        alloc::vec![
            CheckReport::new(
                "absorption_symbolic",
                self.word_mismatches == 0,
                self.word_mismatches as f64,
                0.0,
                0.0,
                format!("{} words", self.words_checked),
            ),
            CheckReport::new(
                "absorption_entry",
                self.entered == self.seeds,
                self.max_entry_steps as f64,
                200.0,
                0.0,
                format!("{} of {} seeds entered", self.entered, self.seeds),
            ),
            CheckReport::new(
                "attracting_cycle",
                cycle_ok,
                if self.cycles.is_empty() { f64::NAN } else { worst },
                1.0,
                0.0,
                detail,
            ),
        ]
    }
}

/// Symbolic absorption of every record with word length at most `max_word`
/// (its targets shift the word and reach `c_t` after `length − 1` steps), and
/// `seeds` random interior seeds followed numerically.
pub fn absorption(
    d: &SurgeredMapDescriptor,
    max_word: usize,
    seeds: usize,
    max_iter: usize,
    seed: u64,
) -> AbsorptionReport {
    let home = d.orbit_record(d.orbit().preperiod);
    let mut words_checked = 0;
    let mut word_mismatches = 0;
    for rec in d.records() {
        let w = rec.word();
        if w.len() > max_word || w.len() < 2 {
            continue;
        }
        words_checked += 1;
        let shifted = d.record(rec.target).word() == &w.shift();
        let mut r = rec.target;
        let mut steps = 1;
        while r != home && steps < w.len() {
            r = d.record(r).target;
            steps += 1;
        }
        if !shifted || r != home || steps != w.len() - 1 {
            word_mismatches += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = d.records().len();
    let mut rep = AbsorptionReport {
        words_checked,
        word_mismatches,
        seeds,
        entered: 0,
        max_entry_steps: 0,
        periodic: 0,
        exceptional: 0,
        undecided: 0,
        cycles: Vec::new(),
    };
    for _ in 0..seeds {
        let r = rng.random_range(0..n);
        let len = d.record(r).length_enc.mid();
        let xi = len * rng.random_range(0.01..0.99);
        let b = simulate_local(d, r, xi, max_iter);
        if let Some(e) = b.entry_steps {
            if e <= max_iter {
                rep.entered += 1;
                rep.max_entry_steps = rep.max_entry_steps.max(e);
            }
        }
        match b.classification {
            BasinClass::PeriodicCycle => rep.periodic += 1,
            BasinClass::Exceptional => rep.exceptional += 1,
            _ => rep.undecided += 1,
        }
        if let (BasinClass::PeriodicCycle, Some(c)) = (b.classification, b.cycle) {
            let known = rep.cycles.iter().any(|k| same_cycle(k, &c));
            if !known {
                rep.cycles.push(c);
            }
        }
    }
    rep
}

fn same_cycle(a: &CycleData, b: &CycleData) -> bool {
    a.period == b.period
        && a.records.iter().zip(&a.points).any(|(r, x)| *r == b.records[0] && (x - b.points[0]).abs() < 1e-9)
}

// ---------------------------------------------------------------------------
// Attractor

/// An end of an embedded interval: `ι⁻(point)` or `ι⁺(point)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedEnd {
    pub point: AlgebraicPoint,
    pub plus: bool,
}

impl EmbeddedEnd {
    fn minus(point: AlgebraicPoint) -> Self {
        EmbeddedEnd { point, plus: false }
    }

    fn plus(point: AlgebraicPoint) -> Self {
        EmbeddedEnd { point, plus: true }
    }
}

fn end_cmp(beta: &AlgebraicParameter, a: &EmbeddedEnd, b: &EmbeddedEnd) -> Result<Ordering, FieldError> {
    Ok(beta.compare(&a.point, &b.point)?.then(a.plus.cmp(&b.plus)))
}

/// Image of an embedded end under `g_β`.
fn end_image(beta: &AlgebraicParameter, e: &EmbeddedEnd) -> Result<EmbeddedEnd, TentError> {
    let fp = tent_apply(beta, &e.point)?;
    Ok(match beta.compare(&e.point, &beta.half())? {
        // Both ends of the interval at c go to the left end at c₁.
        Ordering::Equal => EmbeddedEnd::minus(fp),
        Ordering::Less => EmbeddedEnd { point: fp, plus: e.plus },
        Ordering::Greater => EmbeddedEnd { point: fp, plus: !e.plus },
    })
}

/// `g_β([a, b])` for embedded ends `a ≤ b`.
pub fn interval_image(
    beta: &AlgebraicParameter,
    a: &EmbeddedEnd,
    b: &EmbeddedEnd,
) -> Result<(EmbeddedEnd, EmbeddedEnd), TentError> {
    let half = beta.half();
    let ga = end_image(beta, a)?;
    let gb = end_image(beta, b)?;
    let (lo, hi) = if end_cmp(beta, &ga, &gb)? == Ordering::Greater { (gb, ga) } else { (ga, gb) };
    let turns = end_cmp(beta, a, &EmbeddedEnd::minus(half.clone()))? != Ordering::Greater
        && end_cmp(beta, &EmbeddedEnd::plus(half.clone()), b)? != Ordering::Greater;
    if turns {
        // The top of the turning branch is ι⁺(c₁).
        Ok((lo, EmbeddedEnd::plus(tent_apply(beta, &half)?)))
    } else {
        Ok((lo, hi))
    }
}

fn contained(
    beta: &AlgebraicParameter,
    inner: &(EmbeddedEnd, EmbeddedEnd),
    outer: &(EmbeddedEnd, EmbeddedEnd),
) -> Result<bool, FieldError> {
    Ok(end_cmp(beta, &outer.0, &inner.0)? != Ordering::Greater && end_cmp(beta, &inner.1, &outer.1)? != Ordering::Greater)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttractorReport {
    pub renorm_depth: u32,
    /// The embedded core (k = 0) or the restrictive-interval cycle.
    pub intervals: Vec<(EmbeddedEnd, EmbeddedEnd)>,
    pub enclosures: Vec<Interval>,
    /// `g^{2^k}` maps the first interval into itself, and each interval onto
    /// the next.
    pub invariant: bool,
    /// `log ρ(B)` for the Markov transition matrix.
    pub entropy: Interval,
}

impl AttractorReport {
    pub fn checks(&self) -> Vec<CheckReport> {
        let count = 1usize << self.renorm_depth;
        let ok = self.invariant && self.intervals.len() == count;
        let spans: Vec<String> = self.enclosures.iter().map(|e| format!("[{:.4}, {:.4}]", e.lo, e.hi)).collect();
        alloc::vec![CheckReport::new(
            "attractor_cycle",
            ok,
            self.renorm_depth as f64,
            count as f64,
            0.0,
            format!("k = {}, intervals {}", self.renorm_depth, spans.join(" ")),
        )]
    }
}

/// Where the attractor sits: inside the embedded core for k = 0, inside the
/// embedded cycle of restrictive intervals otherwise.
pub fn attractor_location(d: &SurgeredMapDescriptor) -> Result<AttractorReport, VerifyError> {
    let beta = d.beta();
    let k = renorm_depth(beta)?;
    let (a, b) = if k == 0 { core_interval(beta) } else { restrictive_interval(beta, k)? };
    let first = (EmbeddedEnd::minus(a), EmbeddedEnd::plus(b));
    let count = 1usize << k;
    let mut intervals = alloc::vec![first.clone()];
    let mut invariant = true;
    for i in 0..count {
        let cur = intervals[i].clone();
        let img = interval_image(beta, &cur.0, &cur.1)?;
        if i + 1 == count {
            invariant &= contained(beta, &img, &first)?;
        } else {
            intervals.push(img);
        }
    }
    let mut enclosures = Vec::with_capacity(intervals.len());
    for (lo, hi) in &intervals {
        let l = d.embed(&lo.point, lo.plus)?;
        let h = d.embed(&hi.point, hi.plus)?;
        enclosures.push(Interval::new(l.lo, h.hi));
    }
    let partition = build_partition(beta, d.orbit())?;
    let matrix = build_matrix(&partition)?;
    let entropy = matrix.spectral_radius.interval().ln();
    Ok(AttractorReport { renorm_depth: k, intervals, enclosures, invariant, entropy })
}

// ---------------------------------------------------------------------------
// Entropy

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyReport {
    pub log_beta: Interval,
    /// `log ρ(B)`.
    pub spectral: Interval,
    /// `lap(fⁿ)` for n = 0..=n_max.
    pub laps: Vec<f64>,
    /// `½ log(lap(f^N) / lap(f^{N−2}))`.
    pub lap_estimate: f64,
    /// `(1/N) log lap(f^N)`.
    pub lap_average: f64,
}

impl EntropyReport {
    pub fn checks(&self, tol: f64) -> Vec<CheckReport> {
        let lb = self.log_beta.mid();
        let sd = (self.spectral.lo - lb).abs().max((self.spectral.hi - lb).abs());
        let ld = (self.lap_estimate - lb).abs();
        alloc::vec![
            CheckReport::new("entropy_spectral", sd <= tol, self.spectral.mid(), lb, tol, format!("log rho in {}", self.spectral)),
            CheckReport::new(
                "entropy_laps",
                ld <= tol,
                self.lap_estimate,
                lb,
                tol,
                format!("(1/n) log lap = {:.6}", self.lap_average),
            ),
        ]
    }
}

/// Entropy from the transition matrix and from lap numbers of `fⁿ`.
///
/// The turning points of `fⁿ` are the points reaching c in fewer than n
/// steps, so `lap(fⁿ) = 1 + Σ_{k<n} #{first hits of c at time k}`.
pub fn entropy_check(
    beta: &AlgebraicParameter,
    orbit: &CriticalOrbitData,
    n_max: usize,
) -> Result<EntropyReport, VerifyError> {
    let n_max = n_max.max(2);
    let partition = build_partition(beta, orbit)?;
    let matrix = build_matrix(&partition)?;
    let rho = spectral_radius(&matrix.entries, 1e-12)?;
    let spectral = rho.interval().ln();
    let mut table = CountTable::for_orbit_point(beta, orbit, 0)?;
    let mut laps = Vec::with_capacity(n_max + 1);
    let mut acc = num_bigint::BigUint::from(1u8);
    laps.push(1.0);
    for k in 0..n_max {
        acc += table.level_count(k);
        laps.push(acc.to_f64().unwrap_or(f64::INFINITY));
    }
    let lap_estimate = 0.5 * libm::log(laps[n_max] / laps[n_max - 2]);
    let lap_average = libm::log(laps[n_max]) / n_max as f64;
    Ok(EntropyReport { log_beta: beta.beta_interval().ln(), spectral, laps, lap_estimate, lap_average })
}

// ---------------------------------------------------------------------------
// Transition matrix, growth and conjugacy

/// Spectral enclosure width and the characteristic-polynomial divisibility.
pub fn check_spectral(
    beta: &AlgebraicParameter,
    orbit: &CriticalOrbitData,
    max_width: f64,
) -> Result<Vec<CheckReport>, VerifyError> {
    let partition = build_partition(beta, orbit)?;
    let matrix = build_matrix(&partition)?;
    let rho = spectral_radius(&matrix.entries, max_width / 4.0)?;
    let width = rho.width();
    let contains = rho.contains_beta(beta)?;
    let divides = min_poly_divides(beta, &matrix.entries);
    Ok(alloc::vec![
        CheckReport::new(
            "spectral_radius",
            contains && width <= max_width,
            width,
            max_width,
            0.0,
            format!("rho in {} ({} blocks)", rho.interval(), matrix.size()),
        ),
        CheckReport::new(
            "min_poly_divides",
            divides,
            divides as u8 as f64,
            1.0,
            0.0,
            format!("char poly {:?}", char_poly(&matrix.entries)),
        ),
    ])
}

/// `F(n) ≤ M βⁿ` for `n = 1..=n_max`, compared exactly in ℚ(β).
pub fn check_growth(
    beta: &AlgebraicParameter,
    orbit: &CriticalOrbitData,
    m: f64,
    n_max: usize,
) -> Result<CheckReport, VerifyError> {
    let mq = BigRational::from_float(m).ok_or(VerifyError::NonFinite(m))?;
    let mut table = CountTable::new(beta, orbit)?;
    let bf = beta.beta_interval();
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut first_bad = None;
    for n in 1..=n_max {
        let f = table.level_count(n);
        let fq = BigRational::from_integer(f.clone().into());
        let bound = beta.from_rational(mq.clone());
        let bound = beta.mul(&bound, &beta.pow_beta(n as i64));
        if beta.compare(&beta.from_rational(fq), &bound)? == Ordering::Greater {
            ok = false;
            first_bad.get_or_insert(n);
        }
        let ratio = Interval::from_rational(&BigRational::from_integer(f.into())).div(&bf.powi(n as u32));
        worst = worst.max(ratio.hi);
    }
    let detail = match first_bad {
        Some(n) => format!("first violation at n = {n}"),
        None => format!("n = 1..={n_max}"),
    };
    Ok(CheckReport::new("growth_bound", ok, worst, m, 0.0, detail))
}

/// `f` on an interval of [0, 1].
fn tent_interval(bf: Interval, x: Interval) -> Interval {
    let p = x.lo.max(0.0);
    let q = x.hi.min(1.0);
    if q <= 0.5 {
        Interval::new(p, q) * bf
    } else if p >= 0.5 {
        Interval::new(1.0 - q, 1.0 - p) * bf
    } else {
        let lo = (Interval::point(p.min(1.0 - q)) * bf).lo;
        Interval::new(lo, (bf.hi * 0.5).next_up())
    }
}

/// `π∘g = f∘π` and `g̃∘φ = φ∘g` at random points of `[0, b]`.
pub fn check_conjugacy(
    d: &SurgeredMapDescriptor,
    samples: usize,
    seed: u64,
) -> Result<Vec<CheckReport>, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = d.unit_scale();
    let bf = d.beta().beta_interval();
    let mut bad_pi = 0usize;
    let mut bad_unit = 0usize;
    let mut gap_pi = 0.0f64;
    let mut gap_unit = 0.0f64;
    for _ in 0..samples {
        let x: f64 = rng.random_range(0.0..1.0);
        let y = d.from_unit(x);
        let v = d.eval(y)?;
        let lo = d.collapse(v.lo.clamp(0.0, b))?;
        let hi = d.collapse(v.hi.clamp(0.0, b))?;
        let lhs = Interval::new(lo.lo, hi.hi);
        let rhs = tent_interval(bf, d.collapse(y)?);
        if !lhs.intersects(&rhs) {
            bad_pi += 1;
        }
        gap_pi = gap_pi.max(lhs.hull(&rhs).width());
        let u = d.eval_unit(x)?;
        let w = Interval::new((v.lo / b).next_down(), (v.hi / b).next_up());
        if !u.intersects(&w) {
            bad_unit += 1;
        }
        gap_unit = gap_unit.max(u.hull(&w).width());
    }
    Ok(alloc::vec![
        CheckReport::new(
            "conjugacy_collapse",
            bad_pi == 0,
            bad_pi as f64,
            0.0,
            0.0,
            format!("{samples} points, widest hull {gap_pi:.3e}"),
        ),
        CheckReport::new(
            "conjugacy_unit",
            bad_unit == 0,
            bad_unit as f64,
            0.0,
            0.0,
            format!("{samples} points, widest hull {gap_unit:.3e}"),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tent_core::{critical_orbit, DEFAULT_MAX_ITER};

    #[test]
    fn laps_of_full_tent() {
        let b = Catalog::Full.parameter();
        let o = critical_orbit(&b, DEFAULT_MAX_ITER).unwrap().finite().unwrap();
        let e = entropy_check(&b, &o, 10).unwrap();
        for (n, l) in e.laps.iter().enumerate() {
            assert_eq!(*l, (1u64 << n) as f64);
        }
    }

    #[test]
    fn golden_core_is_invariant() {
        let b = Catalog::Golden.parameter();
        let (lo, hi) = core_interval(&b);
        let img = interval_image(&b, &EmbeddedEnd::minus(lo.clone()), &EmbeddedEnd::plus(hi.clone())).unwrap();
        assert_eq!(img.0, EmbeddedEnd::minus(lo));
        assert_eq!(img.1, EmbeddedEnd::plus(hi));
    }
}
