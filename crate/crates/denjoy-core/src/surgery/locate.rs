//! Point location in `I_β` and evaluation of `g_β`.
//!
//! A coordinate y is located by bisection over the monotone map
//! `x ↦ ι(x)`, starting from the two records around y. Each split point gets
//! an enclosure of `ι`; when y falls inside one of those enclosures both
//! sides are kept, so the answer is a short list of candidate locations whose
//! images are hulled.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::branch::{deriv_extrema, local_deriv, local_value_interval, BranchKind};
use super::{Side, SurgeredMapDescriptor, SurgeryError};
use crate::enclosure::Interval;
use crate::tent_core::{tent_apply, AlgebraicPoint};

/// Bisection steps allowed per bracket.
const MAX_SPLITS: usize = 160;
/// Brackets kept alive when y sits on an enclosure boundary.
const MAX_BRACKETS: usize = 8;

/// An inserted interval, materialized or found on the fly.
#[derive(Clone, Debug, PartialEq)]
pub struct HostInfo {
    pub point: AlgebraicPoint,
    pub level: usize,
    pub record: Option<usize>,
    pub branch: BranchKind,
    pub length: Interval,
    pub iota_minus: Interval,
}

impl HostInfo {
    pub fn iota_plus(&self) -> Interval {
        self.iota_minus + self.length
    }
}

/// A point of [0, 1] with the ends of its image in `I_β`; the ends differ
/// only at hosts.
#[derive(Clone, Debug, PartialEq)]
pub struct Anchor {
    pub x: AlgebraicPoint,
    pub xf: f64,
    /// `ι⁻(x)`.
    pub left: Interval,
    /// `ι⁺(x)`.
    pub right: Interval,
    pub host: Option<HostInfo>,
}

/// One candidate position of a coordinate.
#[derive(Clone, Debug, PartialEq)]
pub enum Location {
    /// Inside the interval at `host`, `xi` from its left end.
    Inserted { host: HostInfo, xi: Interval },
    /// In the Cantor part between the two anchors: `π(y) ∈ [left.x, right.x]`.
    Gap { left: Anchor, right: Anchor },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    Inserted { host: HostInfo, xi: Interval },
    /// `pi` encloses `π(y)`.
    Cantor { pi: Interval },
    /// y lies within resolution of an inserted-interval end.
    Unresolved { candidates: Vec<Location> },
}

impl SurgeredMapDescriptor {
    fn anchor_from_record(&self, i: usize) -> Anchor {
        let r = &self.records[i];
        Anchor {
            x: r.host.point.clone(),
            xf: r.host_f,
            left: r.iota_minus,
            right: r.iota_plus(),
            host: Some(HostInfo {
                point: r.host.point.clone(),
                level: r.host.level,
                record: Some(i),
                branch: r.branch,
                length: r.length_enc,
                iota_minus: r.iota_minus,
            }),
        }
    }

    /// Anchor at an exact point of [0, 1].
    pub fn anchor(&self, x: &AlgebraicPoint) -> Result<Anchor, SurgeryError> {
        self.anchor_with(x, None)
    }

    /// As [`anchor`](Self::anchor), with the host level supplied when it is
    /// already known.
    fn anchor_with(&self, x: &AlgebraicPoint, level: Option<usize>) -> Result<Anchor, SurgeryError> {
        if let Some(i) = self.find_record(x)? {
            return Ok(self.anchor_from_record(i));
        }
        let beta = &self.beta;
        let (mass, level) = match level {
            Some(n) => (self.left_mass(x)?, Some(n)),
            None => self.mass.left_mass_and_level(x, self.eps / 64.0, self.host_scan)?,
        };
        let iota = beta.to_interval(x) + mass;
        let xf = beta.to_interval(x).mid();
        let host = match level {
            Some(level) => {
                let length = beta.to_interval(&self.schedule.exact(level.max(1)));
                let branch = if beta.compare(x, &beta.half())? == Ordering::Less {
                    BranchKind::HInc
                } else {
                    BranchKind::RDec
                };
                Some(HostInfo { point: x.clone(), level, record: None, branch, length, iota_minus: iota })
            }
            None => None,
        };
        let right = match &host {
            Some(h) => h.iota_plus(),
            // A host deeper than the scan would carry at most this much.
            None => {
                let deep = crate::preimage::level_length(beta.beta_interval(), self.host_scan + 1).hi;
                Interval::new(iota.lo, (iota.hi + deep).next_up())
            }
        };
        Ok(Anchor { x: x.clone(), xf, left: iota, right, host })
    }

    /// A first-hit preimage of `c_t` strictly between `a < b`, with its level.
    ///
    /// Both points are pushed forward together; `f^k` stays affine on
    /// `[a, b]` until an orbit point falls strictly between the images, and
    /// that orbit point pulls back to a host.
    pub fn host_between(
        &self,
        a: &AlgebraicPoint,
        b: &AlgebraicPoint,
    ) -> Result<Option<(AlgebraicPoint, usize)>, SurgeryError> {
        let beta = &self.beta;
        let half = beta.half();
        let orbit_enc: Vec<Interval> = self.orbit.points.iter().map(|p| beta.to_interval(p)).collect();
        let (mut x, mut y) = (a.clone(), b.clone());
        // f^k(z) = σ β^k z + κ on [a, b].
        let mut flipped = false;
        let mut kappa = beta.zero();
        for k in 0..self.kernel_len {
            let (lo, hi) = if beta.compare(&x, &y)? == Ordering::Less { (&x, &y) } else { (&y, &x) };
            let span = beta.to_interval(lo).hull(&beta.to_interval(hi));
            for (i, p) in self.orbit.points.iter().enumerate() {
                if !orbit_enc[i].intersects(&span) {
                    continue;
                }
                if beta.compare(lo, p)? == Ordering::Less && beta.compare(p, hi)? == Ordering::Less {
                    let mut z = beta.mul(&p.sub(&kappa), &beta.pow_beta(-(k as i64)));
                    if flipped {
                        z = z.neg();
                    }
                    return Ok(Some((z, k + self.orbit.level_of(i))));
                }
            }
            let right = beta.compare(lo, &half)? != Ordering::Less;
            let bt = beta.beta();
            if right {
                flipped = !flipped;
                kappa = bt.sub(&beta.mul(&bt, &kappa));
            } else {
                kappa = beta.mul(&bt, &kappa);
            }
            x = tent_apply(beta, &x)?;
            y = tent_apply(beta, &y)?;
        }
        Ok(None)
    }

    /// Candidate locations of y.
    pub fn locate(&self, y: f64) -> Result<Vec<Location>, SurgeryError> {
        let end = self.right_end();
        if !(y >= 0.0 && y <= end.hi) {
            return Err(SurgeryError::OutOfRange(y));
        }
        let n = self.records.len();
        let k = self.records.partition_point(|r| r.iota_minus.lo <= y);
        let lo = k.saturating_sub(2);
        let hi = (k + 1).min(n - 1);
        let mut anchors = Vec::with_capacity(6);
        if lo == 0 && !self.records[0].host.point.is_zero() {
            anchors.push(self.anchor(&self.beta.zero())?);
        }
        for i in lo..=hi {
            anchors.push(self.anchor_from_record(i));
        }
        if hi == n - 1 && self.records[n - 1].host.point != self.beta.one() {
            anchors.push(self.anchor(&self.beta.one())?);
        }

        let mut out = Vec::new();
        let mut brackets = Vec::new();
        for (j, a) in anchors.iter().enumerate() {
            if let Some(h) = &a.host {
                if let Some(loc) = inside(h, y) {
                    out.push(loc);
                }
            }
            if let Some(b) = anchors.get(j + 1) {
                if y >= a.right.lo && y <= b.left.hi {
                    brackets.push((a.clone(), b.clone(), 0usize));
                }
            }
        }
        let gap_tol = self.eps / (2.0 * self.beta.approx());
        while let Some((a, b, splits)) = brackets.pop() {
            // Midpoints, not hulls: the hull never drops below the enclosure
            // widths, which are about the deep tail.
            let w = b.left.mid() - a.right.mid();
            if w <= gap_tol || splits >= MAX_SPLITS {
                out.push(Location::Gap { left: a, right: b });
                continue;
            }
            // An ι-gap far wider than the x-gap means an insertion sits in
            // between; split there rather than converge onto its edge.
            let hidden = if (b.xf - a.xf) * 16.0 < w { self.host_between(&a.x, &b.x)? } else { None };
            let sa = match hidden {
                Some((h, level)) => self.anchor_with(&h, Some(level))?,
                None => match self.split_point(&a, &b)? {
                    Some(s) => self.anchor(&s)?,
                    None => {
                        out.push(Location::Gap { left: a, right: b });
                        continue;
                    }
                },
            };
            let crowded = brackets.len() >= MAX_BRACKETS;
            let below = y <= sa.left.hi;
            let above = y >= sa.right.lo;
            if let Some(h) = &sa.host {
                if let Some(loc) = inside(h, y) {
                    out.push(loc);
                }
            }
            match (below, above) {
                (true, true) if crowded => out.push(Location::Gap { left: a, right: b }),
                (true, true) => {
                    brackets.push((a, sa.clone(), splits + 1));
                    brackets.push((sa, b, splits + 1));
                }
                (true, false) if y >= a.right.lo => brackets.push((a, sa, splits + 1)),
                (false, true) if y <= b.left.hi => brackets.push((sa, b, splits + 1)),
                _ => {}
            }
        }
        if out.is_empty() {
            return Err(SurgeryError::OutOfRange(y));
        }
        Ok(out)
    }

    /// A non-dyadic rational strictly between the anchors, or `None` once
    /// they are adjacent in f64.
    fn split_point(&self, a: &Anchor, b: &Anchor) -> Result<Option<AlgebraicPoint>, SurgeryError> {
        const SCALE: f64 = 4_503_599_627_370_496.0; // 2^52
        let m = 0.5 * (a.xf + b.xf);
        let k = libm::floor(m * SCALE) as i64;
        let q = BigRational::new(BigInt::from(3 * k + 1), BigInt::from(3i64 << 52));
        let s = self.beta.from_rational(q);
        let ok = self.beta.compare(&a.x, &s)? == Ordering::Less && self.beta.compare(&s, &b.x)? == Ordering::Less;
        Ok(ok.then_some(s))
    }

    /// Locates y and summarizes the candidates.
    pub fn classify(&self, y: f64) -> Result<Classification, SurgeryError> {
        let mut cands = self.locate(y)?;
        if cands.len() == 1 {
            return Ok(match cands.pop().expect("one candidate") {
                Location::Inserted { host, xi } => Classification::Inserted { host, xi },
                Location::Gap { left, right } => Classification::Cantor { pi: gap_pi(&self.beta, &left, &right) },
            });
        }
        if cands.iter().all(|c| matches!(c, Location::Gap { .. })) {
            let mut pi: Option<Interval> = None;
            for c in &cands {
                if let Location::Gap { left, right } = c {
                    let p = gap_pi(&self.beta, left, right);
                    pi = Some(pi.map_or(p, |q| q.hull(&p)));
                }
            }
            return Ok(Classification::Cantor { pi: pi.expect("nonempty") });
        }
        Ok(Classification::Unresolved { candidates: cands })
    }

    /// Enclosure of `g_β(y)`.
    pub fn eval(&self, y: f64) -> Result<Interval, SurgeryError> {
        let mut acc: Option<Interval> = None;
        for loc in self.locate(y)? {
            let v = self.eval_location(&loc)?;
            acc = Some(acc.map_or(v, |a| a.hull(&v)));
        }
        Ok(acc.expect("locate returns at least one candidate"))
    }

    /// Enclosure of `g_β'(y)`; ±β on the Cantor part.
    pub fn deriv(&self, y: f64) -> Result<Interval, SurgeryError> {
        let b = self.beta.approx();
        let mut acc: Option<Interval> = None;
        for loc in self.locate(y)? {
            let d = match &loc {
                Location::Inserted { host, xi } => self.deriv_inserted(host, *xi)?,
                Location::Gap { left, .. } => {
                    if self.beta.compare(&left.x, &self.beta.half())? == Ordering::Less {
                        Interval::point(b)
                    } else {
                        Interval::point(-b)
                    }
                }
            };
            acc = Some(acc.map_or(d, |a| a.hull(&d)));
        }
        Ok(acc.expect("nonempty"))
    }

    /// Image interval of a host's branch: `(ι⁻ of the target, target length)`.
    fn target_of(&self, host: &HostInfo) -> Result<(Interval, Interval), SurgeryError> {
        if let Some(i) = host.record {
            let t = &self.records[self.records[i].target];
            return Ok((t.iota_minus, t.length_enc));
        }
        let fx = tent_apply(&self.beta, &host.point)?;
        let a = self.anchor(&fx)?;
        let h = a.host.ok_or_else(|| SurgeryError::Descriptor("image of a host is not a host".into()))?;
        Ok((h.iota_minus, h.length))
    }

    pub fn eval_location(&self, loc: &Location) -> Result<Interval, SurgeryError> {
        match loc {
            Location::Inserted { host, xi } => {
                let (t0, l2) = self.target_of(host)?;
                let v = local_value_interval(host.branch, self.beta.approx(), host.length.mid(), l2.mid(), *xi);
                let slack = 1e-15 * (l2.hi + 1.0) + 4.0 * (host.length.width() + l2.width());
                Ok((t0 + v).inflate(slack))
            }
            Location::Gap { left, right } => {
                let fa = self.image_anchor(left)?;
                let fb = self.image_anchor(right)?;
                let on_left = self.beta.compare(&left.x, &self.beta.half())? == Ordering::Less;
                let (lo, hi) = if on_left { (fa.right.lo, fb.left.hi) } else { (fb.right.lo, fa.left.hi) };
                Ok(Interval::new(lo.min(hi), hi.max(lo)))
            }
        }
    }

    fn image_anchor(&self, a: &Anchor) -> Result<Anchor, SurgeryError> {
        if let Some(HostInfo { record: Some(i), .. }) = &a.host {
            return Ok(self.anchor_from_record(self.records[*i].target));
        }
        let fx = tent_apply(&self.beta, &a.x)?;
        self.anchor(&fx)
    }

    fn deriv_inserted(&self, host: &HostInfo, xi: Interval) -> Result<Interval, SurgeryError> {
        let (_, l2) = self.target_of(host)?;
        let beta = self.beta.approx();
        let (l1, l2) = (host.length.mid(), l2.mid());
        let unit = matches!(
            host.branch,
            BranchKind::UnitG | BranchKind::UnitW | BranchKind::CritF1 | BranchKind::CritF2
        );
        let dom = if unit { 1.0 } else { l1 };
        let lo = xi.lo.clamp(0.0, dom);
        let hi = xi.hi.clamp(0.0, dom);
        let mut pts = vec![lo, hi];
        pts.extend(deriv_extrema(host.branch, beta, l1).into_iter().filter(|&e| lo < e && e < hi));
        let vals: Vec<f64> = pts.iter().map(|&x| local_deriv(host.branch, beta, l1, l2, x)).collect();
        let mn = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let mx = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval::new(mn, mx).inflate(1e-12 * (1.0 + mx.abs())))
    }

    /// Record side of an inserted location, if materialized.
    pub fn side_of(&self, host: &HostInfo) -> Option<Side> {
        host.record.map(|i| self.records[i].side)
    }
}

/// The inserted-interval candidate for y, skipping exact end coordinates
/// (those belong to the Cantor part).
fn inside(h: &HostInfo, y: f64) -> Option<Location> {
    let left = h.iota_minus;
    let right = h.iota_plus();
    if !(y >= left.lo && y <= right.hi) {
        return None;
    }
    if (left.lo == left.hi && y == left.lo) || (right.lo == right.hi && y == right.hi) {
        return None;
    }
    let len = h.length.hi;
    let xi = Interval::new((y - left.hi).next_down().clamp(0.0, len), (y - left.lo).next_up().clamp(0.0, len));
    Some(Location::Inserted { host: h.clone(), xi })
}

fn gap_pi(beta: &crate::tent_core::AlgebraicParameter, a: &Anchor, b: &Anchor) -> Interval {
    beta.to_interval(&a.x).hull(&beta.to_interval(&b.x))
}
