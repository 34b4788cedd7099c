//! Cubic diffeomorphisms between inserted intervals.
//!
//! Every branch is stored in local form: `ξ ∈ [0, ℓ1]` measured from the left
//! end of the domain, value measured from the left end of the range.

use core::fmt;
use core::str::FromStr;

use crate::enclosure::Interval;
use crate::tent_core::{AlgebraicParameter, AlgebraicPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BranchKind {
    /// Increasing, endpoint slopes β, range at least β times the domain.
    HInc,
    /// Decreasing mirror of `HInc`.
    RDec,
    /// Increasing unit-to-unit map with endpoint slopes β.
    UnitG,
    /// Decreasing unit-to-unit map with endpoint slopes −β.
    UnitW,
    /// Rising half of the turning map on the critical interval.
    CritF1,
    /// Falling half of the turning map.
    CritF2,
}

impl BranchKind {
    pub fn name(self) -> &'static str {
        match self {
            BranchKind::HInc => "H_INC",
            BranchKind::RDec => "R_DEC",
            BranchKind::UnitG => "UNIT_G",
            BranchKind::UnitW => "UNIT_W",
            BranchKind::CritF1 => "CRIT_F1",
            BranchKind::CritF2 => "CRIT_F2",
        }
    }

    /// Whether the branch reverses orientation (`CritF1`/`CritF2` count as the
    /// turning pair, which is neither).
    pub fn is_decreasing(self) -> bool {
        matches!(self, BranchKind::RDec | BranchKind::UnitW | BranchKind::CritF2)
    }
}

impl fmt::Display for BranchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BranchKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "H_INC" => BranchKind::HInc,
            "R_DEC" => BranchKind::RDec,
            "UNIT_G" => BranchKind::UnitG,
            "UNIT_W" => BranchKind::UnitW,
            "CRIT_F1" => BranchKind::CritF1,
            "CRIT_F2" => BranchKind::CritF2,
            _ => return Err(()),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum BranchError {
    #[error("{0} lies outside the branch domain")]
    Domain(f64),
    #[error("range/domain ratio {0} is below the slope")]
    Ratio(f64),
}

/// A branch `[u1, v1] → [u2, v2]` (for `CritF1`, `[p0, p0 + 1/2] → [p1, q1]`;
/// for `CritF2`, `[p0 + 1/2, q0] → [p1, q1]`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicBranch {
    pub kind: BranchKind,
    pub domain: (f64, f64),
    pub range: (f64, f64),
    pub beta: f64,
}

impl CubicBranch {
    pub fn new(kind: BranchKind, domain: (f64, f64), range: (f64, f64), beta: f64) -> Result<Self, BranchError> {
        let b = CubicBranch { kind, domain, range, beta };
        if matches!(kind, BranchKind::HInc | BranchKind::RDec) {
            let ratio = (range.1 - range.0) / (domain.1 - domain.0);
            if ratio < beta * (1.0 - 1e-12) {
                return Err(BranchError::Ratio(ratio));
            }
        }
        Ok(b)
    }

    fn l1(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    fn l2(&self) -> f64 {
        self.range.1 - self.range.0
    }

    fn local(&self, x: f64) -> Result<f64, BranchError> {
        let slack = 1e-12 * (1.0 + self.domain.0.abs().max(self.domain.1.abs()));
        if !(x >= self.domain.0 - slack && x <= self.domain.1 + slack) {
            return Err(BranchError::Domain(x));
        }
        Ok(x - self.domain.0)
    }

    /// Value at `x`.
    pub fn eval(&self, x: f64) -> Result<f64, BranchError> {
        let xi = self.local(x)?;
        Ok(self.range.0 + local_value(self.kind, self.beta, self.l1(), self.l2(), xi))
    }

    /// Derivative at `x`.
    pub fn deriv(&self, x: f64) -> Result<f64, BranchError> {
        let xi = self.local(x)?;
        Ok(local_deriv(self.kind, self.beta, self.l1(), self.l2(), xi))
    }

    /// Value of the derivative at the interior critical point of the
    /// derivative (its extremum), or the endpoint value if the derivative is
    /// monotone on the domain.
    pub fn derivative_extremum(&self) -> f64 {
        let l1 = self.l1();
        match self.kind {
            BranchKind::HInc | BranchKind::RDec | BranchKind::UnitG | BranchKind::UnitW => {
                local_deriv(self.kind, self.beta, l1, self.l2(), 0.5 * l1)
            }
            BranchKind::CritF1 => 0.0,
            BranchKind::CritF2 => -self.beta,
        }
    }
}

/// `K = 6 (ℓ2 − β ℓ1) / ℓ1³`.
fn curvature(beta: f64, l1: f64, l2: f64) -> f64 {
    6.0 * (l2 - beta * l1) / (l1 * l1 * l1)
}

/// `H(ξ) = βξ + K (ℓ1 ξ²/2 − ξ³/3)`.
fn h_local(beta: f64, l1: f64, l2: f64, xi: f64) -> f64 {
    beta * xi + curvature(beta, l1, l2) * xi * xi * (0.5 * l1 - xi / 3.0)
}

/// `G(ξ) = βξ + (β − 1)(2ξ³ − 3ξ²)` on the unit interval.
fn g_local(beta: f64, xi: f64) -> f64 {
    beta * xi + (beta - 1.0) * xi * xi * (2.0 * xi - 3.0)
}

/// Value in local coordinates; for the turning pair `ξ` runs over `[0, 1]`.
pub fn local_value(kind: BranchKind, beta: f64, l1: f64, l2: f64, xi: f64) -> f64 {
    match kind {
        BranchKind::HInc => h_local(beta, l1, l2, xi),
        BranchKind::RDec => l2 - h_local(beta, l1, l2, xi),
        BranchKind::UnitG => g_local(beta, xi),
        BranchKind::UnitW => 1.0 - g_local(beta, xi),
        BranchKind::CritF1 | BranchKind::CritF2 => turning_value(beta, xi),
    }
}

pub fn local_deriv(kind: BranchKind, beta: f64, l1: f64, l2: f64, xi: f64) -> f64 {
    match kind {
        BranchKind::HInc => beta + curvature(beta, l1, l2) * xi * (l1 - xi),
        BranchKind::RDec => -(beta + curvature(beta, l1, l2) * xi * (l1 - xi)),
        BranchKind::UnitG => beta + 6.0 * (beta - 1.0) * xi * (xi - 1.0),
        BranchKind::UnitW => -(beta + 6.0 * (beta - 1.0) * xi * (xi - 1.0)),
        BranchKind::CritF1 | BranchKind::CritF2 => turning_deriv(beta, xi),
    }
}

/// The turning map on `[0, 1]`: `F1` on `[0, 1/2]`, `F2` on `(1/2, 1]`.
pub fn turning_value(beta: f64, xi: f64) -> f64 {
    if xi <= 0.5 {
        ((-16.0 + 4.0 * beta) * xi + (12.0 - 4.0 * beta)) * xi * xi + beta * xi
    } else {
        let u = xi - 0.5;
        ((16.0 - 4.0 * beta) * u + (2.0 * beta - 12.0)) * u * u + 1.0
    }
}

pub fn turning_deriv(beta: f64, xi: f64) -> f64 {
    if xi <= 0.5 {
        (1.0 - 2.0 * xi) * ((24.0 - 6.0 * beta) * xi + beta)
    } else {
        let u = xi - 0.5;
        u * ((48.0 - 12.0 * beta) * u + 4.0 * beta - 24.0)
    }
}

/// Interior points where the local derivative has an extremum or a kink.
pub fn deriv_extrema(kind: BranchKind, beta: f64, l1: f64) -> alloc::vec::Vec<f64> {
    match kind {
        BranchKind::HInc | BranchKind::RDec => alloc::vec![0.5 * l1],
        BranchKind::UnitG | BranchKind::UnitW => alloc::vec![0.5],
        BranchKind::CritF1 | BranchKind::CritF2 => {
            let a = 24.0 - 6.0 * beta;
            let c = 48.0 - 12.0 * beta;
            let mut v = alloc::vec![0.5];
            let x1 = (a - 2.0 * beta) / (4.0 * a);
            if x1 > 0.0 && x1 < 0.5 {
                v.push(x1);
            }
            let u2 = (24.0 - 4.0 * beta) / (2.0 * c);
            if u2 > 0.0 && u2 < 0.5 {
                v.push(0.5 + u2);
            }
            v
        }
    }
}

/// Largest `|g'|` over the branch.
pub fn max_abs_deriv(kind: BranchKind, beta: f64, l1: f64, l2: f64) -> f64 {
    let unit = matches!(kind, BranchKind::UnitG | BranchKind::UnitW | BranchKind::CritF1 | BranchKind::CritF2);
    let dom = if unit { 1.0 } else { l1 };
    let mut pts = deriv_extrema(kind, beta, l1);
    pts.push(0.0);
    pts.push(dom);
    pts.iter().map(|&x| local_deriv(kind, beta, l1, l2, x).abs()).fold(0.0, f64::max)
}

/// Enclosure of a monotone piece over `ξ ∈ xi` (clipped to the domain).
pub fn local_value_interval(kind: BranchKind, beta: f64, l1: f64, l2: f64, xi: Interval) -> Interval {
    let dom = match kind {
        BranchKind::CritF1 | BranchKind::CritF2 | BranchKind::UnitG | BranchKind::UnitW => 1.0,
        _ => l1,
    };
    let lo = xi.lo.clamp(0.0, dom);
    let hi = xi.hi.clamp(0.0, dom);
    let mut a = local_value(kind, beta, l1, l2, lo);
    let mut b = local_value(kind, beta, l1, l2, hi);
    if matches!(kind, BranchKind::CritF1 | BranchKind::CritF2) && lo <= 0.5 && hi > 0.5 {
        // The maximum 1 is attained at the turning point.
        b = b.min(a);
        a = 1.0;
    }
    let (lo_v, hi_v) = if a <= b { (a, b) } else { (b, a) };
    let slack = 8.0 * f64::EPSILON * (1.0 + l2.abs() + lo_v.abs().max(hi_v.abs()));
    Interval::new(lo_v - slack, hi_v + slack)
}

/// Exact one-sided derivative at an end of the domain: `at_right` selects
/// `ξ = ℓ1` (or `ξ = 1` for unit and turning branches).
///
/// Lengths enter only through `(ℓ1 − ξ) ξ`, which vanishes at both ends, so
/// the value is `±β` whenever the formulas are right; this recomputes it in
/// ℚ(β) rather than assuming it.
pub fn endpoint_derivative_exact(
    beta: &AlgebraicParameter,
    kind: BranchKind,
    l1: &AlgebraicPoint,
    l2: &AlgebraicPoint,
    at_right: bool,
) -> AlgebraicPoint {
    let b = beta.beta();
    let one = beta.one();
    let unit = matches!(kind, BranchKind::UnitG | BranchKind::UnitW | BranchKind::CritF1 | BranchKind::CritF2);
    let len = if unit { one.clone() } else { l1.clone() };
    let xi = if at_right { len.clone() } else { beta.zero() };
    let prod = beta.mul(&xi, &len.sub(&xi));
    match kind {
        BranchKind::HInc | BranchKind::RDec => {
            // K ξ(ℓ1 − ξ) with K = 6(ℓ2 − βℓ1)/ℓ1³; the product is exactly zero here.
            let k_num = l2.sub(&beta.mul(&b, l1)).scale(&rat(6));
            let l1_cubed = beta.mul(l1, &beta.mul(l1, l1));
            let corr = if prod.is_zero() {
                beta.zero()
            } else {
                let k = beta.div(&k_num, &l1_cubed).expect("positive length");
                beta.mul(&k, &prod)
            };
            let d = b.add(&corr);
            if kind == BranchKind::RDec {
                d.neg()
            } else {
                d
            }
        }
        BranchKind::UnitG | BranchKind::UnitW => {
            // β + 6(β − 1) ξ(ξ − 1)
            let corr = beta.mul(&b.sub(&one).scale(&rat(6)), &prod.neg());
            let d = b.add(&corr);
            if kind == BranchKind::UnitW {
                d.neg()
            } else {
                d
            }
        }
        BranchKind::CritF1 | BranchKind::CritF2 => {
            // F1'(0) = β; F2'(1/2 in shifted coordinates) = 3(16 − 4β)/4 + (2β − 12) = −β.
            if at_right {
                let a = beta.rational(16, 1).sub(&b.scale(&rat(4))).scale(&ratio(3, 4));
                a.add(&b.scale(&rat(2)).sub(&beta.rational(12, 1)))
            } else {
                let a = beta.rational(24, 1).sub(&b.scale(&rat(6)));
                // (1 − 2ξ)(aξ + β) at ξ = 0
                beta.mul(&one, &beta.mul(&a, &beta.zero()).add(&b))
            }
        }
    }
}

fn rat(n: i64) -> num_rational::BigRational {
    num_rational::BigRational::from_integer(n.into())
}

fn ratio(n: i64, d: i64) -> num_rational::BigRational {
    num_rational::BigRational::new(n.into(), d.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turning_pair_matches_full_tent_example() {
        // β = 2: F1 = −8ξ³ + 4ξ² + 2ξ; F1(1/2) = 1, F1'(1/2) = 0.
        assert_eq!(turning_value(2.0, 0.5), 1.0);
        assert_eq!(turning_deriv(2.0, 0.5), 0.0);
        assert_eq!(turning_deriv(2.0, 0.0), 2.0);
        assert_eq!(turning_deriv(2.0, 1.0), -2.0);
        assert_eq!(turning_value(2.0, 1.0), 0.0);
    }

    #[test]
    fn affine_when_ratio_is_beta() {
        let b = CubicBranch::new(BranchKind::HInc, (0.0, 0.5), (3.0, 4.0), 2.0).unwrap();
        for x in [0.0, 0.1, 0.25, 0.4, 0.5] {
            assert!((b.deriv(x).unwrap() - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_fixed_point() {
        assert!((g_local(2.0, 0.5) - 0.5).abs() < 1e-15);
        assert!((local_deriv(BranchKind::UnitG, 2.0, 1.0, 1.0, 0.5) - 0.5).abs() < 1e-15);
    }
}
