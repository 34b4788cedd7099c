//! Closed f64 intervals with outward rounding.

use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// A closed interval `[lo, hi]`. Arithmetic rounds each endpoint one ulp
/// outward, which over-covers round-to-nearest error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// `[x - r, x + r]`, rounded outward.
    pub fn ball(x: f64, r: f64) -> Self {
        let r = r.abs();
        Interval { lo: (x - r).next_down(), hi: (x + r).next_up() }
    }

    /// Tight enclosure of an exact rational.
    pub fn from_rational(q: &BigRational) -> Self {
        if q.is_zero() {
            return Interval::ZERO;
        }
        if q.denom() == &BigInt::from(1) {
            if let Some(v) = q.numer().to_i64() {
                if v.unsigned_abs() < (1u64 << 53) {
                    return Interval::point(v as f64);
                }
            }
        }
        let d = q.denom();
        let dyadic = d.trailing_zeros() == Some(d.bits() - 1);
        if dyadic && q.numer().bits() <= 53 && d.bits() <= 1000 {
            if let Some(v) = q.to_f64() {
                return Interval::point(v);
            }
        }
        match q.to_f64() {
            Some(v) if v.is_finite() => {
                Interval { lo: v.next_down().next_down(), hi: v.next_up().next_up() }
            }
            _ => Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY },
        }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).next_up()
    }

    pub fn mid(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }

    /// Largest distance from the midpoint to an endpoint.
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        (m - self.lo).max(self.hi - m).next_up()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Widens by `r` on both sides.
    pub fn inflate(&self, r: f64) -> Interval {
        Interval { lo: (self.lo - r).next_down(), hi: (self.hi + r).next_up() }
    }

    pub fn scale(&self, k: f64) -> Interval {
        let a = self.lo * k;
        let b = self.hi * k;
        Interval { lo: a.min(b).next_down(), hi: a.max(b).next_up() }
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            -*self
        } else {
            Interval { lo: 0.0, hi: (-self.lo).max(self.hi) }
        }
    }

    pub fn recip(&self) -> Interval {
        if self.lo > 0.0 || self.hi < 0.0 {
            Interval { lo: (1.0 / self.hi).next_down(), hi: (1.0 / self.lo).next_up() }
        } else {
            Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
        }
    }

    pub fn div(&self, other: &Interval) -> Interval {
        *self * other.recip()
    }

    pub fn sqr(&self) -> Interval {
        let a = self.abs();
        Interval { lo: (a.lo * a.lo).next_down().max(0.0), hi: (a.hi * a.hi).next_up() }
    }

    /// Non-negative integer power by repeated multiplication.
    pub fn powi(&self, n: u32) -> Interval {
        let mut acc = Interval::point(1.0);
        for _ in 0..n {
            acc = acc * *self;
        }
        acc
    }

    /// Enclosure of `ln` on a positive interval.
    pub fn ln(&self) -> Interval {
        let lo = libm::log(self.lo);
        let hi = libm::log(self.hi);
        // libm's log is faithful to within 1 ulp.
        Interval { lo: lo.next_down().next_down(), hi: hi.next_up().next_up() }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval { lo: (self.lo + o.lo).next_down(), hi: (self.hi + o.hi).next_up() }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval { lo: (self.lo - o.hi).next_down(), hi: (self.hi - o.lo).next_up() }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let mut lo = p[0];
        let mut hi = p[0];
        for v in &p[1..] {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        Interval { lo: lo.next_down(), hi: hi.next_up() }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn addition_covers_exact_sum() {
        let a = Interval::point(0.1);
        let b = Interval::point(0.2);
        let s = a + b;
        // 0.1 + 0.2 is not exactly representable; the enclosure must straddle it.
        assert!(s.lo < 0.30000000000000004 && s.hi >= 0.30000000000000004);
        assert!(s.width() < 1e-15);
    }

    #[test]
    fn rational_enclosure_contains_third() {
        let q = BigRational::new(BigInt::from(1), BigInt::from(3));
        let iv = Interval::from_rational(&q);
        assert!(iv.lo < 1.0 / 3.0 + 1e-17 && iv.hi > 1.0 / 3.0 - 1e-17);
        assert!(iv.lo * 3.0 <= 1.0 && iv.hi * 3.0 >= 1.0);
    }

    #[test]
    fn product_sign_cases() {
        let a = Interval::new(-1.0, 2.0);
        let b = Interval::new(-3.0, 0.5);
        let p = a * b;
        assert!(p.lo <= -6.0 && p.hi >= 3.0);
    }
}
