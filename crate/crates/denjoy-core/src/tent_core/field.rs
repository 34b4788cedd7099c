//! Arithmetic in ℚ(β) for a real algebraic β given by a square-free
//! polynomial and an isolating interval.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{self, Poly};
use crate::enclosure::Interval;

/// Bits of isolating-interval refinement done when a parameter is built.
pub const EAGER_BITS: u32 = 320;
/// Default ceiling on refinement during sign determination.
pub const DEFAULT_BIT_BUDGET: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("minimal polynomial must have degree at least 1")]
    DegreeZero,
    #[error("minimal polynomial is not square-free")]
    NotSquareFree,
    #[error("isolating interval is empty")]
    EmptyInterval,
    #[error("isolating interval endpoint is a root")]
    EndpointRoot,
    #[error("isolating interval contains {0} roots, expected exactly 1")]
    RootCount(usize),
    #[error("slope must satisfy 1 < beta <= 2")]
    SlopeOutOfRange,
    #[error("sign undecided after {0} bits of refinement")]
    PrecisionExhausted(u32),
    #[error("element is not invertible modulo the minimal polynomial")]
    NotInvertible,
    #[error("coefficient vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// An element `Σ q_i β^i` of ℚ(β), reduced to degree below `d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgebraicPoint {
    coeffs: Vec<BigRational>,
}

impl AlgebraicPoint {
    pub fn zero(d: usize) -> Self {
        AlgebraicPoint { coeffs: vec![BigRational::zero(); d] }
    }

    pub fn from_rational(q: BigRational, d: usize) -> Self {
        let mut p = Self::zero(d);
        p.coeffs[0] = q;
        p
    }

    pub fn from_ratio(num: i64, den: i64, d: usize) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)), d)
    }

    pub fn one(d: usize) -> Self {
        Self::from_ratio(1, 1, d)
    }

    pub fn half(d: usize) -> Self {
        Self::from_ratio(1, 2, d)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// `Some(q)` when the point is the rational `q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect();
        AlgebraicPoint { coeffs }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect();
        AlgebraicPoint { coeffs }
    }

    pub fn neg(&self) -> Self {
        AlgebraicPoint { coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        AlgebraicPoint { coeffs: self.coeffs.iter().map(|a| a * k).collect() }
    }

    /// `1 - self`.
    pub fn one_minus(&self) -> Self {
        let mut out = self.neg();
        out.coeffs[0] += BigRational::one();
        out
    }

    /// Midpoint `(self + o) / 2`.
    pub fn midpoint(&self, o: &Self) -> Self {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        self.add(o).scale(&half)
    }

    /// Human-readable form such as `1/2 + 1/4*b`.
    pub fn to_expr(&self) -> String {
        let mut s = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !s.is_empty() {
                s.push_str(if c.is_negative() { " - " } else { " + " });
            } else if c.is_negative() {
                s.push('-');
            }
            let a = c.abs();
            match (i, a.is_one()) {
                (0, _) => write!(s, "{a}").unwrap(),
                (1, true) => s.push('b'),
                (1, false) => write!(s, "{a}*b").unwrap(),
                (_, true) => write!(s, "b^{i}").unwrap(),
                (_, false) => write!(s, "{a}*b^{i}").unwrap(),
            }
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }

    fn as_poly(&self) -> Poly {
        poly::trimmed(self.coeffs.clone())
    }

    fn from_poly(mut p: Poly, d: usize) -> Self {
        p.resize(d, BigRational::zero());
        AlgebraicPoint { coeffs: p }
    }

    /// Builds a point from raw coefficients, checking the length.
    pub fn from_coeffs(coeffs: Vec<BigRational>, d: usize) -> Result<Self, FieldError> {
        if coeffs.len() != d {
            return Err(FieldError::LengthMismatch { expected: d, got: coeffs.len() });
        }
        Ok(AlgebraicPoint { coeffs })
    }
}

/// A real algebraic slope β together with a refined enclosure of it.
///
/// The enclosure is refined once, at construction, to [`EAGER_BITS`]; deeper
/// refinement needed by an individual sign query is local to that query. The
/// parameter is therefore immutable and can be shared between threads.
#[derive(Clone, Debug)]
pub struct AlgebraicParameter {
    min_poly: Vec<BigInt>,
    poly: Poly,
    reducer: Poly,
    chain: Vec<Poly>,
    isolate: (BigRational, BigRational),
    enc: (BigRational, BigRational),
    cached_bits: u32,
    lo_pows: Vec<BigRational>,
    hi_pows: Vec<BigRational>,
    pow_f: Vec<Interval>,
    beta_f: Interval,
    approx: f64,
    beta_inv: AlgebraicPoint,
    bit_budget: u32,
}

fn two() -> BigRational {
    BigRational::from_integer(BigInt::from(2))
}

fn powers(x: &BigRational, d: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(d);
    let mut acc = BigRational::one();
    for _ in 0..d {
        out.push(acc.clone());
        acc *= x;
    }
    out
}

impl AlgebraicParameter {
    /// `min_poly` lists integer coefficients from the leading one down to the
    /// constant term, e.g. `[1, -1, -1]` for `x² - x - 1`.
    pub fn new(min_poly: Vec<BigInt>, lo: BigRational, hi: BigRational) -> Result<Self, FieldError> {
        let asc: Vec<BigInt> = min_poly.iter().rev().cloned().collect();
        let poly = poly::from_ints_ascending(&asc);
        let d = match poly::degree(&poly) {
            None | Some(0) => return Err(FieldError::DegreeZero),
            Some(d) => d,
        };
        let g = poly::gcd(&poly, &poly::derivative(&poly));
        if poly::degree(&g) != Some(0) {
            return Err(FieldError::NotSquareFree);
        }
        if lo >= hi {
            return Err(FieldError::EmptyInterval);
        }
        if poly::eval(&poly, &lo).is_zero() || poly::eval(&poly, &hi).is_zero() {
            return Err(FieldError::EndpointRoot);
        }
        let chain = poly::sturm_chain(&poly);
        let n = poly::count_roots(&chain, &lo, &hi);
        if n != 1 {
            return Err(FieldError::RootCount(n));
        }
        let (elo, ehi, bits) = refine(&poly, lo.clone(), hi.clone(), EAGER_BITS);
        let reducer = poly::monic(&poly);
        let lo_pows = powers(&elo, d);
        let hi_pows = powers(&ehi, d);
        let lo_f = Interval::from_rational(&elo).lo;
        let hi_f = Interval::from_rational(&ehi).hi;
        let beta_f = Interval::new(lo_f, hi_f);
        let mut pow_f = Vec::with_capacity(d);
        let mut acc = Interval::point(1.0);
        for _ in 0..d {
            pow_f.push(acc);
            acc = acc * beta_f;
        }
        let approx = beta_f.mid();
        let mut param = AlgebraicParameter {
            min_poly,
            poly,
            reducer,
            chain,
            isolate: (lo, hi),
            enc: (elo, ehi),
            cached_bits: bits,
            lo_pows,
            hi_pows,
            pow_f,
            beta_f,
            approx,
            beta_inv: AlgebraicPoint::zero(d),
            bit_budget: DEFAULT_BIT_BUDGET,
        };
        if param.cmp_rational(&BigRational::one())? != Ordering::Greater
            || param.cmp_rational(&two())? == Ordering::Greater
        {
            return Err(FieldError::SlopeOutOfRange);
        }
        param.beta_inv = param.inv(&param.beta())?;
        Ok(param)
    }

    /// Integer polynomial from small coefficients and an isolating interval
    /// with small rational endpoints.
    pub fn from_ints(min_poly: &[i64], lo: (i64, i64), hi: (i64, i64)) -> Result<Self, FieldError> {
        Self::new(
            min_poly.iter().map(|&c| BigInt::from(c)).collect(),
            BigRational::new(BigInt::from(lo.0), BigInt::from(lo.1)),
            BigRational::new(BigInt::from(hi.0), BigInt::from(hi.1)),
        )
    }

    pub fn with_bit_budget(mut self, bits: u32) -> Self {
        self.bit_budget = bits.max(self.cached_bits);
        self
    }

    pub fn degree(&self) -> usize {
        self.reducer.len() - 1
    }

    /// Coefficients from the leading one down, as supplied.
    pub fn min_poly(&self) -> &[BigInt] {
        &self.min_poly
    }

    pub fn isolating_interval(&self) -> (&BigRational, &BigRational) {
        (&self.isolate.0, &self.isolate.1)
    }

    /// Current rational enclosure of β.
    pub fn enclosure(&self) -> (&BigRational, &BigRational) {
        (&self.enc.0, &self.enc.1)
    }

    pub fn cached_precision(&self) -> u32 {
        self.cached_bits
    }

    pub fn bit_budget(&self) -> u32 {
        self.bit_budget
    }

    pub fn approx(&self) -> f64 {
        self.approx
    }

    pub fn beta_interval(&self) -> Interval {
        self.beta_f
    }

    /// Exact characteristic data equality: same polynomial, same root.
    pub fn same_number(&self, other: &Self) -> bool {
        self.reducer == other.reducer
            && self.enc.0 <= other.enc.1
            && other.enc.0 <= self.enc.1
    }

    pub fn zero(&self) -> AlgebraicPoint {
        AlgebraicPoint::zero(self.degree())
    }

    pub fn one(&self) -> AlgebraicPoint {
        AlgebraicPoint::one(self.degree())
    }

    pub fn half(&self) -> AlgebraicPoint {
        AlgebraicPoint::half(self.degree())
    }

    pub fn rational(&self, num: i64, den: i64) -> AlgebraicPoint {
        AlgebraicPoint::from_ratio(num, den, self.degree())
    }

    pub fn from_rational(&self, q: BigRational) -> AlgebraicPoint {
        AlgebraicPoint::from_rational(q, self.degree())
    }

    /// β itself as a field element.
    pub fn beta(&self) -> AlgebraicPoint {
        let x = vec![BigRational::zero(), BigRational::one()];
        AlgebraicPoint::from_poly(poly::rem(&x, &self.reducer), self.degree())
    }

    pub fn reduce(&self, p: &[BigRational]) -> AlgebraicPoint {
        AlgebraicPoint::from_poly(poly::rem(p, &self.reducer), self.degree())
    }

    pub fn mul(&self, a: &AlgebraicPoint, b: &AlgebraicPoint) -> AlgebraicPoint {
        self.reduce(&poly::mul(&a.as_poly(), &b.as_poly()))
    }

    pub fn mul_beta(&self, a: &AlgebraicPoint) -> AlgebraicPoint {
        let d = self.degree();
        if d == 1 {
            return a.scale(&(-&self.reducer[0]));
        }
        let mut shifted = Vec::with_capacity(d + 1);
        shifted.push(BigRational::zero());
        shifted.extend(a.coeffs.iter().cloned());
        let top = shifted[d].clone();
        if !top.is_zero() {
            for (i, r) in self.reducer.iter().enumerate().take(d) {
                shifted[i] -= &top * r;
            }
        }
        shifted.truncate(d);
        AlgebraicPoint { coeffs: shifted }
    }

    pub fn div_beta(&self, a: &AlgebraicPoint) -> AlgebraicPoint {
        self.mul(a, &self.beta_inv)
    }

    pub fn beta_inv(&self) -> &AlgebraicPoint {
        &self.beta_inv
    }

    pub fn inv(&self, a: &AlgebraicPoint) -> Result<AlgebraicPoint, FieldError> {
        let (g, s) = poly::half_xgcd(&a.as_poly(), &self.reducer);
        if g.len() == 1 && g[0].is_one() {
            Ok(self.reduce(&s))
        } else {
            Err(FieldError::NotInvertible)
        }
    }

    pub fn div(&self, a: &AlgebraicPoint, b: &AlgebraicPoint) -> Result<AlgebraicPoint, FieldError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// β^k for any integer k.
    pub fn pow_beta(&self, k: i64) -> AlgebraicPoint {
        let mut acc = self.one();
        if k >= 0 {
            for _ in 0..k {
                acc = self.mul_beta(&acc);
            }
        } else {
            for _ in 0..(-k) {
                acc = self.div_beta(&acc);
            }
        }
        acc
    }

    pub fn pow(&self, a: &AlgebraicPoint, k: u32) -> AlgebraicPoint {
        let mut acc = self.one();
        for _ in 0..k {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// Sign of the real number represented by `a`.
    pub fn sign(&self, a: &AlgebraicPoint) -> Result<Ordering, FieldError> {
        if a.is_zero() {
            return Ok(Ordering::Equal);
        }
        if let Some(q) = a.as_rational() {
            return Ok(q.cmp(&BigRational::zero()));
        }
        let fast = self.float_enclosure(a);
        if fast.lo > 0.0 {
            return Ok(Ordering::Greater);
        }
        if fast.hi < 0.0 {
            return Ok(Ordering::Less);
        }
        if let Some(s) = bounds_sign(a, &self.lo_pows, &self.hi_pows) {
            return Ok(s);
        }
        let (mut lo, mut hi) = self.enc.clone();
        let mut bits = self.cached_bits;
        let d = self.degree();
        while bits < self.bit_budget {
            let chunk = 32.min(self.bit_budget - bits);
            let r = refine(&self.poly, lo, hi, chunk);
            lo = r.0;
            hi = r.1;
            bits += chunk;
            let lp = powers(&lo, d);
            let hp = powers(&hi, d);
            if let Some(s) = bounds_sign(a, &lp, &hp) {
                return Ok(s);
            }
        }
        Err(FieldError::PrecisionExhausted(self.bit_budget))
    }

    pub fn compare(&self, a: &AlgebraicPoint, b: &AlgebraicPoint) -> Result<Ordering, FieldError> {
        if a == b {
            return Ok(Ordering::Equal);
        }
        self.sign(&a.sub(b))
    }

    /// Compares β with a rational.
    pub fn cmp_rational(&self, q: &BigRational) -> Result<Ordering, FieldError> {
        let b = self.beta();
        self.compare(&b, &self.from_rational(q.clone()))
    }

    /// Outward-rounded enclosure of the value of `a`.
    pub fn to_interval(&self, a: &AlgebraicPoint) -> Interval {
        if let Some(q) = a.as_rational() {
            return Interval::from_rational(q);
        }
        let fast = self.float_enclosure(a);
        if fast.is_finite() && fast.width() <= 1e-14 * (1.0 + fast.mid().abs()) {
            return fast;
        }
        let (lo, hi) = self.rational_bounds(a, &self.lo_pows, &self.hi_pows);
        Interval::new(Interval::from_rational(&lo).lo, Interval::from_rational(&hi).hi)
    }

    pub fn to_f64(&self, a: &AlgebraicPoint) -> f64 {
        self.to_interval(a).mid()
    }

    fn float_enclosure(&self, a: &AlgebraicPoint) -> Interval {
        let mut acc = Interval::ZERO;
        for (c, p) in a.coeffs.iter().zip(&self.pow_f) {
            if !c.is_zero() {
                acc = acc + Interval::from_rational(c) * *p;
            }
        }
        acc
    }

    /// Exact lower and upper bounds of `a` for β in the enclosure whose
    /// powers are given. Uses `β > 0`, so each power is increasing in β.
    fn rational_bounds(
        &self,
        a: &AlgebraicPoint,
        lo_pows: &[BigRational],
        hi_pows: &[BigRational],
    ) -> (BigRational, BigRational) {
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        for ((c, l), h) in a.coeffs.iter().zip(lo_pows).zip(hi_pows) {
            if c.is_zero() {
                continue;
            }
            let x = c * l;
            let y = c * h;
            if c.is_positive() {
                lo += x;
                hi += y;
            } else {
                lo += y;
                hi += x;
            }
        }
        (lo, hi)
    }

    /// Number of real roots of the minimal polynomial in `(lo, hi]`.
    pub fn roots_in(&self, lo: &BigRational, hi: &BigRational) -> usize {
        poly::count_roots(&self.chain, lo, hi)
    }

    /// Ascending rational coefficients of the minimal polynomial.
    pub(crate) fn poly_ascending(&self) -> &[BigRational] {
        &self.poly
    }
}

/// Sign of `Σ c_i v_i` with `v_i` taken from `lo` or `hi` so that the sum is
/// a lower (`upper = false`) or upper bound; computed over a common
/// denominator to avoid gcd reductions.
fn bound_numerator(coeffs: &[BigRational], lo: &[BigRational], hi: &[BigRational], upper: bool) -> Ordering {
    let terms: Vec<(BigInt, BigInt)> = coeffs
        .iter()
        .zip(lo)
        .zip(hi)
        .filter(|((c, _), _)| !c.is_zero())
        .map(|((c, l), h)| {
            let v = if c.is_positive() != upper { l } else { h };
            (c.numer() * v.numer(), c.denom() * v.denom())
        })
        .collect();
    let mut total = BigInt::zero();
    for (i, (n, _)) in terms.iter().enumerate() {
        let mut t = n.clone();
        for (j, (_, d)) in terms.iter().enumerate() {
            if i != j {
                t *= d;
            }
        }
        total += t;
    }
    match total.sign() {
        num_bigint::Sign::Plus => Ordering::Greater,
        num_bigint::Sign::Minus => Ordering::Less,
        num_bigint::Sign::NoSign => Ordering::Equal,
    }
}

/// The sign of `a` if it is the same over the whole enclosure of β.
fn bounds_sign(a: &AlgebraicPoint, lo: &[BigRational], hi: &[BigRational]) -> Option<Ordering> {
    if bound_numerator(&a.coeffs, lo, hi, false) == Ordering::Greater {
        Some(Ordering::Greater)
    } else if bound_numerator(&a.coeffs, lo, hi, true) == Ordering::Less {
        Some(Ordering::Less)
    } else {
        None
    }
}

/// Bisects `[lo, hi]` (one simple root inside, none at the ends) `bits` times.
/// Collapses to a point if a midpoint hits the root.
fn refine(p: &[BigRational], mut lo: BigRational, mut hi: BigRational, bits: u32) -> (BigRational, BigRational, u32) {
    if lo == hi {
        return (lo, hi, bits);
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let s_lo = poly::sign_at(p, &lo);
    for _ in 0..bits {
        let mid = (&lo + &hi) * &half;
        let s = poly::sign_at(p, &mid);
        if s == Ordering::Equal {
            return (mid.clone(), mid, u32::MAX / 2);
        }
        if s == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi, bits)
}
