//! Dense univariate polynomials over ℚ, coefficients in ascending order.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub(crate) type Poly = Vec<BigRational>;

pub(crate) fn trim(p: &mut Poly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

pub(crate) fn trimmed(mut p: Poly) -> Poly {
    trim(&mut p);
    p
}

/// Degree of a trimmed polynomial, `None` for the zero polynomial.
pub(crate) fn degree(p: &[BigRational]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub(crate) fn from_ints_ascending(ints: &[BigInt]) -> Poly {
    trimmed(ints.iter().map(|c| BigRational::from_integer(c.clone())).collect())
}

pub(crate) fn eval(p: &[BigRational], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

pub(crate) fn sign_at(p: &[BigRational], x: &BigRational) -> Ordering {
    eval(p, x).cmp(&BigRational::zero())
}

pub(crate) fn derivative(p: &[BigRational]) -> Poly {
    let out = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect();
    trimmed(out)
}

pub(crate) fn sub(a: &[BigRational], b: &[BigRational]) -> Poly {
    let n = a.len().max(b.len());
    let zero = BigRational::zero();
    let out = (0..n)
        .map(|i| a.get(i).unwrap_or(&zero) - b.get(i).unwrap_or(&zero))
        .collect();
    trimmed(out)
}

pub(crate) fn mul(a: &[BigRational], b: &[BigRational]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trimmed(out)
}

pub(crate) fn scale(a: &[BigRational], k: &BigRational) -> Poly {
    trimmed(a.iter().map(|c| c * k).collect())
}

/// Euclidean division; panics on a zero divisor.
pub(crate) fn div_rem(a: &[BigRational], b: &[BigRational]) -> (Poly, Poly) {
    let db = degree(b).expect("division by the zero polynomial");
    let lead = b[db].clone();
    let mut rem = trimmed(a.to_vec());
    let mut quot = Vec::new();
    while let Some(dr) = degree(&rem) {
        if dr < db {
            break;
        }
        let k = &rem[dr] / &lead;
        let shift = dr - db;
        if quot.len() <= shift {
            quot.resize(shift + 1, BigRational::zero());
        }
        quot[shift] = k.clone();
        for (i, c) in b.iter().enumerate().take(db + 1) {
            let t = c * &k;
            rem[i + shift] -= t;
        }
        trim(&mut rem);
    }
    (trimmed(quot), rem)
}

pub(crate) fn rem(a: &[BigRational], b: &[BigRational]) -> Poly {
    div_rem(a, b).1
}

pub(crate) fn monic(p: &[BigRational]) -> Poly {
    match degree(p) {
        None => Vec::new(),
        Some(d) => {
            let lead = p[d].clone();
            p[..=d].iter().map(|c| c / &lead).collect()
        }
    }
}

pub(crate) fn gcd(a: &[BigRational], b: &[BigRational]) -> Poly {
    let mut x = trimmed(a.to_vec());
    let mut y = trimmed(b.to_vec());
    while !y.is_empty() {
        let r = rem(&x, &y);
        x = y;
        y = r;
    }
    monic(&x)
}

/// Returns `(g, s)` with `s·a ≡ g (mod b)` and `g` monic.
pub(crate) fn half_xgcd(a: &[BigRational], b: &[BigRational]) -> (Poly, Poly) {
    let mut r0 = trimmed(a.to_vec());
    let mut r1 = trimmed(b.to_vec());
    let mut s0: Poly = vec![BigRational::one()];
    let mut s1: Poly = Vec::new();
    while !r1.is_empty() {
        let (q, r) = div_rem(&r0, &r1);
        let s = sub(&s0, &mul(&q, &s1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    match degree(&r0) {
        None => (Vec::new(), Vec::new()),
        Some(d) => {
            let lead = r0[d].clone();
            let inv = BigRational::one() / lead;
            (scale(&r0, &inv), scale(&s0, &inv))
        }
    }
}

/// Sturm chain p, p', -rem(p, p'), …
pub(crate) fn sturm_chain(p: &[BigRational]) -> Vec<Poly> {
    let mut chain = vec![trimmed(p.to_vec()), derivative(p)];
    loop {
        let n = chain.len();
        if chain[n - 1].is_empty() {
            chain.pop();
            break;
        }
        let r = rem(&chain[n - 2], &chain[n - 1]);
        if r.is_empty() {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    chain
}

pub(crate) fn sign_variations(chain: &[Poly], x: &BigRational) -> usize {
    let mut last = Ordering::Equal;
    let mut count = 0;
    for p in chain {
        let s = sign_at(p, x);
        if s == Ordering::Equal {
            continue;
        }
        if last != Ordering::Equal && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Number of distinct real roots in `(lo, hi]` of a square-free polynomial.
pub(crate) fn count_roots(chain: &[Poly], lo: &BigRational, hi: &BigRational) -> usize {
    sign_variations(chain, lo).saturating_sub(sign_variations(chain, hi))
}

/// Cauchy bound: every real root has absolute value below the result.
pub(crate) fn root_bound(p: &[BigRational]) -> BigRational {
    let d = degree(p).expect("zero polynomial has no root bound");
    let lead = p[d].abs();
    let mut m = BigRational::zero();
    for c in &p[..d] {
        let r = c.abs() / &lead;
        if r > m {
            m = r;
        }
    }
    m + BigRational::one()
}

/// Largest real root isolated to width at most `tol_bits` by Sturm bisection.
pub(crate) fn largest_real_root(p: &[BigRational], tol_bits: u32) -> Option<(BigRational, BigRational)> {
    let sq = {
        let g = gcd(p, &derivative(p));
        if degree(&g).unwrap_or(0) > 0 {
            div_rem(p, &g).0
        } else {
            trimmed(p.to_vec())
        }
    };
    degree(&sq)?;
    let chain = sturm_chain(&sq);
    let bound = root_bound(&sq);
    let mut lo = -bound.clone();
    let mut hi = bound;
    if count_roots(&chain, &lo, &hi) == 0 {
        return None;
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let tol = BigRational::new(BigInt::one(), BigInt::one() << tol_bits);
    while &hi - &lo > tol {
        let mid = (&lo + &hi) / &two;
        let above = count_roots(&chain, &mid, &hi) > 0;
        if !above && sign_at(&sq, &mid) == Ordering::Equal {
            return Some((mid.clone(), mid));
        }
        if above {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn division_recovers_factors() {
        // (x - 1)(x + 2) = x^2 + x - 2
        let p = vec![q(-2), q(1), q(1)];
        let (quot, r) = div_rem(&p, &[q(-1), q(1)]);
        assert!(r.is_empty());
        assert_eq!(quot, vec![q(2), q(1)]);
    }

    #[test]
    fn sturm_counts_golden_roots() {
        let p = vec![q(-1), q(-1), q(1)];
        let chain = sturm_chain(&p);
        assert_eq!(count_roots(&chain, &q(1), &q(2)), 1);
        assert_eq!(count_roots(&chain, &q(-3), &q(3)), 2);
    }

    #[test]
    fn largest_root_of_sqrt_two() {
        let p = vec![q(-2), q(0), q(1)];
        let (lo, hi) = largest_real_root(&p, 40).unwrap();
        let lo = num_traits::ToPrimitive::to_f64(&lo).unwrap();
        let hi = num_traits::ToPrimitive::to_f64(&hi).unwrap();
        assert!(lo <= core::f64::consts::SQRT_2 && core::f64::consts::SQRT_2 <= hi);
    }

    #[test]
    fn inverse_modulo() {
        // x * (x - 1) = x^2 - x ≡ 1 mod x^2 - x - 1
        let p = vec![q(-1), q(-1), q(1)];
        let (g, s) = half_xgcd(&[q(0), q(1)], &p);
        assert_eq!(g, vec![q(1)]);
        assert_eq!(s, vec![q(-1), q(1)]);
    }
}
