use std::cmp::Ordering;

use denjoy_core::preimage::preimages_one_step;
use denjoy_core::tent_core::{
    itinerary, parity_lex_compare, tent_apply, AlgebraicParameter, AlgebraicPoint, Catalog,
};
use denjoy_core::Interval;
use num_rational::BigRational;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `p + r β` for small rationals.
fn point(beta: &AlgebraicParameter, c: (i64, i64, i64, i64)) -> AlgebraicPoint {
    beta.from_rational(q(c.0, c.1)).add(&beta.beta().scale(&q(c.2, c.3)))
}

/// Plain f64 value of `p + r β`, used as an independent oracle.
fn approx(beta: &AlgebraicParameter, c: (i64, i64, i64, i64)) -> f64 {
    c.0 as f64 / c.1 as f64 + beta.approx() * c.2 as f64 / c.3 as f64
}

fn coeffs() -> impl Strategy<Value = (i64, i64, i64, i64)> {
    (-60i64..60, 1i64..40, -60i64..60, 1i64..40)
}

fn irrational() -> impl Strategy<Value = Catalog> {
    prop_oneof![Just(Catalog::Golden), Just(Catalog::Sqrt2)]
}

/// A point of (0, 1) with a β component.
fn unit_point(beta: &AlgebraicParameter, num: i64, r: (i64, i64)) -> AlgebraicPoint {
    let rq = q(r.0, r.1);
    let base = q(num, 1 << 20) - &rq * BigRational::from_float(beta.approx()).unwrap();
    beta.from_rational(base).add(&beta.beta().scale(&rq))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_identities(cat in irrational(), a in coeffs(), b in coeffs()) {
        let beta = cat.parameter();
        let (x, y) = (point(&beta, a), point(&beta, b));
        prop_assert_eq!(x.add(&y).sub(&y), x.clone());
        prop_assert_eq!(beta.mul(&x, &y), beta.mul(&y, &x));
        if !y.is_zero() {
            let r = beta.div(&x, &y).unwrap();
            prop_assert_eq!(beta.mul(&r, &y), x);
        }
    }

    #[test]
    fn sign_matches_float_value(cat in irrational(), a in coeffs()) {
        let beta = cat.parameter();
        let v = approx(&beta, a);
        prop_assume!(v.abs() > 1e-9);
        let s = beta.sign(&point(&beta, a)).unwrap();
        prop_assert_eq!(s, if v > 0.0 { Ordering::Greater } else { Ordering::Less });
        prop_assert!((beta.to_interval(&point(&beta, a)).mid() - v).abs() <= 1e-12 * (1.0 + v.abs()));
    }

    #[test]
    fn compare_is_antisymmetric(cat in irrational(), a in coeffs(), b in coeffs()) {
        let beta = cat.parameter();
        let (x, y) = (point(&beta, a), point(&beta, b));
        prop_assert_eq!(beta.compare(&x, &y).unwrap(), beta.compare(&y, &x).unwrap().reverse());
    }

    #[test]
    fn tent_matches_float_map(cat in irrational(), num in 1i64..(1 << 20), r in (-30i64..30, 1i64..64)) {
        let beta = cat.parameter();
        let x = unit_point(&beta, num, r);
        let xf = beta.to_f64(&x);
        prop_assume!((0.0..=1.0).contains(&xf));
        let b = beta.approx();
        let expect = if xf <= 0.5 { b * xf } else { b * (1.0 - xf) };
        let fx = beta.to_f64(&tent_apply(&beta, &x).unwrap());
        prop_assert!((fx - expect).abs() < 1e-12);
    }

    #[test]
    fn preimages_map_back(cat in irrational(), num in 1i64..(1 << 20), r in (-30i64..30, 1i64..64)) {
        let beta = cat.parameter();
        let z = unit_point(&beta, num, r);
        prop_assume!((0.0..=1.0).contains(&beta.to_f64(&z)));
        for x in preimages_one_step(&beta, &z).unwrap() {
            prop_assert_eq!(tent_apply(&beta, &x).unwrap(), z.clone());
        }
    }

    #[test]
    fn itinerary_order_follows_real_order(
        cat in irrational(),
        a in 1i64..(1 << 20),
        b in 1i64..(1 << 20),
        r in (-30i64..30, 1i64..64),
    ) {
        let beta = cat.parameter();
        let (x, y) = (unit_point(&beta, a, r), unit_point(&beta, b, r));
        prop_assume!([&x, &y].iter().all(|p| (0.0..=1.0).contains(&beta.to_f64(p))));
        let (ix, iy) = (itinerary(&beta, &x, 24).unwrap(), itinerary(&beta, &y, 24).unwrap());
        let sym = parity_lex_compare(&ix, &iy).unwrap();
        // Distinct itineraries must order the points the same way.
        if sym != Ordering::Equal {
            prop_assert_eq!(sym, beta.compare(&x, &y).unwrap());
        }
    }

    #[test]
    fn interval_ops_enclose_point_results(
        a in -1e3f64..1e3, b in -1e3f64..1e3, ra in 0.0f64..1.0, rb in 0.0f64..1.0,
        ta in 0.0f64..=1.0, tb in 0.0f64..=1.0,
    ) {
        let (x, y) = (Interval::ball(a, ra), Interval::ball(b, rb));
        let (p, r) = (x.lo + ta * (x.hi - x.lo), y.lo + tb * (y.hi - y.lo));
        prop_assert!((x + y).contains(p + r));
        prop_assert!((x - y).contains(p - r));
        prop_assert!((x * y).contains(p * r));
        if !y.contains(0.0) {
            prop_assert!(x.div(&y).contains(p / r));
        }
    }
}

#[test]
fn rational_enclosure_is_tight() {
    let third = q(1, 3);
    let e = Interval::from_rational(&third);
    assert!(e.contains(1.0 / 3.0));
    assert!(e.width() <= 2.0 * f64::EPSILON);
    assert_eq!(Interval::from_rational(&q(3, 8)), Interval::point(0.375));
}

#[test]
fn golden_power_identity() {
    let beta = Catalog::Golden.parameter();
    // β^n = F(n) β + F(n−1).
    let (mut a, mut b) = (1i64, 0i64);
    for n in 1..60 {
        let expect = beta.from_rational(q(b, 1)).add(&beta.beta().scale(&q(a, 1)));
        assert_eq!(beta.pow_beta(n), expect, "n = {n}");
        (a, b) = (a + b, a);
    }
    let inv = beta.pow_beta(-40);
    assert_eq!(beta.mul(&inv, &beta.pow_beta(40)), beta.one());
    assert!((beta.to_f64(&inv) - beta.approx().powi(-40)).abs() < 1e-20);
    assert!(beta.to_interval(&inv).lo > 0.0);
}
