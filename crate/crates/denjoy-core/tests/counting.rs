use std::sync::OnceLock;

use denjoy_core::markov::{build_matrix, build_partition, char_poly, growth_constant, min_poly_divides};
use denjoy_core::preimage::{enumerate_tree, CountTable, MassModel, DEFAULT_KERNEL_LEN};
use denjoy_core::tent_core::{critical_orbit, AlgebraicParameter, Catalog, CriticalOrbitData, DEFAULT_MAX_ITER};
use denjoy_core::Interval;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use proptest::prelude::*;

fn setup(c: Catalog) -> (AlgebraicParameter, CriticalOrbitData) {
    let b = c.parameter();
    let o = critical_orbit(&b, DEFAULT_MAX_ITER).unwrap().finite().unwrap();
    (b, o)
}

fn catalog() -> impl Strategy<Value = Catalog> {
    prop_oneof![Just(Catalog::Full), Just(Catalog::Golden), Just(Catalog::Sqrt2)]
}

fn table(c: Catalog) -> CountTable {
    static TABLES: OnceLock<Vec<(Catalog, CountTable)>> = OnceLock::new();
    let all = TABLES.get_or_init(|| {
        Catalog::ALL
            .iter()
            .map(|&c| {
                let (b, o) = setup(c);
                (c, CountTable::new(&b, &o).unwrap())
            })
            .collect()
    });
    all.iter().find(|(k, _)| *k == c).unwrap().1.clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_are_monotone_in_threshold(cat in catalog(), a in 0i64..=1000, b in 0i64..=1000, n in 0usize..40) {
        let (beta, _) = setup(cat);
        let mut t = table(cat);
        let (lo, hi) = (a.min(b), a.max(b));
        let (ta, fa) = t.count_below(&beta.rational(lo, 1000), n).unwrap();
        let (tb, fb) = t.count_below(&beta.rational(hi, 1000), n).unwrap();
        prop_assert!(ta <= tb);
        prop_assert!(fa <= fb);
        prop_assert!(fa <= ta);
    }

    #[test]
    fn counts_split_at_threshold(cat in catalog(), a in 1i64..1000, n in 1usize..30) {
        // Points below y plus points at or above y make up all preimages.
        let (beta, _) = setup(cat);
        let mut t = table(cat);
        let y = beta.rational(a, 1000);
        let (below, _) = t.count_below(&y, n).unwrap();
        let (at_or_below, _) = t.count_below_inclusive(&y, n).unwrap();
        prop_assert!(at_or_below >= below);
        prop_assert!(&at_or_below - &below <= BigUint::from(1u8));
        prop_assert!(at_or_below <= t.all_preimages(n));
    }
}

#[test]
fn level_counts_match_tree() {
    for c in Catalog::ALL {
        let (b, o) = setup(c);
        let tree = enumerate_tree(&b, &o, 12).unwrap();
        let mut t = CountTable::new(&b, &o).unwrap();
        for (n, level) in tree.iter().enumerate().skip(1) {
            assert_eq!(t.level_count(n), BigUint::from(level.len()), "{c} n = {n}");
        }
    }
}

#[test]
fn sqrt2_counts() {
    let (b, o) = setup(Catalog::Sqrt2);
    let mut t = CountTable::new(&b, &o).unwrap();
    let f: Vec<u64> = (1..=10).map(|n| t.level_count(n).try_into().unwrap()).collect();
    // Brute force: every level-n preimage is a level-(n−1) preimage's
    // preimage, other than c_t itself.
    let tree = enumerate_tree(&b, &o, 10).unwrap();
    let brute: Vec<u64> = tree[1..].iter().map(|l| l.len() as u64).collect();
    assert_eq!(f, brute);
    assert!(f.iter().all(|&x| x > 0));
}

/// The f64 stream of normalized counts against exact integer counts.
#[test]
fn mass_stream_tracks_exact_counts() {
    for (c, upto) in [(Catalog::Full, 2048), (Catalog::Golden, 2048), (Catalog::Sqrt2, 2048)] {
        let (b, o) = setup(c);
        let m = certified_growth(&b, &o);
        let model = MassModel::new(&b, &o, Some(m), 1e-3, DEFAULT_KERNEL_LEN).unwrap();
        let stream = model.normalized_stream(upto);
        let mut t = CountTable::new(&b, &o).unwrap();
        let bi = b.beta_interval();
        let (lo, hi) = (BigRational::from_float(bi.lo).unwrap(), BigRational::from_float(bi.hi).unwrap());
        for k in [1, 2, 10, 100, 1000, 1999, 2000, 2048] {
            let (plo, phi) = (lo.pow(k as i32), hi.pow(k as i32));
            // count / β^k between count / hi^k and count / lo^k.
            let normalized = |count: BigInt| {
                let q = BigRational::from_integer(count);
                Interval::from_rational(&(&q / &phi)).hull(&Interval::from_rational(&(&q / &plo)))
            };
            let exact_g = normalized(t.g(k));
            let exact_u = normalized(BigInt::from(t.all_preimages(k)));
            let err = model.stream_error_bound(k);
            let (g, u) = stream[k];
            assert!((g - exact_g.mid()).abs() <= err + exact_g.rad(), "{c} G k={k}: {g} vs {exact_g}");
            assert!((u - exact_u.mid()).abs() <= err + exact_u.rad(), "{c} U k={k}: {u} vs {exact_u}");
        }
    }
}

fn certified_growth(b: &AlgebraicParameter, o: &CriticalOrbitData) -> f64 {
    let p = build_partition(b, o).unwrap();
    let mat = build_matrix(&p).unwrap();
    growth_constant(b, &p, &mat, 64).unwrap().m
}

#[test]
fn growth_constant_bounds_counts() {
    for c in Catalog::ALL {
        let (b, o) = setup(c);
        let m = certified_growth(&b, &o);
        let mut t = CountTable::new(&b, &o).unwrap();
        for n in 1..=200usize {
            let f = BigRational::from_integer(BigInt::from(t.level_count(n)));
            let ratio = b.to_interval(&b.pow_beta(-(n as i64)).scale(&f));
            assert!(ratio.hi <= m, "{c} n = {n}: {ratio} > {m}");
        }
    }
}

#[test]
fn transition_matrix_spectrum() {
    for c in Catalog::ALL {
        let (b, o) = setup(c);
        let mat = build_matrix(&build_partition(&b, &o).unwrap()).unwrap();
        assert!(mat.spectral_radius.contains_beta(&b).unwrap(), "{c}");
        assert!(min_poly_divides(&b, &mat.entries), "{c}");
        // Independent oracle: the characteristic polynomial vanishes at β
        // (evaluated in floating point).
        let cp = char_poly(&mat.entries);
        let x = b.approx();
        let v = cp.iter().fold(0.0, |acc, k| acc * x + k.to_string().parse::<f64>().unwrap());
        assert!(v.abs() < 1e-9, "{c}: char poly at beta = {v}");
    }
}

#[test]
fn perron_limit() {
    for c in Catalog::ALL {
        let (b, o) = setup(c);
        let mat = build_matrix(&build_partition(&b, &o).unwrap()).unwrap();
        // √2 gives an imprimitive matrix; only the Cesàro mean converges.
        let cesaro = c == Catalog::Sqrt2;
        let r = mat.perron_residual(400, cesaro);
        assert!(r < 0.05, "{c}: residual {r}");
        if cesaro {
            assert!(mat.perron_residual(400, false) > 0.1, "plain powers should oscillate");
        }
    }
}
