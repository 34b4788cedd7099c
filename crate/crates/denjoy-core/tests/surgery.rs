use std::sync::OnceLock;

use denjoy_core::surgery::{layout, local_value, BranchKind, SurgeredMapDescriptor};
use denjoy_core::tent_core::{critical_orbit, tent_apply, Catalog, DEFAULT_MAX_ITER};
use proptest::prelude::*;

const EPS: f64 = 1e-5;

fn descriptor(c: Catalog) -> &'static SurgeredMapDescriptor {
    static ALL: OnceLock<Vec<(Catalog, SurgeredMapDescriptor)>> = OnceLock::new();
    let all = ALL.get_or_init(|| {
        std::thread::scope(|s| {
            let hs: Vec<_> = Catalog::ALL
                .iter()
                .map(|&c| {
                    s.spawn(move || {
                        let b = c.parameter();
                        let o = critical_orbit(&b, DEFAULT_MAX_ITER).unwrap().finite().unwrap();
                        (c, layout(&b, &o, 9, EPS).unwrap())
                    })
                })
                .collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        })
    });
    &all.iter().find(|(k, _)| *k == c).unwrap().1
}

fn catalog() -> impl Strategy<Value = Catalog> {
    prop_oneof![Just(Catalog::Full), Just(Catalog::Golden), Just(Catalog::Sqrt2)]
}

fn irrational() -> impl Strategy<Value = Catalog> {
    prop_oneof![Just(Catalog::Golden), Just(Catalog::Sqrt2)]
}

#[test]
fn records_are_ordered_and_disjoint() {
    for c in Catalog::ALL {
        let d = descriptor(c);
        let b = d.beta();
        let mut recs: Vec<_> = d.records().iter().collect();
        recs.sort_by(|x, y| b.compare(&x.host.point, &y.host.point).unwrap());
        for w in recs.windows(2) {
            assert!(w[0].iota_plus().hi <= w[1].iota_minus.lo + 2.0 * EPS, "{c}: overlapping records");
            assert!(w[0].iota_minus.mid() < w[1].iota_minus.mid());
        }
        for r in &recs {
            let len = r.iota_plus() - r.iota_minus;
            assert!(len.contains(r.length_enc.mid()) || (len.mid() - r.length_enc.mid()).abs() < 1e-12);
        }
        let total: f64 = recs.iter().map(|r| r.length_enc.lo).sum();
        assert!(total <= d.total_length().hi, "{c}");
    }
}

#[test]
fn record_targets_follow_the_tent_map() {
    for c in Catalog::ALL {
        let d = descriptor(c);
        for r in d.records() {
            let fx = tent_apply(d.beta(), &r.host.point).unwrap();
            assert_eq!(d.record(r.target).host.point, fx, "{c}");
        }
    }
}

#[test]
fn descriptor_parts_round_trip() {
    for c in Catalog::ALL {
        let d = descriptor(c);
        let back = SurgeredMapDescriptor::from_parts(&d.to_parts()).unwrap();
        assert_eq!(back.to_parts(), d.to_parts());
        for k in 0..50 {
            let x = k as f64 / 49.0;
            assert_eq!(back.eval_unit(x).unwrap(), d.eval_unit(x).unwrap());
        }
    }
}

#[test]
fn eval_inside_records_uses_branch() {
    for c in Catalog::ALL {
        let d = descriptor(c);
        let beta = d.beta().approx();
        for (i, r) in d.records().iter().enumerate().step_by(7) {
            let tgt = d.record(r.target);
            let l1 = r.length_enc.mid();
            for t in [0.13, 0.5, 0.77] {
                let xi = if matches!(r.branch, BranchKind::CritF1 | BranchKind::CritF2) { t } else { t * l1 };
                let y = r.iota_minus.mid() + xi;
                let expect = tgt.iota_minus.mid() + local_value(r.branch, beta, l1, tgt.length_enc.mid(), xi);
                let v = d.eval(y).unwrap();
                let slack = 4.0 * EPS * d.lipschitz_bound();
                assert!(v.inflate(slack).contains(expect), "{c} record {i}: {v} vs {expect}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// g∘ι = ι∘f at points that are not preimages of c_t.
    #[test]
    fn embedding_conjugates(cat in irrational(), num in 1i64..999) {
        let d = descriptor(cat);
        let b = d.beta();
        let x = b.rational(num, 1000);
        let y = d.embed(&x, false).unwrap();
        let fx = tent_apply(b, &x).unwrap();
        let gy = d.eval(y.mid()).unwrap();
        let target = d.embed(&fx, false).unwrap();
        let slack = d.lipschitz_bound() * y.width() + 2.0 * EPS;
        prop_assert!(gy.inflate(slack).intersects(&target), "{} vs {}", gy, target);
    }

    #[test]
    fn collapse_inverts_embedding(cat in irrational(), num in 1i64..999) {
        let d = descriptor(cat);
        let b = d.beta();
        let x = b.rational(num, 1000);
        let p = d.collapse(d.embed(&x, false).unwrap().mid()).unwrap();
        prop_assert!(p.inflate(EPS).contains(num as f64 / 1000.0), "{}", p);
    }

    #[test]
    fn map_is_lipschitz(cat in catalog(), x in 0.0f64..=1.0, h in 1e-6f64..1e-2) {
        let d = descriptor(cat);
        let y = (x + h).min(1.0);
        let (a, b) = (d.eval_unit(x).unwrap(), d.eval_unit(y).unwrap());
        let spread = (b.hi - a.lo).abs().max((a.hi - b.lo).abs());
        prop_assert!(spread <= d.lipschitz_bound() * (y - x) + a.width() + b.width());
        prop_assert!(a.lo >= -1e-9 && a.hi <= 1.0 + 1e-9);
    }

    #[test]
    fn unit_coordinates_round_trip(cat in catalog(), x in 0.0f64..=1.0) {
        let d = descriptor(cat);
        // x b / b is within one rounding of x, not always equal to it.
        let back = d.to_unit(d.from_unit(x));
        prop_assert!((back - x).abs() <= f64::EPSILON * x, "{} vs {}", back, x);
    }
}
