use std::path::Path;

use denjoy::config::{parse_poly, parse_rational, Overrides, RunConfig};
use denjoy::json::{reports_to_string, ReportJson};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

proptest! {
    #[test]
    fn decimals_parse_exactly(int in -10_000i64..10_000, frac in 0u32..1_000_000, digits in 1usize..7) {
        let frac = frac % 10u32.pow(digits as u32);
        let text = format!("{}{}.{:0width$}", if int < 0 { "-" } else { "" }, int.abs(), frac, width = digits);
        let q = parse_rational(&text).unwrap();
        let scale = BigInt::from(10).pow(digits as u32);
        let sign = if int < 0 { -1 } else { 1 };
        let expect = BigRational::new(BigInt::from(sign) * (BigInt::from(int.abs()) * &scale + frac), scale);
        prop_assert_eq!(q, expect);
    }

    #[test]
    fn fractions_parse_exactly(n in -1000i64..1000, d in 1i64..1000) {
        prop_assert_eq!(parse_rational(&format!("{n}/{d}")).unwrap(), BigRational::new(n.into(), d.into()));
    }

    #[test]
    fn poly_round_trips(coeffs in prop::collection::vec(-50i64..50, 2..6)) {
        let text = coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        prop_assert_eq!(parse_poly(&text).unwrap(), coeffs);
    }

    #[test]
    fn config_file_matches_flags(depth in 1usize..16, seed in any::<u64>(), eps_exp in 2i32..9) {
        let eps = 10f64.powi(-eps_exp);
        let text = format!("beta = golden\ndepth = {depth}\nseed = {seed}\neps = {eps:e}\n");
        let file = Overrides::parse(&text, Path::new("test.cfg")).unwrap();
        let flags = Overrides { beta: Some("golden".into()), depth: Some(depth), seed: Some(seed), eps: Some(eps), ..Default::default() };
        prop_assert_eq!(
            RunConfig::resolve(file, None).unwrap(),
            RunConfig::resolve(flags, None).unwrap()
        );
    }

    #[test]
    fn reports_survive_json(measured in any::<f64>(), bound in -1e300f64..1e300, name in "[a-z_]{1,20}") {
        let r = ReportJson {
            suite: "lengths".into(),
            check_name: name,
            status: "PASS".into(),
            measured: if measured.is_finite() { measured } else { 0.0 },
            bound,
            tolerance: 1e-6,
            detail: "x < 1 \"quoted\"".into(),
        };
        let text = reports_to_string(std::slice::from_ref(&r));
        let back: Vec<ReportJson> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, vec![r]);
    }
}
