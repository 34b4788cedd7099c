//! Exact arithmetic in ℚ(β), the tent map and its critical orbit.

mod field;
pub(crate) mod poly;
mod tent;

use core::fmt;
use core::str::FromStr;

pub use field::{AlgebraicParameter, AlgebraicPoint, FieldError, DEFAULT_BIT_BUDGET, EAGER_BITS};
pub use tent::{
    compare, core_interval, critical_orbit, itinerary, parity_lex_compare, renorm_depth,
    restrictive_interval, symbol_of, tent_apply, tent_step, CriticalOrbitData, ItineraryWord,
    OrbitResult, Symbol, TentError, DEFAULT_MAX_ITER,
};
pub(crate) use tent::in_unit;

/// Built-in slopes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Catalog {
    /// β = 2.
    Full,
    /// β = (1 + √5)/2.
    Golden,
    /// β = √2.
    Sqrt2,
}

impl Catalog {
    pub const ALL: [Catalog; 3] = [Catalog::Full, Catalog::Golden, Catalog::Sqrt2];

    pub fn name(self) -> &'static str {
        match self {
            Catalog::Full => "full",
            Catalog::Golden => "golden",
            Catalog::Sqrt2 => "sqrt2",
        }
    }

    /// Minimal polynomial (leading coefficient first) and isolating interval.
    pub fn spec(self) -> (&'static [i64], (i64, i64), (i64, i64)) {
        match self {
            Catalog::Full => (&[1, -2], (3, 2), (5, 2)),
            Catalog::Golden => (&[1, -1, -1], (1, 1), (2, 1)),
            Catalog::Sqrt2 => (&[1, 0, -2], (1, 1), (2, 1)),
        }
    }

    pub fn parameter(self) -> AlgebraicParameter {
        let (p, lo, hi) = self.spec();
        AlgebraicParameter::from_ints(p, lo, hi).expect("catalog parameters are valid")
    }

    /// The catalog entry equal to `beta`, if any.
    pub fn identify(beta: &AlgebraicParameter) -> Option<Catalog> {
        Catalog::ALL.into_iter().find(|c| c.parameter().same_number(beta))
    }
}

impl fmt::Display for Catalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Catalog {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" | "2" | "two" => Ok(Catalog::Full),
            "golden" | "phi" => Ok(Catalog::Golden),
            "sqrt2" | "root2" => Ok(Catalog::Sqrt2),
            other => Err(alloc::format!("unknown catalog parameter {other:?} (expected full, golden or sqrt2)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::cmp::Ordering;

    #[test]
    fn orbits_of_catalog() {
        let two = Catalog::Full.parameter();
        let o = critical_orbit(&two, DEFAULT_MAX_ITER).unwrap().finite().unwrap();
        assert_eq!((o.preperiod, o.period), (2, 1));
        assert_eq!(o.points[1], two.one());
        assert_eq!(o.points[2], two.zero());

        let g = Catalog::Golden.parameter();
        let o = critical_orbit(&g, DEFAULT_MAX_ITER).unwrap().finite().unwrap();
        assert_eq!((o.preperiod, o.period), (0, 3));

        let r = Catalog::Sqrt2.parameter();
        let o = critical_orbit(&r, DEFAULT_MAX_ITER).unwrap().finite().unwrap();
        assert_eq!((o.preperiod, o.period), (3, 1));
        // Fixed point 2 - √2.
        assert_eq!(o.points[3], r.rational(2, 1).sub(&r.beta()));
    }

    #[test]
    fn itinerary_of_golden_c() {
        let g = Catalog::Golden.parameter();
        let w = itinerary(&g, &g.half(), 6).unwrap();
        assert_eq!(w.to_string(), "*10*10");
        let c1 = tent_apply(&g, &g.half()).unwrap();
        assert_eq!(itinerary(&g, &c1, 3).unwrap().to_string(), "10*");
    }

    #[test]
    fn parity_examples() {
        let w = |s: &str| s.parse::<ItineraryWord>().unwrap();
        assert_eq!(parity_lex_compare(&w("00"), &w("01")).unwrap(), Ordering::Less);
        assert_eq!(parity_lex_compare(&w("10"), &w("11")).unwrap(), Ordering::Greater);
        assert!(parity_lex_compare(&w("0"), &w("01")).is_err());
    }

    #[test]
    fn renormalization() {
        assert_eq!(renorm_depth(&Catalog::Full.parameter()).unwrap(), 0);
        assert_eq!(renorm_depth(&Catalog::Golden.parameter()).unwrap(), 0);
        let r = Catalog::Sqrt2.parameter();
        assert_eq!(renorm_depth(&r).unwrap(), 1);
        let (lo, hi) = restrictive_interval(&r, 1).unwrap();
        // [√2 - 1, 2 - √2] = [c_2, c_3].
        assert_eq!(lo, r.beta().sub(&r.one()));
        assert_eq!(hi, r.rational(2, 1).sub(&r.beta()));
        assert!(matches!(
            restrictive_interval(&r, 2),
            Err(TentError::NotRenormalizable { requested: 2, depth: 1 })
        ));
        assert!(restrictive_interval(&Catalog::Full.parameter(), 1).is_err());
    }

    #[test]
    fn deeper_renormalization_nests() {
        // β = 2^(1/4): x^4 - 2, depth 2.
        let b = AlgebraicParameter::from_ints(&[1, 0, 0, 0, -2], (1, 1), (3, 2)).unwrap();
        assert_eq!(renorm_depth(&b).unwrap(), 2);
        let (lo1, hi1) = restrictive_interval(&b, 1).unwrap();
        let (lo2, hi2) = restrictive_interval(&b, 2).unwrap();
        assert_eq!(b.compare(&lo1, &lo2).unwrap(), Ordering::Less);
        assert_eq!(b.compare(&hi2, &hi1).unwrap(), Ordering::Less);
    }
}
