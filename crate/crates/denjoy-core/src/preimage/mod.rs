//! First-hitting-time preimages of the periodic critical value `c_t`: the
//! explicit tree, exact counts by threshold recursion, the length schedule,
//! and the left-mass function that positions inserted intervals.

mod mass;

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::enclosure::Interval;
use crate::tent_core::{
    in_unit, tent_step, AlgebraicParameter, AlgebraicPoint, CriticalOrbitData, FieldError, ItineraryWord,
    Symbol, TentError,
};

pub use mass::{left_mass, total_length, MassModel, MassStats, DEFAULT_KERNEL_LEN};

/// Default ceiling on explicit tree depth.
pub const DEFAULT_TREE_CAP: usize = 18;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PreimageError {
    #[error(transparent)]
    Tent(#[from] TentError),
    #[error("tree depth {depth} exceeds cap {cap}")]
    CapExceeded { depth: usize, cap: usize },
    #[error("no certified growth constant is available for the tail bound")]
    TailBoundUnavailable,
    #[error("truncation depth {0} is too large for the requested tolerance")]
    DepthTooLarge(u64),
}

impl From<FieldError> for PreimageError {
    fn from(e: FieldError) -> Self {
        PreimageError::Tent(TentError::Field(e))
    }
}

/// Weight `2/(n(n+1))` of level n before the `β^-n` factor.
pub fn schedule_weight(n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        let n = n as f64;
        2.0 / (n * (n + 1.0))
    }
}

/// Insertion lengths `a(n) = β^-n · 2/(n(n+1))`; orbit points get length 1.
#[derive(Clone, Debug)]
pub struct LengthSchedule {
    beta: AlgebraicParameter,
}

impl LengthSchedule {
    pub fn new(beta: &AlgebraicParameter) -> Self {
        LengthSchedule { beta: beta.clone() }
    }

    /// Exact `a(n)` in ℚ(β), `n ≥ 1`.
    pub fn exact(&self, n: usize) -> AlgebraicPoint {
        assert!(n >= 1, "schedule starts at level 1");
        let w = BigRational::new(BigInt::from(2), BigInt::from(n) * BigInt::from(n + 1));
        self.beta.pow_beta(-(n as i64)).scale(&w)
    }

    pub fn enclosure(&self, n: usize) -> Interval {
        level_length(self.beta.beta_interval(), n)
    }

    /// `λ_n = a(n)/a(n-1)`: `1/β` for n = 1, `(n-1)/(β(n+1))` after.
    pub fn lambda(&self, n: usize) -> AlgebraicPoint {
        let inv = self.beta.beta_inv().clone();
        if n <= 1 {
            inv
        } else {
            inv.scale(&BigRational::new(BigInt::from(n - 1), BigInt::from(n + 1)))
        }
    }
}

/// Enclosure of `a(n)` from an enclosure of β.
pub fn level_length(beta: Interval, n: usize) -> Interval {
    let w = Interval::point(2.0).div(&Interval::point(n as f64).scale(n as f64 + 1.0));
    w * beta.recip().powi(n as u32)
}

/// Preimage thresholds: the critical orbit plus 0 and 1, closed under f.
#[derive(Clone, Debug)]
pub(crate) struct Thresholds {
    pub points: Vec<AlgebraicPoint>,
    pub next: Vec<usize>,
    pub above: Vec<bool>,
    pub enc: Vec<Interval>,
    /// `order[i][j]` compares point i with point j.
    pub order: Vec<Vec<Ordering>>,
    pub c1: usize,
    pub one: usize,
}

impl Thresholds {
    pub fn new(beta: &AlgebraicParameter, orbit: &CriticalOrbitData) -> Result<Self, FieldError> {
        let mut points = orbit.points.clone();
        let mut next: Vec<usize> = (0..points.len()).map(|i| orbit.next_index(i)).collect();
        let zero = match orbit.index_of(&beta.zero()) {
            Some(i) => i,
            None => {
                points.push(beta.zero());
                next.push(points.len() - 1);
                points.len() - 1
            }
        };
        let one = match orbit.index_of(&beta.one()) {
            Some(i) => i,
            None => {
                points.push(beta.one());
                next.push(zero);
                points.len() - 1
            }
        };
        let half = beta.half();
        let above = points
            .iter()
            .map(|p| beta.compare(p, &half).map(|o| o == Ordering::Greater))
            .collect::<Result<Vec<_>, _>>()?;
        let enc = points.iter().map(|p| beta.to_interval(p)).collect();
        let mut order = vec![vec![Ordering::Equal; points.len()]; points.len()];
        for i in 0..points.len() {
            for j in 0..i {
                let o = beta.compare(&points[i], &points[j])?;
                order[i][j] = o;
                order[j][i] = o.reverse();
            }
        }
        Ok(Thresholds { points, next, above, enc, order, c1: orbit.next_index(0), one })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn position(&self, x: &AlgebraicPoint) -> Option<usize> {
        self.points.iter().position(|p| p == x)
    }
}

/// Exact forward walk of a point, switching to threshold indices once the
/// orbit lands on one.
#[derive(Clone, Debug, Default)]
pub(crate) struct ExactWalk {
    /// `r[j] = [y_j > c]`, j < steps.
    pub r: Vec<bool>,
    /// `lt[j] = [θ < y_j]`, j ≤ steps.
    pub lt: Vec<bool>,
    /// `hit[j] = [y_j = θ]`, j ≤ steps.
    pub hit: Vec<bool>,
}

pub(crate) fn exact_walk(
    beta: &AlgebraicParameter,
    th: &Thresholds,
    target: usize,
    y: &AlgebraicPoint,
    steps: usize,
) -> Result<ExactWalk, FieldError> {
    let mut w = ExactWalk::default();
    let mut idx = th.position(y);
    let mut x = y.clone();
    let tau = &th.points[target];
    for j in 0..=steps {
        if let Some(i) = idx {
            w.lt.push(th.order[target][i] == Ordering::Less);
            w.hit.push(i == target);
            if j < steps {
                w.r.push(th.above[i]);
                idx = Some(th.next[i]);
            }
            continue;
        }
        w.lt.push(beta.compare(tau, &x)? == Ordering::Less);
        w.hit.push(false);
        if j < steps {
            let (nx, side) = tent_step(beta, &x)?;
            w.r.push(side == Ordering::Greater);
            idx = th.position(&nx);
            x = nx;
        }
    }
    Ok(w)
}

/// The subset of `{z/β, 1 − z/β}` lying in the correct branch domain.
pub fn preimages_one_step(beta: &AlgebraicParameter, z: &AlgebraicPoint) -> Result<Vec<AlgebraicPoint>, TentError> {
    in_unit(beta, z)?;
    let half = beta.half();
    let left = beta.div_beta(z);
    let mut out = Vec::with_capacity(2);
    if beta.compare(&left, &half)? != Ordering::Greater {
        out.push(left.clone());
    }
    let right = left.one_minus();
    if beta.compare(&right, &half)? != Ordering::Less && right != left {
        out.push(right);
    }
    Ok(out)
}

/// A point of `C_{β,n}` with its label `s_n … s_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreimageNode {
    pub point: AlgebraicPoint,
    pub level: usize,
    /// Itinerary of the point of length `level + 1`; the last symbol belongs
    /// to `c_t`.
    pub word: ItineraryWord,
    pub on_orbit: bool,
}

/// Enumerates `C_{β,0}, …, C_{β,depth}`, each level sorted increasingly.
pub fn enumerate_tree(
    beta: &AlgebraicParameter,
    orbit: &CriticalOrbitData,
    depth: usize,
) -> Result<Vec<Vec<PreimageNode>>, PreimageError> {
    enumerate_tree_capped(beta, orbit, depth, DEFAULT_TREE_CAP)
}

pub fn enumerate_tree_capped(
    beta: &AlgebraicParameter,
    orbit: &CriticalOrbitData,
    depth: usize,
    cap: usize,
) -> Result<Vec<Vec<PreimageNode>>, PreimageError> {
    if depth > cap {
        return Err(PreimageError::CapExceeded { depth, cap });
    }
    let tau = orbit.target().clone();
    let root_sym = Symbol::from_ordering(beta.compare(&tau, &beta.half())?);
    let root = PreimageNode {
        point: tau.clone(),
        level: 0,
        word: ItineraryWord::new(vec![root_sym]),
        on_orbit: true,
    };
    let mut levels = vec![vec![root]];
    let half = beta.half();
    for n in 1..=depth {
        let mut next = Vec::new();
        for node in &levels[n - 1] {
            for x in preimages_one_step(beta, &node.point)? {
                if x == tau {
                    continue;
                }
                let sym = Symbol::from_ordering(beta.compare(&x, &half)?);
                let mut symbols = Vec::with_capacity(n + 1);
                symbols.push(sym);
                symbols.extend_from_slice(&node.word.symbols);
                let on_orbit = orbit.index_of(&x).is_some();
                next.push(PreimageNode { point: x, level: n, word: ItineraryWord::new(symbols), on_orbit });
            }
        }
        sort_points(beta, &mut next, |n| &n.point)?;
        levels.push(next);
    }
    Ok(levels)
}

/// Sorts by value, using float enclosures first and exact comparison on ties.
pub(crate) fn sort_points<T>(
    beta: &AlgebraicParameter,
    items: &mut Vec<T>,
    key: impl Fn(&T) -> &AlgebraicPoint,
) -> Result<(), FieldError> {
    let mut keyed: Vec<(Interval, usize)> =
        items.iter().enumerate().map(|(i, it)| (beta.to_interval(key(it)), i)).collect();
    let mut err = None;
    keyed.sort_by(|a, b| {
        if a.0.hi < b.0.lo {
            Ordering::Less
        } else if b.0.hi < a.0.lo {
            Ordering::Greater
        } else {
            match beta.compare(key(&items[a.1]), key(&items[b.1])) {
                Ok(o) => o,
                Err(e) => {
                    err = Some(e);
                    Ordering::Equal
                }
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut slots: Vec<Option<T>> = items.drain(..).map(Some).collect();
    items.extend(keyed.into_iter().map(|(_, i)| slots[i].take().expect("permutation")));
    Ok(())
}

/// Number of tree nodes at `level` strictly below `y`.
pub fn tree_count_below(
    beta: &AlgebraicParameter,
    levels: &[Vec<PreimageNode>],
    level: usize,
    y: &AlgebraicPoint,
) -> Result<usize, FieldError> {
    let mut count = 0;
    for node in &levels[level] {
        if beta.compare(&node.point, y)? == Ordering::Less {
            count += 1;
        }
    }
    Ok(count)
}

/// Exact counts `T_k(θ) = #{x < θ : f^k(x) = target}` on the threshold set,
/// extended on demand.
#[derive(Clone, Debug)]
pub struct CountTable {
    beta: AlgebraicParameter,
    th: Thresholds,
    target: usize,
    /// Period of the target when it lies on the cycle.
    period: Option<usize>,
    t: Vec<Vec<BigInt>>,
    e: Vec<Vec<bool>>,
}

impl CountTable {
    /// Counts preimages of `c_t`.
    pub fn new(beta: &AlgebraicParameter, orbit: &CriticalOrbitData) -> Result<Self, FieldError> {
        Self::for_orbit_point(beta, orbit, orbit.preperiod)
    }

    /// Counts preimages of the orbit point `c_i`.
    pub fn for_orbit_point(
        beta: &AlgebraicParameter,
        orbit: &CriticalOrbitData,
        i: usize,
    ) -> Result<Self, FieldError> {
        let th = Thresholds::new(beta, orbit)?;
        let period = (i >= orbit.preperiod).then_some(orbit.period);
        let t0 = (0..th.len())
            .map(|j| if th.order[i][j] == Ordering::Less { BigInt::one() } else { BigInt::zero() })
            .collect();
        let e0 = (0..th.len()).map(|j| j == i).collect();
        Ok(CountTable { beta: beta.clone(), th, target: i, period, t: vec![t0], e: vec![e0] })
    }

    pub fn depth(&self) -> usize {
        self.t.len() - 1
    }

    pub fn extend_to(&mut self, n: usize) {
        while self.t.len() <= n {
            let k = self.t.len();
            let (tp, ep) = (&self.t[k - 1], &self.e[k - 1]);
            let c1 = self.th.c1;
            let g = BigInt::from(2) * &tp[c1] + BigInt::from(ep[c1] as u8);
            let mut tn = Vec::with_capacity(self.th.len());
            let mut en = Vec::with_capacity(self.th.len());
            for i in 0..self.th.len() {
                let f = self.th.next[i];
                en.push(ep[f]);
                if self.th.above[i] {
                    tn.push(&g - &tp[f] - BigInt::from(ep[f] as u8));
                } else {
                    tn.push(tp[f].clone());
                }
            }
            self.t.push(tn);
            self.e.push(en);
        }
    }

    /// `G_k = 2 T_k(c_1) + [f^k(c_1) = target]`: preimages in `[0, c]`, doubled
    /// over both branches, with c counted once.
    pub fn g(&mut self, k: usize) -> BigInt {
        self.extend_to(k);
        BigInt::from(2) * &self.t[k][self.th.c1] + BigInt::from(self.e[k][self.th.c1] as u8)
    }

    /// All points of [0, 1] mapped onto the target by `f^k`.
    pub fn all_preimages(&mut self, k: usize) -> BigUint {
        self.extend_to(k);
        let one = self.th.one;
        to_uint(&self.t[k][one] + BigInt::from(self.e[k][one] as u8))
    }

    /// `F(n)`: points whose first hit of the target is at time n.
    pub fn level_count(&mut self, n: usize) -> BigUint {
        let u = self.all_preimages(n);
        match self.period {
            Some(m) if n >= m => u - self.all_preimages(n - m),
            _ => u,
        }
    }

    /// `(T_n(y), N_n(y))`: all and first-hit preimages strictly below `y`.
    pub fn count_below(&mut self, y: &AlgebraicPoint, n: usize) -> Result<(BigUint, BigUint), TentError> {
        in_unit(&self.beta, y)?;
        let walk = exact_walk(&self.beta, &self.th, self.target, y, n)?;
        let tn = self.t_from_walk(&walk, n);
        let first = match self.period {
            Some(m) if n >= m => &tn - self.t_from_walk(&walk, n - m),
            _ => tn.clone(),
        };
        Ok((to_uint(tn), to_uint(first)))
    }

    /// As [`count_below`](Self::count_below) but including `y` itself.
    pub fn count_below_inclusive(
        &mut self,
        y: &AlgebraicPoint,
        n: usize,
    ) -> Result<(BigUint, BigUint), TentError> {
        let (t, f) = self.count_below(y, n)?;
        let walk = exact_walk(&self.beta, &self.th, self.target, y, n)?;
        let hits_n = walk.hit[n];
        let first_hit_n = hits_n && (0..n).all(|s| !walk.hit[s]);
        Ok((t + BigUint::from(hits_n as u8), f + BigUint::from(first_hit_n as u8)))
    }

    /// `T_n(y) = Σ_{j<n} s_j r_j G_{n-1-j} − [y_n = θ](1 − s_n)/2 + s_n [θ < y_n]`
    /// with `s_0 = 1`, `s_{j+1} = s_j (1 − 2 r_j)`.
    fn t_from_walk(&mut self, w: &ExactWalk, n: usize) -> BigInt {
        self.extend_to(n);
        let mut acc = BigInt::zero();
        let mut s = 1i8;
        for j in 0..n {
            if w.r[j] {
                let g = self.g(n - 1 - j);
                if s > 0 {
                    acc += g;
                } else {
                    acc -= g;
                }
                s = -s;
            }
        }
        if w.hit[n] && s < 0 {
            acc -= 1;
        }
        if w.lt[n] {
            if s > 0 {
                acc += 1;
            } else {
                acc -= 1;
            }
        }
        acc
    }
}

fn to_uint(x: BigInt) -> BigUint {
    match x.sign() {
        Sign::Minus => panic!("negative preimage count {x}"),
        _ => x.magnitude().clone(),
    }
}

/// `(T_n(y), N_n(y))` for a one-off query.
pub fn count_below(
    beta: &AlgebraicParameter,
    orbit: &CriticalOrbitData,
    y: &AlgebraicPoint,
    n: usize,
) -> Result<(BigUint, BigUint), TentError> {
    CountTable::new(beta, orbit)?.count_below(y, n)
}

/// `F(n) = #C_{β,n}`.
pub fn level_count(beta: &AlgebraicParameter, orbit: &CriticalOrbitData, n: usize) -> Result<BigUint, FieldError> {
    Ok(CountTable::new(beta, orbit)?.level_count(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tent_core::{critical_orbit, Catalog, DEFAULT_MAX_ITER};

    fn setup(c: Catalog) -> (AlgebraicParameter, CriticalOrbitData) {
        let b = c.parameter();
        let o = critical_orbit(&b, DEFAULT_MAX_ITER).unwrap().finite().unwrap();
        (b, o)
    }

    #[test]
    fn one_step_cases() {
        let (b, _) = setup(Catalog::Full);
        assert_eq!(preimages_one_step(&b, &b.zero()).unwrap(), vec![b.zero(), b.one()]);
        let (g, o) = setup(Catalog::Golden);
        assert_eq!(preimages_one_step(&g, &o.points[1]).unwrap(), vec![g.half()]);
        assert!(preimages_one_step(&g, &g.one()).unwrap().is_empty());
        assert!(preimages_one_step(&g, &g.rational(3, 2)).is_err());
    }

    #[test]
    fn full_tree_levels() {
        let (b, o) = setup(Catalog::Full);
        let t = enumerate_tree(&b, &o, 3).unwrap();
        let counts: Vec<usize> = t.iter().map(|l| l.len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 2]);
        assert_eq!(t[3][0].point, b.rational(1, 4));
        assert_eq!(t[3][1].point, b.rational(3, 4));
        assert!(enumerate_tree(&b, &o, 19).is_err());
    }

    #[test]
    fn sorting_permutation_is_correct() {
        let (b, _) = setup(Catalog::Golden);
        let mut pts: Vec<AlgebraicPoint> =
            [5, 1, 4, 2, 3, 0].iter().map(|&k| b.rational(k, 7)).collect();
        sort_points(&b, &mut pts, |p| p).unwrap();
        let want: Vec<AlgebraicPoint> = (0..6).map(|k| b.rational(k, 7)).collect();
        assert_eq!(pts, want);
    }

    #[test]
    fn recursion_matches_hand_counts() {
        let (b, o) = setup(Catalog::Full);
        let mut ct = CountTable::new(&b, &o).unwrap();
        let (t, n) = ct.count_below(&b.half(), 3).unwrap();
        assert_eq!((t, n), (BigUint::from(2u8), BigUint::from(1u8)));
        let (_, n) = ct.count_below(&b.one(), 3).unwrap();
        assert_eq!(n, BigUint::from(2u8));
        assert_eq!(ct.level_count(7), BigUint::from(32u8));
        let (g, og) = setup(Catalog::Golden);
        let mut cg = CountTable::new(&g, &og).unwrap();
        let f: Vec<BigUint> = (1..=5).map(|n| cg.level_count(n)).collect();
        assert_eq!(f, [2u8, 4, 6, 10, 16].map(BigUint::from).to_vec());
    }

    #[test]
    fn schedule_ratio() {
        let (b, _) = setup(Catalog::Golden);
        let s = LengthSchedule::new(&b);
        for n in 2..10 {
            let r = b.div(&s.exact(n - 1), &s.exact(n)).unwrap();
            let want = b.beta().scale(&BigRational::new(BigInt::from(n + 1), BigInt::from(n - 1)));
            assert_eq!(r, want);
            assert_eq!(b.mul(&s.lambda(n), &r), b.one());
        }
        assert_eq!(b.mul(&s.exact(1), &b.beta()), b.one());
    }
}
