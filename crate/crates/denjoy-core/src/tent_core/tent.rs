//! The tent map, its critical orbit, itineraries and renormalization.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use super::field::{AlgebraicParameter, AlgebraicPoint, FieldError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TentError {
    #[error("point lies outside [0, 1]")]
    Domain,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("itinerary words have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("renormalization level {requested} exceeds depth {depth}")]
    NotRenormalizable { requested: u32, depth: u32 },
    #[error("restrictive interval failed its invariance certificate")]
    CertificateFailed,
}

/// Itinerary symbol: left of, at, or right of the turning point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Zero,
    Star,
    One,
}

impl Symbol {
    fn rank(self) -> u8 {
        match self {
            Symbol::Zero => 0,
            Symbol::Star => 1,
            Symbol::One => 2,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::Star => '*',
            Symbol::One => '1',
        }
    }

    /// Symbol of a point given its comparison with c = 1/2.
    pub fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => Symbol::Zero,
            Ordering::Equal => Symbol::Star,
            Ordering::Greater => Symbol::One,
        }
    }
}

/// A finite word over {0, *, 1}.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItineraryWord {
    pub symbols: Vec<Symbol>,
}

impl ItineraryWord {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        ItineraryWord { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Drops the leading symbol.
    pub fn shift(&self) -> ItineraryWord {
        ItineraryWord { symbols: self.symbols.get(1..).unwrap_or(&[]).to_vec() }
    }

    pub fn prefix(&self, n: usize) -> ItineraryWord {
        ItineraryWord { symbols: self.symbols[..n.min(self.len())].to_vec() }
    }
}

impl fmt::Display for ItineraryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for ItineraryWord {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.chars()
            .map(|ch| match ch {
                '0' => Ok(Symbol::Zero),
                '*' => Ok(Symbol::Star),
                '1' => Ok(Symbol::One),
                other => Err(alloc::format!("invalid itinerary symbol {other:?}")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(ItineraryWord::new)
    }
}

/// The finite forward orbit of c = 1/2: `c_0 = c, c_1, …, c_{t+m-1}`, with
/// `c_t` periodic of period `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalOrbitData {
    pub points: Vec<AlgebraicPoint>,
    pub preperiod: usize,
    pub period: usize,
}

impl CriticalOrbitData {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The periodic point c_t whose preimages carry the surgery.
    pub fn target(&self) -> &AlgebraicPoint {
        &self.points[self.preperiod]
    }

    pub fn index_of(&self, x: &AlgebraicPoint) -> Option<usize> {
        self.points.iter().position(|p| p == x)
    }

    /// Index of f(c_i).
    pub fn next_index(&self, i: usize) -> usize {
        if i + 1 < self.points.len() {
            i + 1
        } else {
            self.preperiod
        }
    }

    /// First time at which c_i reaches c_t.
    pub fn level_of(&self, i: usize) -> usize {
        let t = self.preperiod;
        if i < t {
            t - i
        } else if i == t {
            0
        } else {
            self.period - (i - t)
        }
    }
}

/// Outcome of the critical-orbit search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitResult {
    Finite(CriticalOrbitData),
    NotFinite,
}

impl OrbitResult {
    pub fn finite(self) -> Option<CriticalOrbitData> {
        match self {
            OrbitResult::Finite(d) => Some(d),
            OrbitResult::NotFinite => None,
        }
    }
}

pub const DEFAULT_MAX_ITER: usize = 4096;

pub fn compare(beta: &AlgebraicParameter, x: &AlgebraicPoint, y: &AlgebraicPoint) -> Result<Ordering, FieldError> {
    beta.compare(x, y)
}

/// One tent step without the domain check; also returns the position of `x`
/// relative to c.
pub fn tent_step(beta: &AlgebraicParameter, x: &AlgebraicPoint) -> Result<(AlgebraicPoint, Ordering), FieldError> {
    let side = beta.compare(x, &beta.half())?;
    let y = if side == Ordering::Greater { beta.mul_beta(&x.one_minus()) } else { beta.mul_beta(x) };
    Ok((y, side))
}

/// `f_β(x)`: βx on [0, 1/2], β(1 - x) on (1/2, 1].
pub fn tent_apply(beta: &AlgebraicParameter, x: &AlgebraicPoint) -> Result<AlgebraicPoint, TentError> {
    in_unit(beta, x)?;
    Ok(tent_step(beta, x)?.0)
}

pub(crate) fn in_unit(beta: &AlgebraicParameter, x: &AlgebraicPoint) -> Result<(), TentError> {
    if beta.sign(x)? == Ordering::Less || beta.sign(&x.one_minus())? == Ordering::Less {
        return Err(TentError::Domain);
    }
    Ok(())
}

/// Iterates c exactly until a point repeats.
pub fn critical_orbit(beta: &AlgebraicParameter, max_iter: usize) -> Result<OrbitResult, FieldError> {
    let mut seen: BTreeMap<AlgebraicPoint, usize> = BTreeMap::new();
    let mut points = Vec::new();
    let mut x = beta.half();
    for _ in 0..=max_iter.max(1) {
        if let Some(&t) = seen.get(&x) {
            let period = points.len() - t;
            return Ok(OrbitResult::Finite(CriticalOrbitData { points, preperiod: t, period }));
        }
        seen.insert(x.clone(), points.len());
        points.push(x.clone());
        x = tent_step(beta, &x)?.0;
    }
    Ok(OrbitResult::NotFinite)
}

pub fn symbol_of(beta: &AlgebraicParameter, x: &AlgebraicPoint) -> Result<Symbol, FieldError> {
    Ok(Symbol::from_ordering(beta.compare(x, &beta.half())?))
}

/// `I_0 I_1 … I_{n-1}` with `I_i` the symbol of `f^i(x)`.
pub fn itinerary(beta: &AlgebraicParameter, x: &AlgebraicPoint, n: usize) -> Result<ItineraryWord, TentError> {
    in_unit(beta, x)?;
    let mut out = Vec::with_capacity(n);
    let mut y = x.clone();
    for i in 0..n {
        let (next, side) = tent_step(beta, &y)?;
        out.push(Symbol::from_ordering(side));
        if i + 1 < n {
            y = next;
        }
    }
    Ok(ItineraryWord::new(out))
}

/// Parity-lexicographic order: `0 < * < 1` at the first difference when the
/// common prefix holds an even number of ones, reversed when odd.
pub fn parity_lex_compare(u: &ItineraryWord, v: &ItineraryWord) -> Result<Ordering, TentError> {
    if u.len() != v.len() {
        return Err(TentError::LengthMismatch(u.len(), v.len()));
    }
    let mut ones = 0usize;
    for (a, b) in u.symbols.iter().zip(&v.symbols) {
        if a != b {
            let o = a.rank().cmp(&b.rank());
            return Ok(if ones % 2 == 0 { o } else { o.reverse() });
        }
        if *a == Symbol::One {
            ones += 1;
        }
    }
    Ok(Ordering::Equal)
}

/// The k ≥ 0 with √2 < β^(2^k) ≤ 2.
pub fn renorm_depth(beta: &AlgebraicParameter) -> Result<u32, FieldError> {
    let two = beta.rational(2, 1);
    let mut y = beta.beta();
    let mut k = 0;
    loop {
        let sq = beta.mul(&y, &y);
        if beta.compare(&sq, &two)? == Ordering::Greater {
            return Ok(k);
        }
        y = sq;
        k += 1;
    }
}

/// `[β − β²/2, β/2]`, i.e. `[c_2, c_1]`.
pub fn core_interval(beta: &AlgebraicParameter) -> (AlgebraicPoint, AlgebraicPoint) {
    let b = beta.beta();
    let half = beta.half();
    let hi = beta.mul(&b, &half);
    let lo = b.sub(&beta.mul(&hi, &b));
    (lo, hi)
}

/// Level-k restrictive interval: f^(2^k) maps it into itself and is again
/// unimodal there.
pub fn restrictive_interval(beta: &AlgebraicParameter, k: u32) -> Result<(AlgebraicPoint, AlgebraicPoint), TentError> {
    let depth = renorm_depth(beta)?;
    if k == 0 || k > depth {
        return Err(TentError::NotRenormalizable { requested: k, depth });
    }
    let mut slope = beta.beta();
    // Affine maps back to original coordinates, innermost last.
    let mut frames: Vec<(AlgebraicPoint, AlgebraicPoint)> = Vec::new();
    let mut interval = None;
    for level in 1..=k {
        let one = beta.one();
        let p = beta.div(&slope, &one.add(&slope))?;
        let lo = p.one_minus();
        certify_return(beta, &slope, &lo, &p)?;
        if level == k {
            interval = Some((lo, p.clone()));
        } else {
            // h(x) = (p - x) / (2p - 1) conjugates f_s² on [1-p, p] to the tent
            // map of slope s².
            let width = p.add(&p).sub(&one);
            frames.push((p.clone(), width));
            slope = beta.mul(&slope, &slope);
        }
    }
    let (mut lo, mut hi) = interval.expect("loop runs at least once");
    for (p, width) in frames.iter().rev() {
        let a = p.sub(&beta.mul(&hi, width));
        let b = p.sub(&beta.mul(&lo, width));
        lo = a;
        hi = b;
    }
    Ok((lo, hi))
}

/// Tent map of slope `s` (an element of ℚ(β)).
fn tent_s(beta: &AlgebraicParameter, s: &AlgebraicPoint, x: &AlgebraicPoint) -> Result<AlgebraicPoint, FieldError> {
    if beta.compare(x, &beta.half())? == Ordering::Greater {
        Ok(beta.mul(s, &x.one_minus()))
    } else {
        Ok(beta.mul(s, x))
    }
}

/// Checks `f_s²([lo, p]) ⊆ [lo, p]` from exact images: f maps the interval
/// onto `[p, f(c)]`, and the second step reverses `[p, f(c)]`.
fn certify_return(
    beta: &AlgebraicParameter,
    s: &AlgebraicPoint,
    lo: &AlgebraicPoint,
    p: &AlgebraicPoint,
) -> Result<(), TentError> {
    let half = beta.half();
    let ok_order = beta.compare(lo, &half)? == Ordering::Less && beta.compare(&half, p)? == Ordering::Less;
    let c1 = tent_s(beta, s, &half)?;
    let f_lo = tent_s(beta, s, lo)?;
    let f_p = tent_s(beta, s, p)?;
    let c2 = tent_s(beta, s, &c1)?;
    let image_ok = f_lo == *p
        && f_p == *p
        && beta.compare(&c1, &half)? == Ordering::Greater
        && beta.compare(&c2, lo)? != Ordering::Less
        && beta.compare(&c2, p)? != Ordering::Greater;
    if ok_order && image_ok {
        Ok(())
    } else {
        Err(TentError::CertificateFailed)
    }
}
