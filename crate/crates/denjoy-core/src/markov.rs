//! Markov partition cut by the critical orbit, its 0/1 transition matrix,
//! spectral data and the growth constant M with `F(n) ≤ M βⁿ`.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::enclosure::Interval;
use crate::preimage::sort_points;
use crate::tent_core::{
    poly, tent_apply, AlgebraicParameter, AlgebraicPoint, CriticalOrbitData, FieldError, TentError,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MarkovError {
    #[error(transparent)]
    Tent(#[from] TentError),
    #[error("interval {0} does not map onto a union of partition intervals")]
    NotMarkov(usize),
    #[error("spectral radius did not converge")]
    NonConvergence,
}

impl From<FieldError> for MarkovError {
    fn from(e: FieldError) -> Self {
        MarkovError::Tent(e.into())
    }
}

/// Default width of the spectral-radius enclosure.
pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-12;
const POWER_ITER_CAP: usize = 20_000;

#[derive(Clone, Debug)]
pub struct MarkovPartition {
    beta: AlgebraicParameter,
    /// Sorted, distinct: the critical orbit together with 0, c and 1.
    pub cut_points: Vec<AlgebraicPoint>,
    /// `(index of f(left end), index of f(right end))` per interval.
    images: Vec<(usize, usize)>,
    /// Cut index of `c_t`.
    target_cut: usize,
}

impl MarkovPartition {
    /// Number of intervals s.
    pub fn len(&self) -> usize {
        self.cut_points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn beta(&self) -> &AlgebraicParameter {
        &self.beta
    }

    pub fn interval(&self, i: usize) -> (&AlgebraicPoint, &AlgebraicPoint) {
        (&self.cut_points[i], &self.cut_points[i + 1])
    }

    /// Cut indices bounding `f(I_i)`, smaller first.
    pub fn image_span(&self, i: usize) -> (usize, usize) {
        let (a, b) = self.images[i];
        (a.min(b), a.max(b))
    }

    /// Intervals having `c_t` as an endpoint.
    pub fn target_blocks(&self) -> Vec<usize> {
        let t = self.target_cut;
        let mut out = Vec::new();
        if t > 0 {
            out.push(t - 1);
        }
        if t < self.len() {
            out.push(t);
        }
        out
    }

    /// Index of the interval containing `x` in its interior, or `None` for a cut point.
    pub fn locate(&self, x: &AlgebraicPoint) -> Result<Option<usize>, FieldError> {
        let mut lo = 0;
        let mut hi = self.cut_points.len() - 1;
        for p in [&self.cut_points[lo], &self.cut_points[hi]] {
            if self.beta.compare(x, p)? == Ordering::Equal {
                return Ok(None);
            }
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            match self.beta.compare(x, &self.cut_points[mid])? {
                Ordering::Equal => return Ok(None),
                Ordering::Less => hi = mid,
                Ordering::Greater => lo = mid,
            }
        }
        Ok(Some(lo))
    }
}

/// Cuts `[0, 1]` at the critical orbit, 0, c and 1 and certifies that every
/// interval maps exactly onto a union of intervals.
pub fn build_partition(beta: &AlgebraicParameter, orbit: &CriticalOrbitData) -> Result<MarkovPartition, MarkovError> {
    let mut cuts: Vec<AlgebraicPoint> = orbit.points.clone();
    for p in [beta.zero(), beta.half(), beta.one()] {
        if !cuts.contains(&p) {
            cuts.push(p);
        }
    }
    let mut keyed: Vec<(AlgebraicPoint, ())> = cuts.into_iter().map(|p| (p, ())).collect();
    sort_points(beta, &mut keyed, |t| &t.0)?;
    let cut_points: Vec<AlgebraicPoint> = keyed.into_iter().map(|t| t.0).collect();
    let index = |x: &AlgebraicPoint| cut_points.iter().position(|p| p == x);
    let mut image_of_cut = Vec::with_capacity(cut_points.len());
    for p in &cut_points {
        let fp = tent_apply(beta, p)?;
        image_of_cut.push(index(&fp));
    }
    let mut images = Vec::with_capacity(cut_points.len() - 1);
    for i in 0..cut_points.len() - 1 {
        match (image_of_cut[i], image_of_cut[i + 1]) {
            (Some(a), Some(b)) if a != b => images.push((a, b)),
            _ => return Err(MarkovError::NotMarkov(i)),
        }
    }
    let target_cut = index(orbit.target()).ok_or(MarkovError::NotMarkov(0))?;
    Ok(MarkovPartition { beta: beta.clone(), cut_points, images, target_cut })
}

/// Enclosure `[lo, hi]` of a spectral radius with rational endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralEnclosure {
    pub lo: BigRational,
    pub hi: BigRational,
    pub method: SpectralMethod,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralMethod {
    /// Collatz–Wielandt bounds from a power-iteration vector.
    PowerIteration,
    /// Sturm isolation of the largest real root of the characteristic polynomial.
    CharPolyRoot,
}

impl SpectralEnclosure {
    pub fn interval(&self) -> Interval {
        let lo = Interval::from_rational(&self.lo).lo;
        let hi = Interval::from_rational(&self.hi).hi;
        Interval::new(lo, hi)
    }

    pub fn width(&self) -> f64 {
        (&self.hi - &self.lo).to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn contains_beta(&self, beta: &AlgebraicParameter) -> Result<bool, FieldError> {
        Ok(beta.cmp_rational(&self.lo)? != Ordering::Less && beta.cmp_rational(&self.hi)? != Ordering::Greater)
    }
}

#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    /// `B[i][j] = 1` iff `f(I_i) ⊇ I_j`.
    pub entries: Vec<Vec<u32>>,
    pub spectral_radius: SpectralEnclosure,
    /// Left and right Perron vectors normalized so that `wᵀ v = 1`, `max v = 1`.
    pub perron_left: Vec<f64>,
    pub perron_right: Vec<f64>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// Exact `Bⁿ`.
    pub fn power(&self, n: u32) -> Vec<Vec<BigInt>> {
        matrix_power(&self.entries, n)
    }

    /// `‖Bⁿ/ρⁿ − v wᵀ‖∞`, or the same for the Cesàro mean of `B^k/ρ^k`, k = 1..n.
    pub fn perron_residual(&self, n: u32, cesaro: bool) -> f64 {
        let s = self.size();
        let rho = self.spectral_radius.interval().mid();
        let b: Vec<Vec<f64>> = self.entries.iter().map(|r| r.iter().map(|&x| x as f64 / rho).collect()).collect();
        let mut p = identity_f64(s);
        let mut acc = vec![vec![0.0; s]; s];
        for _ in 0..n {
            p = mul_f64(&p, &b);
            for i in 0..s {
                for j in 0..s {
                    acc[i][j] += p[i][j];
                }
            }
        }
        let m = if cesaro {
            acc.iter().map(|r| r.iter().map(|x| x / n.max(1) as f64).collect()).collect()
        } else {
            p
        };
        let mut worst = 0.0f64;
        for i in 0..s {
            let row: f64 = (0..s).map(|j| (m[i][j] - self.perron_right[i] * self.perron_left[j]).abs()).sum();
            worst = worst.max(row);
        }
        worst
    }
}

fn identity_f64(s: usize) -> Vec<Vec<f64>> {
    (0..s).map(|i| (0..s).map(|j| (i == j) as u8 as f64).collect()).collect()
}

fn mul_f64(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let s = a.len();
    let mut out = vec![vec![0.0; s]; s];
    for i in 0..s {
        for k in 0..s {
            if a[i][k] != 0.0 {
                for j in 0..s {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    out
}

fn matrix_power(b: &[Vec<u32>], n: u32) -> Vec<Vec<BigInt>> {
    let s = b.len();
    let mut p: Vec<Vec<BigInt>> =
        (0..s).map(|i| (0..s).map(|j| BigInt::from((i == j) as u8)).collect()).collect();
    for _ in 0..n {
        p = mul_by_01(&p, b);
    }
    p
}

fn mul_by_01(p: &[Vec<BigInt>], b: &[Vec<u32>]) -> Vec<Vec<BigInt>> {
    let s = b.len();
    let mut out = vec![vec![BigInt::zero(); s]; s];
    for i in 0..s {
        for k in 0..s {
            if p[i][k].is_zero() {
                continue;
            }
            for j in 0..s {
                if b[k][j] != 0 {
                    out[i][j] += &p[i][k] * BigInt::from(b[k][j]);
                }
            }
        }
    }
    out
}

/// Transition matrix with spectral radius and Perron vectors.
pub fn build_matrix(partition: &MarkovPartition) -> Result<TransitionMatrix, MarkovError> {
    let s = partition.len();
    let mut entries = vec![vec![0u32; s]; s];
    for (i, row) in entries.iter_mut().enumerate() {
        let (a, b) = partition.image_span(i);
        for x in row.iter_mut().take(b).skip(a) {
            *x = 1;
        }
    }
    let spectral_radius = spectral_radius(&entries, DEFAULT_SPECTRAL_TOL)?;
    let mut right = power_vector(&entries, false);
    let mut left = power_vector(&entries, true);
    let vmax = right.iter().cloned().fold(0.0, f64::max);
    right.iter_mut().for_each(|x| *x /= vmax);
    let dot: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    left.iter_mut().for_each(|x| *x /= dot);
    Ok(TransitionMatrix { entries, spectral_radius, perron_left: left, perron_right: right })
}

fn shifted_step(b: &[Vec<u32>], x: &[f64], transpose: bool) -> Vec<f64> {
    let s = b.len();
    (0..s)
        .map(|i| {
            x[i] + (0..s)
                .map(|j| if transpose { b[j][i] as f64 * x[j] } else { b[i][j] as f64 * x[j] })
                .sum::<f64>()
        })
        .collect()
}

fn normalize_max(x: &mut [f64]) {
    let m = x.iter().cloned().fold(0.0, f64::max);
    if m > 0.0 {
        x.iter_mut().for_each(|v| *v /= m);
    }
}

/// Perron vector of `B` (or `Bᵀ`) by power iteration on `B + I`.
fn power_vector(b: &[Vec<u32>], transpose: bool) -> Vec<f64> {
    let mut x = vec![1.0; b.len()];
    for _ in 0..4000 {
        let mut y = shifted_step(b, &x, transpose);
        normalize_max(&mut y);
        let diff = y.iter().zip(&x).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        x = y;
        if diff < 1e-15 {
            break;
        }
    }
    x.iter_mut().for_each(|v| {
        if *v < 1e-13 {
            *v = 0.0
        }
    });
    x
}

/// Exact Collatz–Wielandt bounds of `B + I` at a positive rational vector, shifted back by one.
fn collatz_wielandt(b: &[Vec<u32>], x: &[f64]) -> Option<(BigRational, BigRational)> {
    let s = b.len();
    let xr: Vec<BigRational> = x.iter().map(|&v| BigRational::from_f64(v)).collect::<Option<_>>()?;
    if xr.iter().any(|v| !v.is_positive()) {
        return None;
    }
    let mut lo: Option<BigRational> = None;
    let mut hi: Option<BigRational> = None;
    for i in 0..s {
        let mut y = BigRational::zero();
        for j in 0..s {
            if b[i][j] != 0 {
                y += &xr[j] * BigInt::from(b[i][j]);
            }
        }
        let r = y / &xr[i];
        if lo.as_ref().is_none_or(|l| &r < l) {
            lo = Some(r.clone());
        }
        if hi.as_ref().is_none_or(|h| &r > h) {
            hi = Some(r);
        }
    }
    Some((lo?, hi?))
}

/// Certified enclosure of `ρ(B)` of width at most `tol`.
pub fn spectral_radius(b: &[Vec<u32>], tol: f64) -> Result<SpectralEnclosure, MarkovError> {
    let s = b.len();
    let tol_q = BigRational::from_f64(tol).ok_or(MarkovError::NonConvergence)?;
    let mut x = vec![1.0; s];
    for it in 1..=POWER_ITER_CAP {
        let mut y = shifted_step(b, &x, false);
        normalize_max(&mut y);
        x = y;
        if it % 16 == 0 || it < 16 {
            let float_w = {
                let bx = shifted_step(b, &x, false);
                let ratios: Vec<f64> = (0..s).map(|i| bx[i] / x[i] - 1.0).collect();
                let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            };
            if float_w.is_finite() && float_w < tol * 0.5 {
                if let Some((lo, hi)) = collatz_wielandt(b, &x) {
                    if &hi - &lo <= tol_q {
                        return Ok(SpectralEnclosure { lo, hi, method: SpectralMethod::PowerIteration, iterations: it });
                    }
                }
            }
        }
    }
    char_poly_radius(b, tol)
}

fn char_poly_radius(b: &[Vec<u32>], tol: f64) -> Result<SpectralEnclosure, MarkovError> {
    let cp = char_poly(b);
    let asc: Vec<BigRational> = cp.iter().rev().map(|c| BigRational::from_integer(c.clone())).collect();
    let bits = (libm::ceil(-libm::log2(tol)) as u32).saturating_add(2);
    let (lo, hi) = poly::largest_real_root(&asc, bits).ok_or(MarkovError::NonConvergence)?;
    Ok(SpectralEnclosure { lo, hi, method: SpectralMethod::CharPolyRoot, iterations: 0 })
}

/// Spectral radius through the characteristic polynomial only.
pub fn spectral_radius_char_poly(b: &[Vec<u32>], tol: f64) -> Result<SpectralEnclosure, MarkovError> {
    char_poly_radius(b, tol)
}

/// Characteristic polynomial `det(xI − B)`, leading coefficient first
/// (Faddeev–LeVerrier).
pub fn char_poly(b: &[Vec<u32>]) -> Vec<BigInt> {
    let s = b.len();
    let a: Vec<Vec<BigInt>> = b.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut coeffs = vec![BigInt::zero(); s + 1];
    coeffs[0] = BigInt::one();
    let mut m = vec![vec![BigInt::zero(); s]; s];
    for k in 1..=s {
        // M_k = A M_{k-1} + c_{k-1} I
        let mut next = vec![vec![BigInt::zero(); s]; s];
        for i in 0..s {
            for j in 0..s {
                let mut acc = BigInt::zero();
                for l in 0..s {
                    if !a[i][l].is_zero() {
                        acc += &a[i][l] * &m[l][j];
                    }
                }
                next[i][j] = acc;
            }
            next[i][i] += &coeffs[k - 1];
        }
        m = next;
        let mut tr = BigInt::zero();
        for i in 0..s {
            for l in 0..s {
                if !a[i][l].is_zero() {
                    tr += &a[i][l] * &m[l][i];
                }
            }
        }
        coeffs[k] = -tr / BigInt::from(k);
    }
    coeffs
}

/// Whether the minimal polynomial of β divides the characteristic polynomial of `B`.
pub fn min_poly_divides(beta: &AlgebraicParameter, b: &[Vec<u32>]) -> bool {
    let cp: Vec<BigRational> = char_poly(b).iter().rev().map(|c| BigRational::from_integer(c.clone())).collect();
    poly::rem(&cp, beta.poly_ascending()).is_empty()
}

/// Growth constant with the data behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthConstant {
    /// The constant used for tail bounds.
    pub m: f64,
    /// `max_{n ≤ n_max}` of the path counts into the blocks at `c_t`, over `βⁿ`.
    pub scan: f64,
    /// Bound valid for every n from an exact positive eigenvector, if one exists.
    pub perron: Option<f64>,
    pub n_max: u32,
}

/// `M = max(2·scan, perron)`.
///
/// Every level-n preimage of `c_t` lies in a closed n-cylinder whose image has
/// `c_t` as a point, so `F(n)` is at most the number of length-n paths ending
/// in a block next to `c_t`. With `B v = β v`, `v > 0`, each `(Bⁿ)_{ij} ≤ βⁿ v_i / v_j`.
pub fn growth_constant(
    beta: &AlgebraicParameter,
    partition: &MarkovPartition,
    matrix: &TransitionMatrix,
    n_max: u32,
) -> Result<GrowthConstant, MarkovError> {
    let adj = partition.target_blocks();
    let s = matrix.size();
    let bf = beta.beta_interval();
    let mut p: Vec<Vec<BigInt>> =
        (0..s).map(|i| (0..s).map(|j| BigInt::from((i == j) as u8)).collect()).collect();
    let mut scan = 0.0f64;
    let mut bpow = Interval::point(1.0);
    for _ in 1..=n_max {
        p = mul_by_01(&p, &matrix.entries);
        bpow = bpow * bf;
        let mut col = BigInt::zero();
        for row in &p {
            for &j in &adj {
                col += &row[j];
            }
        }
        let ratio = Interval::from_rational(&BigRational::from_integer(col)).div(&bpow);
        scan = scan.max(ratio.hi);
    }
    let perron = exact_perron_bound(beta, &matrix.entries, &adj)?;
    let m = perron.map_or(2.0 * scan, |pb| pb.max(2.0 * scan));
    Ok(GrowthConstant { m, scan, perron, n_max })
}

/// `Σ_i v_i Σ_{j ∈ adj} 1/v_j` for the exact eigenvector of `B` at β.
fn exact_perron_bound(beta: &AlgebraicParameter, b: &[Vec<u32>], adj: &[usize]) -> Result<Option<f64>, MarkovError> {
    let Some(v) = exact_eigenvector(beta, b)? else {
        return Ok(None);
    };
    for x in &v {
        if beta.sign(x)? == Ordering::Less {
            return Ok(None);
        }
    }
    let mut inv_sum = beta.zero();
    for &j in adj {
        if v[j].is_zero() {
            return Ok(None);
        }
        inv_sum = inv_sum.add(&beta.inv(&v[j])?);
    }
    let total = v.iter().fold(beta.zero(), |acc, x| acc.add(x));
    let bound = beta.mul(&total, &inv_sum);
    Ok(Some(beta.to_interval(&bound).hi))
}

/// A nonzero solution of `(B − β I) v = 0` in ℚ(β), sign-normalized so that
/// its first nonzero entry is positive.
pub fn exact_eigenvector(beta: &AlgebraicParameter, b: &[Vec<u32>]) -> Result<Option<Vec<AlgebraicPoint>>, MarkovError> {
    let s = b.len();
    let bt = beta.beta();
    let mut a: Vec<Vec<AlgebraicPoint>> = (0..s)
        .map(|i| {
            (0..s)
                .map(|j| {
                    let x = beta.rational(b[i][j] as i64, 1);
                    if i == j {
                        x.sub(&bt)
                    } else {
                        x
                    }
                })
                .collect()
        })
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..s {
        let Some(pr) = (row..s).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, pr);
        let inv = beta.inv(&a[row][col])?;
        for j in 0..s {
            a[row][j] = beta.mul(&a[row][j], &inv);
        }
        for r in 0..s {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..s {
                    let t = beta.mul(&f, &a[row][j]);
                    a[r][j] = a[r][j].sub(&t);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let Some(free) = (0..s).find(|c| !pivots.contains(c)) else {
        return Ok(None);
    };
    let mut v = vec![beta.zero(); s];
    v[free] = beta.one();
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = a[r][free].neg();
    }
    if let Some(first) = v.iter().find(|x| !x.is_zero()) {
        if beta.sign(first)? == Ordering::Less {
            v = v.iter().map(|x| x.neg()).collect();
        }
    }
    Ok(Some(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tent_core::{critical_orbit, Catalog, DEFAULT_MAX_ITER};

    fn setup(c: Catalog) -> (AlgebraicParameter, CriticalOrbitData, MarkovPartition, TransitionMatrix) {
        let b = c.parameter();
        let o = critical_orbit(&b, DEFAULT_MAX_ITER).unwrap().finite().unwrap();
        let p = build_partition(&b, &o).unwrap();
        let m = build_matrix(&p).unwrap();
        (b, o, p, m)
    }

    #[test]
    fn full_tent_matrix() {
        let (b, _, p, m) = setup(Catalog::Full);
        assert_eq!(p.len(), 2);
        assert_eq!(m.entries, vec![vec![1, 1], vec![1, 1]]);
        assert_eq!(char_poly(&m.entries), vec![BigInt::from(1), BigInt::from(-2), BigInt::from(0)]);
        assert!(m.spectral_radius.contains_beta(&b).unwrap());
    }

    #[test]
    fn partition_sizes() {
        assert_eq!(setup(Catalog::Golden).2.len(), 4);
        assert_eq!(setup(Catalog::Sqrt2).2.len(), 5);
    }

    #[test]
    fn fallback_agrees() {
        for c in Catalog::ALL {
            let (b, _, _, m) = setup(c);
            let e = spectral_radius_char_poly(&m.entries, 1e-10).unwrap();
            assert!(e.contains_beta(&b).unwrap(), "{c}");
        }
    }
}
