//! Left-mass function `Λ(y)`: the total inserted length attached to points
//! below `y`.
//!
//! Level counts grow like βⁿ while lengths decay like β⁻ⁿ/n², so the sum is
//! truncated at a depth N of order 1/tolerance, far beyond exact integer
//! arithmetic. The normalized counts `T_k(θ)/β^k` on the threshold set are
//! streamed in f64 once per model; a query point then only needs its own
//! itinerary and a table of kernels.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{schedule_weight, ExactWalk, LengthSchedule, PreimageError, Thresholds};
use crate::enclosure::Interval;
use crate::tent_core::{renorm_depth, AlgebraicParameter, AlgebraicPoint, CriticalOrbitData, FieldError, TentError};

/// Number of itinerary kernels kept by default.
pub const DEFAULT_KERNEL_LEN: usize = 256;

const U: f64 = f64::EPSILON / 2.0;
/// Rounding-error model for the normalized stream: the value at level k is
/// trusted to `MODEL_C (k+1) u` times the largest streamed value.
const MODEL_C: f64 = 20.0;
/// Float-tracked orbit intervals wider than this are re-seeded exactly.
const RESEED_WIDTH: f64 = 1e-9;
const MAX_DEPTH: f64 = 4.0e9;

/// Summary numbers of a streamed model.
#[derive(Clone, Debug, PartialEq)]
pub struct MassStats {
    /// Truncation depth N.
    pub depth: u64,
    /// Growth constant M used for the tail.
    pub growth: f64,
    /// Deep-tail bound `2M/(N+1)`.
    pub tail: f64,
    /// Upper bound on `U_k/β^k`, k ≤ N.
    pub u_bound: f64,
    /// Error bound on each kernel.
    pub kernel_err: f64,
    /// Largest deviation of the normalized stream from its periodic limit.
    pub periodic_delta: f64,
    /// Period used for that limit.
    pub period: usize,
}

#[derive(Clone, Debug)]
pub struct MassModel {
    beta: AlgebraicParameter,
    orbit: CriticalOrbitData,
    th: Thresholds,
    target: usize,
    growth: f64,
    depth: u64,
    tail: f64,
    kernels: Vec<f64>,
    kernel_err: f64,
    u_bound: f64,
    level_sum: Interval,
    binv_pows: Vec<Interval>,
    omega_head: Vec<Interval>,
    orbit_mass: Vec<Interval>,
    beta_n_inv: f64,
    stats: MassStats,
}

/// Neumaier-compensated sum.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// One level of the normalized threshold recursion.
struct Stream<'a> {
    th: &'a Thresholds,
    binv: f64,
    r: Vec<f64>,
    scratch: Vec<f64>,
    e: Vec<bool>,
    e_scratch: Vec<bool>,
    epow: f64,
    k: u64,
}

impl<'a> Stream<'a> {
    fn new(th: &'a Thresholds, target: usize, beta: f64) -> Self {
        let r = (0..th.len()).map(|i| (th.order[target][i] == Ordering::Less) as u8 as f64).collect();
        let e = (0..th.len()).map(|i| i == target).collect();
        Stream {
            th,
            binv: 1.0 / beta,
            r,
            scratch: vec![0.0; th.len()],
            e,
            e_scratch: vec![false; th.len()],
            epow: 1.0,
            k: 0,
        }
    }

    fn ehat(&self, i: usize) -> f64 {
        if self.e[i] {
            self.epow
        } else {
            0.0
        }
    }

    /// `Ĝ_k = G_k / β^k`.
    fn g(&self) -> f64 {
        2.0 * self.r[self.th.c1] + self.ehat(self.th.c1)
    }

    /// `Û_k = U_k / β^k`.
    fn u(&self) -> f64 {
        self.r[self.th.one] + self.ehat(self.th.one)
    }

    fn advance(&mut self) {
        let th = self.th;
        let live = self.epow != 0.0;
        let c1 = th.c1;
        let top = 2.0 * self.r[c1] + if live { self.ehat(c1) } else { 0.0 };
        for i in 0..th.len() {
            let f = th.next[i];
            let rf = self.r[f];
            self.scratch[i] = if th.above[i] {
                let ef = if live && self.e[f] { self.epow } else { 0.0 };
                (top - rf - ef) * self.binv
            } else {
                rf * self.binv
            };
        }
        core::mem::swap(&mut self.r, &mut self.scratch);
        if live {
            for i in 0..th.len() {
                self.e_scratch[i] = self.e[th.next[i]];
            }
            core::mem::swap(&mut self.e, &mut self.e_scratch);
            self.epow *= self.binv;
            // Far below every error term; avoids subnormal arithmetic.
            if self.epow < 1e-300 {
                self.epow = 0.0;
            }
        }
        self.k += 1;
    }
}

fn omega(k: u64, n: u64, m: u64, bm: f64) -> f64 {
    let head = if k >= 1 && k <= n { schedule_weight(k) } else { 0.0 };
    let tail = if k + m <= n { bm * schedule_weight(k + m) } else { 0.0 };
    head - tail
}

impl MassModel {
    /// Streams the model with the deep tail `2M/(N+1)` at most `tail_target`.
    pub fn new(
        beta: &AlgebraicParameter,
        orbit: &CriticalOrbitData,
        growth: Option<f64>,
        tail_target: f64,
        kernel_len: usize,
    ) -> Result<Self, PreimageError> {
        let growth = growth.filter(|m| m.is_finite() && *m > 0.0).ok_or(PreimageError::TailBoundUnavailable)?;
        let depth_f = libm::ceil(2.0 * growth / tail_target).max(1.0);
        if !(depth_f <= MAX_DEPTH) {
            return Err(PreimageError::DepthTooLarge(depth_f as u64));
        }
        let n = depth_f as u64;
        let tail = (2.0 * growth / (n as f64 + 1.0)).next_up().next_up();
        let th = Thresholds::new(beta, orbit)?;
        let target = orbit.preperiod;
        let m = orbit.period as u64;
        let jmax = kernel_len.max(4);
        let period = 1usize << renorm_depth(beta)?.min(16);
        let bm = libm::pow(1.0 / beta.approx(), m as f64);

        let i0 = {
            let base = 4096usize.max(4 * jmax) as u64;
            base.div_ceil(period as u64) * period as u64
        };
        let mut stream = Stream::new(&th, target, beta.approx());
        let mut kernels = vec![0.0f64; jmax];
        let mut uring = vec![0.0f64; m as usize];
        let mut level_sum = Compensated::default();
        let mut level_err_weight = 0.0f64;
        let mut kern_err_weight = 0.0f64;
        let mut delta_w = 0.0f64;
        let mut delta_max = 0.0f64;
        let mut pvals = vec![0.0f64; period];
        let mut u_max = 0.0f64;
        let mut g_max = 0.0f64;
        let p = period as u64;
        let lo_s = i0 + 1;
        let hi_s = i0 + jmax as u64;
        // Residue-class tails of w_k beyond `w_cut`, for the periodic kernel part.
        let w_cut = hi_s + m;
        let mut w_tail = vec![Compensated::default(); period];
        let mut slot_m = 0usize;
        let mut slot_p = 0usize;
        let mut w_k = 0.0f64;
        for k in 0..=n {
            if k > 0 {
                stream.advance();
            }
            let w_next = schedule_weight(k + 1);
            let g = stream.g();
            let u = stream.u();
            let fhat = if k >= m { u - bm * uring[slot_m] } else { u };
            uring[slot_m] = u;
            slot_m += 1;
            if slot_m == m as usize {
                slot_m = 0;
            }
            if k >= 1 {
                level_sum.add(w_k * fhat);
                level_err_weight += w_k * (k as f64 + 1.0);
                if k > w_cut {
                    w_tail[slot_p].add(w_k);
                }
            }
            u_max = u_max.max(u);
            g_max = g_max.max(g);
            if k < n {
                kern_err_weight += w_next * (k as f64 + 1.0);
                if k < i0 {
                    for (j, kj) in kernels.iter_mut().enumerate() {
                        let kk = k + 1 + j as u64;
                        if kk > n {
                            break;
                        }
                        *kj += omega(kk, n, m, bm) * g;
                    }
                } else if k < i0 + p {
                    pvals[slot_p] = g;
                } else {
                    let d = (g - pvals[slot_p]).abs();
                    delta_max = delta_max.max(d);
                    delta_w += w_next * d;
                }
            }
            w_k = w_next;
            slot_p += 1;
            if slot_p == period {
                slot_p = 0;
            }
        }
        if n > i0 {
            // W(s, ρ) = Σ_{s ≤ k ≤ N, k ≡ ρ} w_k, so that
            // Q(s, ρ) = Σ_{k ≥ s, k ≡ ρ} ω_k = W(s, ρ) − β^-m W(s + m, ρ + m).
            let span = (w_cut - lo_s + 1) as usize;
            let mut w_at: Vec<Vec<f64>> = vec![Vec::new(); span];
            let mut running = w_tail;
            let mut s = w_cut;
            while s >= lo_s {
                if s <= n {
                    running[(s % p) as usize].add(schedule_weight(s));
                }
                w_at[(s - lo_s) as usize] = running.iter().map(|c| c.value()).collect();
                s -= 1;
            }
            let q = |s: u64, rho: usize| -> f64 {
                let a = w_at[(s - lo_s) as usize][rho];
                let b = w_at[(s + m - lo_s) as usize][(rho + m as usize) % period];
                a - bm * b
            };
            for (j, kj) in kernels.iter_mut().enumerate() {
                for (r, pv) in pvals.iter().enumerate() {
                    let rho = (r + 1 + j) % period;
                    *kj += pv * q(lo_s + j as u64, rho);
                }
            }
        }
        let scale = u_max.max(g_max).max(1.0);
        let accum = (i0 as f64 + jmax as f64 + 8.0) * U * 2.0 * scale;
        let kernel_err = MODEL_C * U * scale * kern_err_weight + delta_w + accum + 1e-300;
        let u_bound = (u_max + MODEL_C * U * (n as f64 + 1.0) * scale) * (1.0 + 1e-12);
        let ls = level_sum.value();
        let level_rad = MODEL_C * U * scale * level_err_weight * (1.0 + bm) + 4.0 * U * ls.abs() + 1e-300;
        let level_sum = Interval::ball(ls, level_rad);

        let bf = beta.beta_interval();
        let binv_f = bf.recip();
        let mut binv_pows = Vec::with_capacity(jmax + 3);
        let mut acc = Interval::point(1.0);
        for _ in 0..jmax + 3 {
            binv_pows.push(acc);
            acc = acc * binv_f;
        }
        let omega_head = (0..jmax + 2)
            .map(|k| {
                let w = omega(k as u64, n, m, bm);
                Interval::ball(w, 8.0 * U * w.abs() + 1e-300) * binv_pows[k]
            })
            .collect();
        let schedule = LengthSchedule::new(beta);
        let orbit_mass = (0..orbit.len())
            .map(|i| {
                let lev = orbit.level_of(i);
                if lev == 0 {
                    Interval::ZERO
                } else {
                    beta.to_interval(&schedule.exact(lev))
                }
            })
            .collect();
        let beta_n_inv = (libm::exp(-(n as f64) * libm::log(bf.lo)) * (1.0 + 1e-9)).next_up();
        let stats = MassStats {
            depth: n,
            growth,
            tail,
            u_bound,
            kernel_err,
            periodic_delta: delta_max,
            period,
        };
        Ok(MassModel {
            beta: beta.clone(),
            orbit: orbit.clone(),
            th,
            target,
            growth,
            depth: n,
            tail,
            kernels,
            kernel_err,
            u_bound,
            level_sum,
            binv_pows,
            omega_head,
            orbit_mass,
            beta_n_inv,
            stats,
        })
    }

    pub fn stats(&self) -> &MassStats {
        &self.stats
    }

    pub fn depth(&self) -> u64 {
        self.depth
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn kernel_len(&self) -> usize {
        self.kernels.len()
    }

    pub fn beta(&self) -> &AlgebraicParameter {
        &self.beta
    }

    pub fn orbit(&self) -> &CriticalOrbitData {
        &self.orbit
    }

    /// `Σ_{n≥1} F(n) a(n)` over all levels, orbit points included.
    pub fn level_mass_sum(&self) -> Interval {
        self.level_sum + Interval::new(0.0, self.tail)
    }

    /// Total inserted length `L`.
    pub fn total_length(&self) -> Interval {
        let mut l = Interval::point(self.orbit.len() as f64) + self.level_mass_sum();
        for a in &self.orbit_mass {
            l = l - *a;
        }
        l
    }

    /// Re-runs the normalized stream for levels `0..=upto`, returning
    /// `(G_k/β^k, U_k/β^k)`.
    pub fn normalized_stream(&self, upto: usize) -> Vec<(f64, f64)> {
        let mut s = Stream::new(&self.th, self.target, self.beta.approx());
        let mut out = Vec::with_capacity(upto + 1);
        for k in 0..=upto {
            if k > 0 {
                s.advance();
            }
            out.push((s.g(), s.u()));
        }
        out
    }

    /// Error bound the model assigns to the normalized stream at level k.
    pub fn stream_error_bound(&self, k: usize) -> f64 {
        MODEL_C * U * (k as f64 + 1.0) * self.u_bound.max(1.0) * 2.0
    }

    fn remainder_scale(&self) -> f64 {
        let b = self.beta.approx();
        2.0 * self.u_bound + b / (b - 1.0) + 1.0
    }

    /// Walk length whose remainder is at most `tol / 2`.
    fn steps_for(&self, tol: f64) -> usize {
        let b = self.beta.approx();
        let need = libm::log(2.0 * self.remainder_scale() / tol) / libm::log(b);
        (libm::ceil(need).max(1.0) as usize).min(self.kernels.len())
    }

    /// `Λ(y)`: total length inserted at points strictly below `y`.
    pub fn left_mass(&self, y: &AlgebraicPoint, tol: f64) -> Result<Interval, TentError> {
        crate::tent_core::in_unit(&self.beta, y)?;
        if y.is_zero() {
            return Ok(Interval::ZERO);
        }
        let steps = self.steps_for(tol);
        let walk = self.walk(y, steps)?;
        self.left_mass_from(y, &walk, steps)
    }

    /// [`left_mass`](Self::left_mass) together with
    /// [`preimage_level`](Self::preimage_level), sharing one walk.
    pub fn left_mass_and_level(
        &self,
        y: &AlgebraicPoint,
        tol: f64,
        scan: usize,
    ) -> Result<(Interval, Option<usize>), TentError> {
        crate::tent_core::in_unit(&self.beta, y)?;
        let steps = self.steps_for(tol);
        let walk = self.walk(y, steps.max(scan))?;
        let level = walk.hit[..=scan.min(walk.hit.len() - 1)].iter().position(|&h| h);
        if y.is_zero() {
            return Ok((Interval::ZERO, level));
        }
        Ok((self.left_mass_from(y, &walk, steps)?, level))
    }

    fn left_mass_from(&self, y: &AlgebraicPoint, walk: &ExactWalk, steps: usize) -> Result<Interval, TentError> {
        let psi = self.probe(walk, steps);
        let first_right = walk.r.iter().take(steps).position(|&r| r).unwrap_or(steps);
        let deep = self.tail.min(self.local_deep(first_right));
        let mut out = psi + Interval::new(0.0, deep);
        for i in 0..self.orbit.len() {
            if self.orbit_below(i, y)? {
                out = out + Interval::point(1.0) - self.orbit_mass[i];
            }
        }
        Ok(Interval::new(out.lo.max(0.0), out.hi.max(0.0)))
    }

    /// Enclosure of `Λ(z) − Λ(y)`, the length inserted at points of `[y, z)`,
    /// with relative accuracy about `rel` beyond the shared itinerary prefix.
    pub fn mass_between(&self, y: &AlgebraicPoint, z: &AlgebraicPoint, rel: f64) -> Result<Interval, TentError> {
        crate::tent_core::in_unit(&self.beta, y)?;
        crate::tent_core::in_unit(&self.beta, z)?;
        match self.beta.compare(y, z)? {
            Ordering::Equal => return Ok(Interval::ZERO),
            Ordering::Greater => return Ok(-self.mass_between(z, y, rel)?),
            Ordering::Less => {}
        }
        let jmax = self.kernels.len();
        let extra = self.steps_for(rel);
        let mut steps = (extra + 24).min(jmax);
        let (wy, wz, p) = loop {
            let wy = self.walk(y, steps)?;
            let wz = self.walk(z, steps)?;
            let p = (0..steps).find(|&j| wy.r[j] != wz.r[j]).unwrap_or(steps);
            if p + extra <= steps || steps == jmax {
                break (wy, wz, p);
            }
            steps = (p + extra + 24).min(jmax);
        };
        let j = (p + extra).min(steps);
        let (gz, xz, rz) = self.probe_parts(&wz, j);
        let (gy, xy, ry) = self.probe_parts(&wy, j);
        let mut acc = Interval::ZERO;
        for k in 0..j {
            let d = gz[k] - gy[k];
            if d != 0 {
                let term = self.binv_pows[k + 1] * Interval::ball(self.kernels[k], self.kernel_err);
                acc = acc + term.scale(d as f64);
            }
        }
        for k in 0..=j {
            let d = xz[k] - xy[k];
            if d != 0 {
                acc = acc + self.omega_head[k].scale(d as f64);
            }
        }
        acc = acc + rz - ry;
        let deep = self.local_deep(p);
        acc = acc + Interval::new(0.0, deep);
        let upper = self.th.position(z);
        for i in 0..self.orbit.len() {
            let ge_y = !self.orbit_below(i, y)?;
            let lt_z = self.orbit_below(i, z)? && upper != Some(i);
            if ge_y && lt_z {
                acc = acc + Interval::point(1.0) - self.orbit_mass[i];
            }
        }
        Ok(Interval::new(acc.lo.max(0.0), acc.hi.max(0.0)))
    }

    /// First-hit level of `y` if it is a preimage of `c_t` within `steps`.
    pub fn preimage_level(&self, y: &AlgebraicPoint, steps: usize) -> Result<Option<usize>, FieldError> {
        let w = self.walk(y, steps)?;
        Ok(w.hit.iter().position(|&h| h))
    }

    fn orbit_below(&self, i: usize, y: &AlgebraicPoint) -> Result<bool, FieldError> {
        let e = self.th.enc[i];
        let yi = self.beta.to_interval(y);
        if e.hi < yi.lo {
            return Ok(true);
        }
        if yi.hi < e.lo {
            return Ok(false);
        }
        Ok(self.beta.compare(&self.orbit.points[i], y)? == Ordering::Less)
    }

    /// Mass of levels beyond N inside an interval whose first `p` images do
    /// not straddle c.
    fn local_deep(&self, p: usize) -> f64 {
        let n1 = self.depth as f64 + 1.0;
        let bp = self.binv_pows[p.min(self.binv_pows.len() - 1)].hi;
        ((bp * self.growth + self.beta_n_inv) * 2.0 / n1 * (1.0 + 1e-12)).next_up()
    }

    fn probe(&self, walk: &ExactWalk, j: usize) -> Interval {
        let (g, x, rem) = self.probe_parts(walk, j);
        let mut acc = Interval::ZERO;
        for k in 0..j {
            if g[k] != 0 {
                let term = self.binv_pows[k + 1] * Interval::ball(self.kernels[k], self.kernel_err);
                acc = if g[k] > 0 { acc + term } else { acc - term };
            }
        }
        for k in 0..=j {
            if x[k] != 0 {
                acc = if x[k] > 0 { acc + self.omega_head[k] } else { acc - self.omega_head[k] };
            }
        }
        acc + rem
    }

    /// Coefficients `s_k r_k` of the kernels, integer weights of `ω_k β^-k`,
    /// and the enclosure of everything beyond level `j`.
    fn probe_parts(&self, walk: &ExactWalk, j: usize) -> (Vec<i8>, Vec<i8>, Interval) {
        let mut g = vec![0i8; j];
        let mut x = vec![0i8; j + 1];
        let mut s = 1i8;
        for k in 0..=j {
            let lt = walk.lt[k] as i8;
            let hit = (walk.hit[k] && s < 0) as i8;
            x[k] = s * lt - hit;
            if k < j && walk.r[k] {
                g[k] = s;
                s = -s;
            }
        }
        let b = self.beta.approx();
        let bj = self.binv_pows[j].hi;
        let counts = (bj * self.u_bound * 2.0).next_up();
        let hits = (self.binv_pows[j + 1].hi * b / (b - 1.0) * (1.0 + 1e-12)).next_up();
        let rem = if s > 0 { Interval::new(0.0, counts) } else { Interval::new(-counts - hits, 0.0) };
        (g, x, rem)
    }

    /// Itinerary data of `y` for `steps` steps: floats where the side of c is
    /// clear, exact arithmetic when an orbit point or c is within reach.
    fn walk(&self, y: &AlgebraicPoint, steps: usize) -> Result<ExactWalk, FieldError> {
        let beta = &self.beta;
        let th = &self.th;
        let tau = self.target;
        let bf = beta.beta_interval();
        let half = beta.half();
        let unit = Interval::new(0.0, 1.0);
        let mut w = ExactWalk {
            r: Vec::with_capacity(steps),
            lt: Vec::with_capacity(steps + 1),
            hit: Vec::with_capacity(steps + 1),
        };
        let mut exact = y.clone();
        let mut exact_at = 0usize;
        let mut fy = beta.to_interval(y);
        let mut idx: Option<usize> = None;
        let advance = |exact: &mut AlgebraicPoint, at: &mut usize, j: usize, r: &[bool]| {
            while *at < j {
                *exact = if r[*at] { beta.mul_beta(&exact.one_minus()) } else { beta.mul_beta(exact) };
                *at += 1;
            }
        };
        for j in 0..=steps {
            if idx.is_none() {
                if !(fy.width() <= RESEED_WIDTH) {
                    advance(&mut exact, &mut exact_at, j, &w.r);
                    fy = beta.to_interval(&exact);
                }
                for i in 0..th.len() {
                    if th.enc[i].intersects(&fy) {
                        advance(&mut exact, &mut exact_at, j, &w.r);
                        if exact == th.points[i] {
                            idx = Some(i);
                            break;
                        }
                    }
                }
            }
            if let Some(i) = idx {
                w.lt.push(th.order[tau][i] == Ordering::Less);
                w.hit.push(i == tau);
                if j < steps {
                    w.r.push(th.above[i]);
                    idx = Some(th.next[i]);
                }
                continue;
            }
            let te = th.enc[tau];
            let lt = if te.hi < fy.lo {
                true
            } else if fy.hi < te.lo {
                false
            } else {
                advance(&mut exact, &mut exact_at, j, &w.r);
                beta.compare(&th.points[tau], &exact)? == Ordering::Less
            };
            w.lt.push(lt);
            w.hit.push(false);
            if j < steps {
                let r = if fy.lo > 0.5 {
                    true
                } else if fy.hi < 0.5 {
                    false
                } else {
                    advance(&mut exact, &mut exact_at, j, &w.r);
                    beta.compare(&exact, &half)? == Ordering::Greater
                };
                w.r.push(r);
                fy = if r { bf * (Interval::point(1.0) - fy) } else { bf * fy };
                fy = Interval::new(fy.lo.max(unit.lo), fy.hi.min(unit.hi));
            }
        }
        Ok(w)
    }
}

/// One-off `Λ(y)` with enclosure width at most about `eps`.
pub fn left_mass(
    beta: &AlgebraicParameter,
    orbit: &CriticalOrbitData,
    y: &AlgebraicPoint,
    eps: f64,
    growth: Option<f64>,
) -> Result<Interval, PreimageError> {
    let model = MassModel::new(beta, orbit, growth, 0.45 * eps, DEFAULT_KERNEL_LEN)?;
    Ok(model.left_mass(y, 0.25 * eps)?)
}

/// One-off total inserted length.
pub fn total_length(
    beta: &AlgebraicParameter,
    orbit: &CriticalOrbitData,
    eps: f64,
    growth: Option<f64>,
) -> Result<Interval, PreimageError> {
    let model = MassModel::new(beta, orbit, growth, 0.9 * eps, DEFAULT_KERNEL_LEN)?;
    Ok(model.total_length())
}

