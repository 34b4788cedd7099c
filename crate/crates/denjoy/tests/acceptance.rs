//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p denjoy --test acceptance -- --nocapture` to see
//! the table. Every line is asserted except the golden-mean attracting cycle
//! of criterion 10, which does not exist for that slope and is printed as a
//! FAIL (see the README).

use std::cmp::Ordering;
use std::time::Instant;

use denjoy::json::{descriptor_from_str, descriptor_to_string};
use denjoy_core::preimage::{enumerate_tree_capped, tree_count_below, CountTable};
use denjoy_core::surgery::{layout, BranchKind, CubicBranch, SurgeredMapDescriptor};
use denjoy_core::tent_core::{
    critical_orbit, renorm_depth, restrictive_interval, tent_apply, AlgebraicParameter, AlgebraicPoint, Catalog,
    CriticalOrbitData, DEFAULT_MAX_ITER,
};
use denjoy_core::verify::{
    absorption, attractor_location, check_conjugacy, check_growth, check_quotients, check_spectral, hyperbolicity,
    partial_level_sum, quotient_report, CheckReport,
};
use denjoy_core::Interval;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5eed_d3a1;
const DEPTH: usize = 12;

const COUNT_LEVELS: usize = 20;
const TREE_LEVELS: usize = 14;
const COUNT_SECONDS: f64 = 5.0;
const LENGTH_TOL: f64 = 1e-6;
const GOLDEN_SUM_BOUND: f64 = 4.0;
const BRANCHES: usize = 1000;
const BRANCH_TOL: f64 = 1e-12;
const QUOTIENT_DEPTHS: [usize; 8] = [5, 6, 7, 8, 9, 10, 11, 12];
const QUOTIENT_SAMPLES: usize = 100;
const QUOTIENT_TOL: f64 = 1e-3;
const HYPER_SEEDS: usize = 200;
const HYPER_STEPS: usize = 8;
const SPECTRAL_WIDTH: f64 = 1e-8;
const WORD_LEN: usize = 12;
const BASIN_SEEDS: usize = 100;
const BASIN_ITER: usize = 200;
const CONJUGACY_POINTS: usize = 1000;
const THRESHOLDS: usize = 100;

fn eps_for(c: Catalog) -> f64 {
    // β = 2 needs the finer mass stream for the 1e-6 width of criterion 2.
    if c == Catalog::Full {
        1e-6
    } else {
        1e-5
    }
}

struct Line {
    ok: bool,
    text: String,
}

impl Line {
    fn new(ok: bool, text: String) -> Self {
        Line { ok, text }
    }
}

fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.status.passed())
}

fn joined(reports: &[CheckReport]) -> String {
    reports.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("; ")
}

fn pow2(n: usize) -> BigInt {
    BigInt::from(1) << n
}

/// Per-catalog measurements for criteria 6 to 13.
struct Measured {
    cat: Catalog,
    quotients: CheckReport,
    hyper: CheckReport,
    spectral: Vec<CheckReport>,
    growth: CheckReport,
    absorption: Vec<CheckReport>,
    cycle_points: Vec<f64>,
    conjugacy: Vec<CheckReport>,
    round_trip: Result<(), String>,
    count_mismatches: usize,
    count_queries: usize,
    descriptor: SurgeredMapDescriptor,
}

fn setup(c: Catalog) -> (AlgebraicParameter, CriticalOrbitData) {
    let b = c.parameter();
    let o = critical_orbit(&b, DEFAULT_MAX_ITER).unwrap().finite().expect("catalog orbit is finite");
    (b, o)
}

fn round_trip(d: &SurgeredMapDescriptor, seed: u64) -> Result<(), String> {
    let text = descriptor_to_string(d);
    let back = descriptor_from_str(&text, "memory").map_err(|e| e.to_string())?;
    if descriptor_to_string(&back) != text {
        return Err("reserialized text differs".into());
    }
    if back.to_parts() != d.to_parts() {
        return Err("parts differ".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..20 {
        let x: f64 = rng.random_range(0.0..1.0);
        let (a, b) = (d.eval_unit(x).map_err(|e| e.to_string())?, back.eval_unit(x).map_err(|e| e.to_string())?);
        if a != b {
            return Err(format!("eval_unit({x}) differs: {a} vs {b}"));
        }
    }
    Ok(())
}

/// Random threshold in (0, 1) that is irrational whenever β is.
fn random_threshold(beta: &AlgebraicParameter, rng: &mut ChaCha8Rng) -> AlgebraicPoint {
    let r = BigRational::new(rng.random_range(50_000i64..950_000).into(), 1_000_000.into());
    if beta.degree() == 1 {
        return beta.from_rational(r);
    }
    let q = BigRational::new(rng.random_range(-1000i64..=1000).into(), 8000.into());
    let approx = BigRational::from_float(beta.approx()).unwrap();
    let p = r - &q * approx;
    beta.from_rational(p).add(&beta.beta().scale(&q))
}

/// `count_below` against brute-force tree counts, levels `0..=TREE_LEVELS`.
fn count_oracle(beta: &AlgebraicParameter, orbit: &CriticalOrbitData, seed: u64) -> (usize, usize) {
    let tree = enumerate_tree_capped(beta, orbit, TREE_LEVELS, TREE_LEVELS).unwrap();
    let mut table = CountTable::new(beta, orbit).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut thresholds: Vec<AlgebraicPoint> = (0..THRESHOLDS * 4 / 5).map(|_| random_threshold(beta, &mut rng)).collect();
    // Tree points themselves exercise the strict inequality.
    while thresholds.len() < THRESHOLDS {
        let level = rng.random_range(1..=TREE_LEVELS);
        let nodes = &tree[level];
        thresholds.push(nodes[rng.random_range(0..nodes.len())].point.clone());
    }
    let mut bad = 0;
    let mut queries = 0;
    for y in &thresholds {
        for n in 0..=TREE_LEVELS {
            let (_, first) = table.count_below(y, n).unwrap();
            let brute = tree_count_below(beta, &tree, n, y).unwrap();
            queries += 1;
            if first != brute.into() {
                bad += 1;
            }
        }
    }
    (bad, queries)
}

fn measure(cat: Catalog) -> Measured {
    let (b, o) = setup(cat);
    let d = layout(&b, &o, DEPTH, eps_for(cat)).unwrap();
    let q = check_quotients(&d, &QUOTIENT_DEPTHS, QUOTIENT_SAMPLES, SEED).unwrap();
    let quotients = quotient_report(&q, b.approx(), QUOTIENT_TOL);
    let hyper = hyperbolicity(&d, HYPER_SEEDS, HYPER_STEPS, SEED).unwrap();
    let spectral = check_spectral(&b, &o, SPECTRAL_WIDTH).unwrap();
    let growth = check_growth(&b, &o, d.growth(), COUNT_LEVELS).unwrap();
    let abs = absorption(&d, WORD_LEN, BASIN_SEEDS, BASIN_ITER, SEED);
    let cycle_points = abs
        .cycles
        .iter()
        .flat_map(|c| c.records.iter().zip(&c.points).map(|(&r, &xi)| d.record(r).iota_minus.mid() + xi))
        .collect();
    let conjugacy = check_conjugacy(&d, CONJUGACY_POINTS, SEED).unwrap();
    let round_trip = round_trip(&d, SEED);
    let (count_mismatches, count_queries) = count_oracle(&b, &o, SEED);
    Measured {
        cat,
        quotients,
        hyper,
        spectral,
        growth,
        absorption: abs.checks(),
        cycle_points,
        conjugacy,
        round_trip,
        count_mismatches,
        count_queries,
        descriptor: d,
    }
}

fn ac1() -> Line {
    let start = Instant::now();
    let (b, o) = setup(Catalog::Full);
    let tree = enumerate_tree_capped(&b, &o, TREE_LEVELS, TREE_LEVELS).unwrap();
    let mut table = CountTable::new(&b, &o).unwrap();
    let mut bad = Vec::new();
    for n in 2..=COUNT_LEVELS {
        let expect = pow2(n - 2);
        if BigInt::from(table.level_count(n)) != expect {
            bad.push(format!("recursion n={n}"));
        }
        if n <= TREE_LEVELS && BigInt::from(tree[n].len()) != expect {
            bad.push(format!("tree n={n}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Line::new(
        bad.is_empty() && secs < COUNT_SECONDS,
        format!(
            "beta=2 F(n)=2^(n-2), n=2..={COUNT_LEVELS} (tree to {TREE_LEVELS}): mismatches {:?}, {secs:.2}s (limit {COUNT_SECONDS}s)",
            bad
        ),
    )
}

fn ac2(d: &SurgeredMapDescriptor) -> Line {
    let part = partial_level_sum(d, 3).unwrap();
    let sixth = Interval::from_rational(&BigRational::new(1.into(), 6.into()));
    let total = d.total_length();
    let l = Interval::from_rational(&BigRational::new(19.into(), 6.into()));
    let frac = d.cantor_fraction();
    let dev = (frac.lo - 0.24).abs().max((frac.hi - 0.24).abs());
    let ok = part.contains_interval(&sixth)
        && part.width() <= LENGTH_TOL
        && total.contains_interval(&l)
        && dev <= LENGTH_TOL;
    Line::new(
        ok,
        format!(
            "beta=2 sum_(n>=3) F(n)a(n) in {part} (width {:.2e}, tol {LENGTH_TOL:.0e}) ∋ 1/6; L in {total} ∋ 19/6; 1/(1+L) in {frac}, |·-6/25| <= {dev:.2e}",
            part.width()
        ),
    )
}

fn ac3() -> Line {
    let (b, o) = setup(Catalog::Golden);
    let tree = enumerate_tree_capped(&b, &o, 3, 3).unwrap();
    let mut table = CountTable::new(&b, &o).unwrap();
    let f: Vec<BigInt> = (0..=COUNT_LEVELS).map(|n| BigInt::from(table.level_count(n))).collect();
    let first: Vec<usize> = (1..=3).map(|n| tree[n].len()).collect();
    let mut bad = Vec::new();
    if first != [2, 4, 6] || f[1..=3] != [2.into(), 4.into(), 6.into()] {
        bad.push(format!("F(1..3) tree {first:?}"));
    }
    for n in 3..=COUNT_LEVELS {
        if f[n] != &f[n - 1] + &f[n - 2] {
            bad.push(format!("recursion n={n}"));
        }
    }
    // k1 μⁿ + k2 φⁿ fitted to F(1), F(2).
    let s5 = 5f64.sqrt();
    let (phi, mu) = ((1.0 + s5) / 2.0, (1.0 - s5) / 2.0);
    let (f1, f2) = (2.0, 4.0);
    let k2 = (f2 - mu * f1) / (phi * (phi - mu));
    let k1 = (f1 - k2 * phi) / mu;
    for (n, fv) in f.iter().enumerate().skip(1) {
        let closed = k1 * mu.powi(n as i32) + k2 * phi.powi(n as i32);
        if BigInt::from(closed.round() as i64) != *fv {
            bad.push(format!("closed form n={n}"));
        }
    }
    Line::new(
        bad.is_empty(),
        format!(
            "golden F(1..3) = {first:?}, Fibonacci n=3..={COUNT_LEVELS}, closed form k1={k1:.6} k2={k2:.6}: mismatches {bad:?}"
        ),
    )
}

fn ac4(d: &SurgeredMapDescriptor) -> Line {
    let sum = d.mass().level_mass_sum();
    Line::new(sum.hi < GOLDEN_SUM_BOUND, format!("golden sum F(n)a(n) in {sum} < {GOLDEN_SUM_BOUND}"))
}

fn ac5() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_end = 0.0f64;
    let mut interior_bad = 0;
    let mut extremum_bad = 0;
    for i in 0..BRANCHES {
        let beta = rng.random_range(1.05..2.0);
        let u1 = rng.random_range(-2.0..2.0);
        let l1 = rng.random_range(1e-4..1.0);
        let l2 = l1 * beta * rng.random_range(1.0..4.0);
        let u2 = rng.random_range(-2.0..2.0);
        let kind = if i % 2 == 0 { BranchKind::HInc } else { BranchKind::RDec };
        let br = CubicBranch::new(kind, (u1, u1 + l1), (u2, u2 + l2), beta).unwrap();
        let sign = if kind == BranchKind::HInc { 1.0 } else { -1.0 };
        for x in [u1, u1 + l1] {
            worst_end = worst_end.max((br.deriv(x).unwrap() - sign * beta).abs() / beta);
        }
        // The derivative is a downward (upward) parabola for H (R); its
        // extremum is at the midpoint and the endpoints are its minimum (maximum).
        let ext = sign * br.derivative_extremum();
        let mid = sign * br.deriv(u1 + 0.5 * l1).unwrap();
        if ext < beta * (1.0 - BRANCH_TOL) || (ext - mid).abs() > BRANCH_TOL * ext {
            extremum_bad += 1;
        }
        for k in 0..=32 {
            let x = u1 + l1 * k as f64 / 32.0;
            if sign * br.deriv(x).unwrap() < beta * (1.0 - BRANCH_TOL) {
                interior_bad += 1;
            }
        }
    }
    Line::new(
        worst_end <= BRANCH_TOL && interior_bad == 0 && extremum_bad == 0,
        format!(
            "{BRANCHES} random H_INC/R_DEC branches: max rel endpoint error {worst_end:.2e} (tol {BRANCH_TOL:.0e}), interior below beta {interior_bad}, extremum failures {extremum_bad}"
        ),
    )
}

fn per_catalog(ms: &[Measured], pick: impl Fn(&Measured) -> (bool, String)) -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in ms {
        let (o, s) = pick(m);
        ok &= o;
        parts.push(format!("[{}] {s}", m.cat));
    }
    Line::new(ok, parts.join(" "))
}

fn ac11(m: &Measured) -> Line {
    let d = &m.descriptor;
    let b = d.beta();
    let k = renorm_depth(b).unwrap();
    let (lo, hi) = restrictive_interval(b, k).unwrap();
    // f²(J) ⊆ J, checked directly on the exact ends.
    let image = |a: &AlgebraicPoint, z: &AlgebraicPoint| {
        let (fa, fz) = (tent_apply(b, a).unwrap(), tent_apply(b, z).unwrap());
        let (p, q) = if b.compare(&fa, &fz).unwrap() == Ordering::Greater { (fz, fa) } else { (fa, fz) };
        let h = b.half();
        let turns = b.compare(a, &h).unwrap() != Ordering::Greater && b.compare(&h, z).unwrap() != Ordering::Greater;
        if turns {
            (p, tent_apply(b, &h).unwrap())
        } else {
            (p, q)
        }
    };
    let (a1, b1) = image(&lo, &hi);
    let (a2, b2) = image(&a1, &b1);
    let exact = b.compare(&lo, &a2).unwrap() != Ordering::Greater && b.compare(&b2, &hi).unwrap() != Ordering::Greater;
    let at = attractor_location(d).unwrap();
    let checks = at.checks();
    let inside = !m.cycle_points.is_empty()
        && m.cycle_points.iter().all(|&x| at.enclosures.iter().any(|e| e.contains(x)));
    Line::new(
        k == 1 && exact && all_pass(&checks) && inside,
        format!(
            "sqrt2 k={k}, J=[{}, {}] f^2(J) in J exact={exact}; {}; attracting cycle points {:?} inside={inside}",
            lo.to_expr(),
            hi.to_expr(),
            joined(&checks),
            m.cycle_points.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>()
        ),
    )
}

#[test]
fn acceptance() {
    let measured: Vec<Measured> = std::thread::scope(|s| {
        let handles: Vec<_> = Catalog::ALL.iter().map(|&c| s.spawn(move || measure(c))).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let by = |c: Catalog| measured.iter().find(|m| m.cat == c).unwrap();

    let mut lines = vec![
        ac1(),
        ac2(&by(Catalog::Full).descriptor),
        ac3(),
        ac4(&by(Catalog::Golden).descriptor),
        ac5(),
        per_catalog(&measured, |m| (m.quotients.status.passed(), m.quotients.to_string())),
        per_catalog(&measured, |m| (m.hyper.status.passed(), m.hyper.to_string())),
        per_catalog(&measured, |m| (all_pass(&m.spectral), joined(&m.spectral))),
        per_catalog(&measured, |m| (m.growth.status.passed(), m.growth.to_string())),
        per_catalog(&measured, |m| (all_pass(&m.absorption), joined(&m.absorption))),
        ac11(by(Catalog::Sqrt2)),
        per_catalog(&measured, |m| {
            let ok = all_pass(&m.conjugacy) && m.round_trip.is_ok();
            let rt = match &m.round_trip {
                Ok(()) => "save/load lossless".to_string(),
                Err(e) => format!("save/load: {e}"),
            };
            (ok, format!("{}; {rt}", joined(&m.conjugacy)))
        }),
        per_catalog(&measured, |m| {
            (m.count_mismatches == 0, format!("{} mismatches in {} queries", m.count_mismatches, m.count_queries))
        }),
    ];

    println!();
    for (i, l) in lines.iter_mut().enumerate() {
        println!("AC{:<2} {} {}", i + 1, if l.ok { "PASS" } else { "FAIL" }, l.text);
    }
    let failed: Vec<usize> = lines.iter().enumerate().filter(|(_, l)| !l.ok).map(|(i, _)| i + 1).collect();
    println!("acceptance: {} of {} criteria pass", lines.len() - failed.len(), lines.len());

    // Criterion 10 fails only through the golden attracting cycle; every
    // other part of it must still hold.
    for m in &measured {
        for r in &m.absorption {
            let known_gap = m.cat == Catalog::Golden && r.check_name == "attracting_cycle";
            assert!(known_gap || r.status.passed(), "criterion 10 [{}]: {r}", m.cat);
        }
    }
    assert!(failed.iter().all(|&n| n == 10), "failing criteria: {failed:?}");
}
