//! The subcommands. Each writes its human-readable output to `out` and
//! returns whether everything it checked passed.

use std::io::Write;
use std::path::{Path, PathBuf};

use denjoy_core::markov::{build_matrix, build_partition, char_poly, growth_constant, spectral_radius};
use denjoy_core::preimage::{enumerate_tree_capped, CountTable, LengthSchedule, PreimageNode};
use denjoy_core::surgery::{layout_with, LayoutOptions, SurgeredMapDescriptor};
use denjoy_core::tent_core::{core_interval, critical_orbit, renorm_depth, restrictive_interval, tent_apply};
use denjoy_core::verify::{
    absorption, attractor_location, check_conjugacy, check_growth, check_lengths, check_quotients, check_spectral,
    entropy_check, hyperbolicity, quotient_report, simulate_basin, BasinClass, CheckReport,
};
use denjoy_core::{AlgebraicParameter, AlgebraicPoint, Catalog, CriticalOrbitData, OrbitResult};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::config::{ConfigError, RunConfig, MAX_DEPTH};
use crate::json::{self, JsonError, ReportJson};
use crate::svg::{Frame, Svg};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Json(#[from] JsonError),
    #[error("critical orbit of beta = {label} did not close within {max_iter} steps. Slopes with a finite critical orbit are dense in (1, 2] but most slopes are not among them; check the polynomial and interval, or raise --max-iter")]
    NotFinite { label: String, max_iter: usize },
    #[error("{0}")]
    Failed(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

macro_rules! failed_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Failed(e.to_string())
            }
        })*
    };
}

failed_from!(
    denjoy_core::surgery::SurgeryError,
    denjoy_core::verify::VerifyError,
    denjoy_core::preimage::PreimageError,
    denjoy_core::markov::MarkovError,
    denjoy_core::FieldError,
    denjoy_core::tent_core::TentError
);

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Config(ConfigError::Usage(msg.into()))
}

/// β and its critical orbit from the configuration.
pub fn setup(cfg: &RunConfig) -> Result<(AlgebraicParameter, CriticalOrbitData), CliError> {
    let beta = cfg.beta.parameter()?;
    match critical_orbit(&beta, cfg.max_iter)? {
        OrbitResult::Finite(o) => Ok((beta, o)),
        OrbitResult::NotFinite => Err(CliError::NotFinite { label: cfg.beta.label(), max_iter: cfg.max_iter }),
    }
}

pub fn build_descriptor(cfg: &RunConfig) -> Result<SurgeredMapDescriptor, CliError> {
    if cfg.depth > MAX_DEPTH {
        return Err(usage(format!("--depth {} exceeds the cap {MAX_DEPTH}", cfg.depth)));
    }
    let (beta, orbit) = setup(cfg)?;
    let opts = LayoutOptions { depth: cfg.depth, eps: cfg.eps, ..LayoutOptions::default() };
    Ok(layout_with(&beta, &orbit, opts)?)
}

/// Loads `path` if given, otherwise lays the map out from the configuration.
/// An explicit β must agree with a loaded descriptor.
pub fn obtain_descriptor(
    cfg: &RunConfig,
    path: Option<&Path>,
    beta_given: bool,
) -> Result<SurgeredMapDescriptor, CliError> {
    let Some(path) = path else {
        return build_descriptor(cfg);
    };
    let d = json::load_descriptor(path)?;
    if beta_given && !cfg.beta.parameter()?.same_number(d.beta()) {
        return Err(usage(format!("{} was built for a different beta than {}", path.display(), cfg.beta.label())));
    }
    Ok(d)
}

fn beta_name(beta: &AlgebraicParameter) -> String {
    match Catalog::identify(beta) {
        Some(c) => c.name().to_string(),
        None => "custom".to_string(),
    }
}

fn poly_string(beta: &AlgebraicParameter) -> String {
    let p = beta.min_poly();
    let deg = p.len() - 1;
    let mut out = String::new();
    for (i, c) in p.iter().enumerate() {
        let e = deg - i;
        if c == &BigInt::from(0) {
            continue;
        }
        let neg = c < &BigInt::from(0);
        let mag = if neg { -c.clone() } else { c.clone() };
        if out.is_empty() {
            out.push_str(if neg { "-" } else { "" });
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let coeff = if mag == BigInt::from(1) && e > 0 { String::new() } else { mag.to_string() };
        let var = match e {
            0 => String::new(),
            1 => "x".into(),
            _ => format!("x^{e}"),
        };
        out.push_str(&coeff);
        out.push_str(&var);
    }
    out
}

// ---------------------------------------------------------------------------
// analyze

#[derive(Serialize)]
struct PointReport {
    exact: String,
    approx: f64,
}

#[derive(Serialize)]
struct AnalyzeReport {
    beta: String,
    min_poly: String,
    isolate: [String; 2],
    approx: f64,
    orbit: Vec<PointReport>,
    t: usize,
    m: usize,
    renorm_depth: u32,
    core: [PointReport; 2],
    restrictive: Option<[PointReport; 2]>,
}

fn point_report(beta: &AlgebraicParameter, x: &AlgebraicPoint) -> PointReport {
    PointReport { exact: x.to_expr(), approx: beta.to_f64(x) }
}

pub fn analyze(cfg: &RunConfig, as_json: bool, out: &mut dyn Write) -> Result<bool, CliError> {
    let (beta, orbit) = setup(cfg)?;
    let k = renorm_depth(&beta)?;
    let (lo, hi) = core_interval(&beta);
    let restrictive = if k >= 1 {
        let (a, b) = restrictive_interval(&beta, k)?;
        Some([point_report(&beta, &a), point_report(&beta, &b)])
    } else {
        None
    };
    let (ilo, ihi) = beta.isolating_interval();
    let rep = AnalyzeReport {
        beta: beta_name(&beta),
        min_poly: poly_string(&beta),
        isolate: [ilo.to_string(), ihi.to_string()],
        approx: beta.approx(),
        orbit: orbit.points.iter().map(|p| point_report(&beta, p)).collect(),
        t: orbit.preperiod,
        m: orbit.period,
        renorm_depth: k,
        core: [point_report(&beta, &lo), point_report(&beta, &hi)],
        restrictive,
    };
    if as_json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rep).expect("report serializes"))?;
        return Ok(true);
    }
    writeln!(out, "beta      {} ({} on [{}, {}]) = {}", rep.beta, rep.min_poly, ilo, ihi, rep.approx)?;
    writeln!(out, "orbit     t = {}, m = {}", rep.t, rep.m)?;
    for (i, p) in rep.orbit.iter().enumerate() {
        writeln!(out, "  c_{i:<3} {:<28} {}", p.exact, p.approx)?;
    }
    writeln!(out, "renorm    k = {k}")?;
    writeln!(out, "core      [{}, {}] = [{}, {}]", rep.core[0].exact, rep.core[1].exact, rep.core[0].approx, rep.core[1].approx)?;
    if let Some([a, b]) = &rep.restrictive {
        writeln!(out, "J_{k}       [{}, {}] = [{}, {}]", a.exact, b.exact, a.approx, b.approx)?;
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// count

/// Counting table as CSV: `n, F_tree, F_recursion, a_n, cumulative_lo, cumulative_hi`.
pub fn count_csv(cfg: &RunConfig, levels: usize, tree_cap: usize) -> Result<String, CliError> {
    let (beta, orbit) = setup(cfg)?;
    let tree = enumerate_tree_capped(&beta, &orbit, levels.min(tree_cap), tree_cap)?;
    let mut table = CountTable::new(&beta, &orbit)?;
    let schedule = LengthSchedule::new(&beta);
    let mut acc = beta.zero();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "F_tree", "F_recursion", "a_n", "cumulative_lo", "cumulative_hi"])?;
    for n in 1..=levels {
        let f = table.level_count(n);
        let a = schedule.exact(n);
        acc = acc.add(&a.scale(&BigRational::from_integer(BigInt::from(f.clone()))));
        let sum = beta.to_interval(&acc);
        let f_tree = tree.get(n).map(|l| l.len().to_string()).unwrap_or_default();
        w.write_record([
            n.to_string(),
            f_tree,
            f.to_string(),
            beta.to_f64(&a).to_string(),
            sum.lo.to_string(),
            sum.hi.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Failed(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn count(
    cfg: &RunConfig,
    levels: usize,
    tree_cap: usize,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let text = count_csv(cfg, levels, tree_cap)?;
    match path {
        Some(p) => {
            json::write_file(p, &text)?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// build / eval

pub fn build(cfg: &RunConfig, path: Option<&Path>, out: &mut dyn Write) -> Result<bool, CliError> {
    let d = build_descriptor(cfg)?;
    let path = cfg.output_path(path, "descriptor.json");
    json::save_descriptor(&d, &path)?;
    writeln!(out, "beta      {} = {}", beta_name(d.beta()), d.beta().approx())?;
    writeln!(out, "records   {} (levels <= {})", d.records().len(), d.depth())?;
    writeln!(out, "N         {}", d.truncation_depth())?;
    writeln!(out, "L         {}", d.total_length())?;
    writeln!(out, "b         {}", d.unit_scale())?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(true)
}

pub fn eval(
    d: &SurgeredMapDescriptor,
    xs: &[f64],
    raw: bool,
    deriv: bool,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let coord = if raw { "y" } else { "x" };
    if deriv {
        writeln!(out, "{coord},lo,hi,width,deriv_lo,deriv_hi")?;
    } else {
        writeln!(out, "{coord},lo,hi,width")?;
    }
    for &x in xs {
        let v = if raw { d.eval(x)? } else { d.eval_unit(x)? };
        write!(out, "{x},{},{},{}", v.lo, v.hi, v.width())?;
        if deriv {
            let g = if raw { d.deriv(x)? } else { d.deriv_unit(x)? };
            write!(out, ",{},{}", g.lo, g.hi)?;
        }
        writeln!(out)?;
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// verify

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Suite {
    Lengths,
    Quotients,
    Hyperbolicity,
    Absorption,
    Attractor,
    Spectral,
    Growth,
    Entropy,
    Conjugacy,
    All,
}

impl Suite {
    pub const EACH: [Suite; 9] = [
        Suite::Lengths,
        Suite::Quotients,
        Suite::Hyperbolicity,
        Suite::Absorption,
        Suite::Attractor,
        Suite::Spectral,
        Suite::Growth,
        Suite::Entropy,
        Suite::Conjugacy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lengths => "lengths",
            Suite::Quotients => "quotients",
            Suite::Hyperbolicity => "hyperbolicity",
            Suite::Absorption => "absorption",
            Suite::Attractor => "attractor",
            Suite::Spectral => "spectral",
            Suite::Growth => "growth",
            Suite::Entropy => "entropy",
            Suite::Conjugacy => "conjugacy",
            Suite::All => "all",
        }
    }

    fn needs_descriptor(self) -> bool {
        !matches!(self, Suite::Spectral | Suite::Entropy)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub suites: Vec<Suite>,
    pub quotient_samples: usize,
    pub hyper_seeds: usize,
    pub basin_seeds: usize,
    pub conjugacy_points: usize,
    pub json: Option<PathBuf>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            suites: vec![Suite::All],
            quotient_samples: 100,
            hyper_seeds: 200,
            basin_seeds: 100,
            conjugacy_points: 1000,
            json: None,
        }
    }
}

/// Depths at which difference quotients are sampled.
pub const QUOTIENT_DEPTHS: std::ops::RangeInclusive<usize> = 5..=12;
pub const QUOTIENT_TOL: f64 = 1e-3;
pub const ENTROPY_LEVELS: usize = 40;
pub const ENTROPY_TOL: f64 = 1e-3;
pub const GROWTH_LEVELS: usize = 20;
pub const SPECTRAL_WIDTH: f64 = 1e-8;
pub const WORD_LEN: usize = 12;
pub const BASIN_ITER: usize = 200;

fn run_suite(
    suite: Suite,
    cfg: &RunConfig,
    d: Option<&SurgeredMapDescriptor>,
    opts: &VerifyOptions,
) -> Result<Vec<CheckReport>, CliError> {
    let need = || d.ok_or_else(|| CliError::Failed("descriptor missing".into()));
    let seed = cfg.seed;
    Ok(match suite {
        Suite::Lengths => check_lengths(need()?)?,
        Suite::Quotients => {
            let d = need()?;
            let depths: Vec<usize> = QUOTIENT_DEPTHS.collect();
            let samples = check_quotients(d, &depths, opts.quotient_samples, seed)?;
            vec![quotient_report(&samples, d.beta().approx(), QUOTIENT_TOL)]
        }
        Suite::Hyperbolicity => vec![hyperbolicity(need()?, opts.hyper_seeds, 8, seed)?],
        Suite::Absorption => absorption(need()?, WORD_LEN, opts.basin_seeds, BASIN_ITER, seed).checks(),
        Suite::Attractor => attractor_location(need()?)?.checks(),
        Suite::Spectral => {
            let (beta, orbit) = setup(cfg)?;
            check_spectral(&beta, &orbit, SPECTRAL_WIDTH)?
        }
        Suite::Growth => {
            let d = need()?;
            vec![check_growth(d.beta(), d.orbit(), d.growth(), GROWTH_LEVELS)?]
        }
        Suite::Entropy => {
            let (beta, orbit) = setup(cfg)?;
            entropy_check(&beta, &orbit, ENTROPY_LEVELS)?.checks(ENTROPY_TOL)
        }
        Suite::Conjugacy => check_conjugacy(need()?, opts.conjugacy_points, seed)?,
        Suite::All => unreachable!("expanded before dispatch"),
    })
}

/// Runs the selected suites; the result is `false` if any check failed.
pub fn verify(
    cfg: &RunConfig,
    descriptor: Option<SurgeredMapDescriptor>,
    opts: &VerifyOptions,
    out: &mut dyn Write,
) -> Result<(bool, Vec<ReportJson>), CliError> {
    let mut suites: Vec<Suite> = if opts.suites.contains(&Suite::All) {
        Suite::EACH.to_vec()
    } else {
        opts.suites.clone()
    };
    suites.sort();
    suites.dedup();
    let d = match descriptor {
        Some(d) => Some(d),
        None if suites.iter().any(|s| s.needs_descriptor()) => Some(build_descriptor(cfg)?),
        None => None,
    };
    let mut all_ok = true;
    let mut reports = Vec::new();
    for suite in suites {
        for r in run_suite(suite, cfg, d.as_ref(), opts)? {
            writeln!(out, "{:<14} {r}", suite.name())?;
            all_ok &= r.status.passed();
            reports.push(ReportJson::new(suite.name(), &r));
        }
    }
    if let Some(path) = &opts.json {
        json::write_file(path, &json::reports_to_string(&reports))?;
    }
    let failed = reports.iter().filter(|r| r.status == "FAIL").count();
    writeln!(out, "{} checks, {} failed", reports.len(), failed)?;
    Ok((all_ok, reports))
}

// ---------------------------------------------------------------------------
// plot

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    Map,
    Tree,
    Lengths,
    Basin,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Map => "map",
            PlotKind::Tree => "tree",
            PlotKind::Lengths => "lengths",
            PlotKind::Basin => "basin",
        }
    }
}

/// SVG and its backing CSV.
pub struct Plot {
    pub svg: String,
    pub csv: String,
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Failed(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Graph of `g̃_β` at `samples` equally spaced points of [0, 1].
pub fn plot_map(d: &SurgeredMapDescriptor, samples: usize) -> Result<Plot, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "lo", "hi"])?;
    let f = Frame::new(0.0, 1.0, 0.0, 1.0);
    let mut pts = Vec::with_capacity(samples);
    for i in 0..samples {
        let x = i as f64 / (samples - 1) as f64;
        let v = d.eval_unit(x)?;
        w.write_record([x.to_string(), v.lo.to_string(), v.hi.to_string()])?;
        pts.push((f.px(x), f.py(v.mid())));
    }
    let mut svg = Svg::new();
    svg.axes(&f, &format!("g on [0,1], beta = {}", beta_name(d.beta())));
    svg.line((f.px(0.0), f.py(0.0)), (f.px(1.0), f.py(1.0)), "#bbb", 0.5);
    svg.polyline(&pts, "#1f4e9c", 1.0);
    Ok(Plot { svg: svg.finish(), csv: finish_csv(w)? })
}

/// Preimage tree of `c_t` to `depth` levels, nodes at (value, level).
pub fn plot_tree(beta: &AlgebraicParameter, orbit: &CriticalOrbitData, depth: usize) -> Result<Plot, CliError> {
    let levels = enumerate_tree_capped(beta, orbit, depth, depth.max(1))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["level", "x", "parent_x", "word", "on_orbit"])?;
    let f = Frame::new(0.0, 1.0, 0.0, depth as f64);
    let mut svg = Svg::new();
    svg.axes(&f, &format!("preimages of c_t, beta = {}", beta_name(beta)));
    let parent_of = |n: &PreimageNode| -> Result<Option<f64>, CliError> {
        if n.level == 0 {
            return Ok(None);
        }
        let fx = tent_apply(beta, &n.point)?;
        Ok(levels[n.level - 1].iter().find(|p| p.point == fx).map(|p| beta.to_f64(&p.point)))
    };
    for level in &levels {
        for n in level {
            let x = beta.to_f64(&n.point);
            let parent = parent_of(n)?;
            if let Some(px) = parent {
                svg.line((f.px(x), f.py(n.level as f64)), (f.px(px), f.py(n.level as f64 - 1.0)), "#999", 0.5);
            }
            w.write_record([
                n.level.to_string(),
                x.to_string(),
                parent.map(|p| p.to_string()).unwrap_or_default(),
                n.word.to_string(),
                n.on_orbit.to_string(),
            ])?;
        }
    }
    for level in &levels {
        for n in level {
            let fill = if n.on_orbit { "#c0392b" } else { "#1f4e9c" };
            svg.circle((f.px(beta.to_f64(&n.point)), f.py(n.level as f64)), 2.0, fill);
        }
    }
    Ok(Plot { svg: svg.finish(), csv: finish_csv(w)? })
}

/// `Λ(x)`, the length inserted below x, at `samples` points of [0, 1].
pub fn plot_lengths(d: &SurgeredMapDescriptor, samples: usize) -> Result<Plot, CliError> {
    let beta = d.beta();
    let total = d.total_length();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "lambda_lo", "lambda_hi"])?;
    let f = Frame::new(0.0, 1.0, 0.0, total.hi);
    let mut pts = Vec::with_capacity(samples);
    let den = (samples - 1) as i64;
    for i in 0..samples {
        let x = beta.rational(i as i64, den);
        let lam = d.left_mass(&x)?;
        let xf = i as f64 / den as f64;
        w.write_record([xf.to_string(), lam.lo.to_string(), lam.hi.to_string()])?;
        pts.push((f.px(xf), f.py(lam.mid())));
    }
    let mut svg = Svg::new();
    svg.axes(&f, &format!("inserted length below x, beta = {}", beta_name(beta)));
    svg.polyline(&pts, "#1f4e9c", 1.0);
    Ok(Plot { svg: svg.finish(), csv: finish_csv(w)? })
}

/// Seeds on a grid over `[0, b]`, placed by the steps they need to enter
/// the orbit cycle.
pub fn plot_basin(d: &SurgeredMapDescriptor, seeds: usize) -> Result<Plot, CliError> {
    let b = d.unit_scale();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["y0", "class", "entry_steps", "iterations", "period", "multiplier"])?;
    let mut rows = Vec::with_capacity(seeds);
    for i in 0..seeds {
        let y0 = (i as f64 + 0.5) / seeds as f64 * b;
        let r = simulate_basin(d, y0, BASIN_ITER)?;
        w.write_record([
            y0.to_string(),
            r.classification.to_string(),
            r.entry_steps.map(|s| s.to_string()).unwrap_or_default(),
            r.iterations.to_string(),
            r.cycle.as_ref().map(|c| c.period.to_string()).unwrap_or_default(),
            r.cycle.as_ref().map(|c| c.multiplier.to_string()).unwrap_or_default(),
        ])?;
        rows.push((y0 / b, r.entry_steps.unwrap_or(r.iterations), r.classification));
    }
    let top = rows.iter().map(|r| r.1).max().unwrap_or(1).max(1) as f64;
    let f = Frame::new(0.0, 1.0, 0.0, top);
    let mut svg = Svg::new();
    svg.axes(&f, &format!("steps to the orbit cycle, beta = {}", beta_name(d.beta())));
    for (x, steps, class) in rows {
        let fill = match class {
            BasinClass::PeriodicCycle => "#1f4e9c",
            BasinClass::Cantor => "#000",
            BasinClass::Exceptional => "#c0392b",
            BasinClass::Undecided => "#999",
        };
        svg.circle((f.px(x), f.py(steps as f64)), 2.0, fill);
    }
    Ok(Plot { svg: svg.finish(), csv: finish_csv(w)? })
}

/// Sibling of `path` with the extension replaced by `csv`.
pub fn csv_sibling(path: &Path) -> PathBuf {
    path.with_extension("csv")
}

pub fn write_plot(plot: &Plot, svg_path: &Path, csv_path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    json::write_file(svg_path, &plot.svg)?;
    json::write_file(csv_path, &plot.csv)?;
    writeln!(out, "wrote {}", svg_path.display())?;
    writeln!(out, "wrote {}", csv_path.display())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// markov

pub fn markov(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let (beta, orbit) = setup(cfg)?;
    let partition = build_partition(&beta, &orbit)?;
    let matrix = build_matrix(&partition)?;
    writeln!(out, "partition ({} intervals)", partition.len())?;
    for i in 0..partition.len() {
        let (a, b) = partition.interval(i);
        let (lo, hi) = partition.image_span(i);
        writeln!(
            out,
            "  I_{i:<2} [{}, {}]  ~ [{:.6}, {:.6}]  f(I) = cuts {lo}..{hi}",
            a.to_expr(),
            b.to_expr(),
            beta.to_f64(a),
            beta.to_f64(b)
        )?;
    }
    writeln!(out, "matrix")?;
    for row in &matrix.entries {
        let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        writeln!(out, "  {}", r.join(" "))?;
    }
    let rho = spectral_radius(&matrix.entries, SPECTRAL_WIDTH / 4.0)?;
    writeln!(out, "rho       {} ({:?}, {} iterations)", rho.interval(), rho.method, rho.iterations)?;
    let cp: Vec<String> = char_poly(&matrix.entries).iter().map(|c| c.to_string()).collect();
    writeln!(out, "charpoly  [{}]", cp.join(", "))?;
    let g = growth_constant(&beta, &partition, &matrix, 64)?;
    writeln!(out, "growth    M = {} (scan {}, perron {:?})", g.m, g.scan, g.perron)?;
    Ok(true)
}
