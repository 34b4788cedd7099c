//! Run configuration: β selection, depth and tolerance, output locations.
//!
//! Values come from command-line flags, then an optional flat `key = value`
//! file whose keys mirror the long flag names, then defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use denjoy_core::tent_core::DEFAULT_MAX_ITER;
use denjoy_core::{AlgebraicParameter, Catalog};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DENJOY_OUT_DIR";

pub const DEFAULT_DEPTH: usize = 12;
pub const DEFAULT_EPS: f64 = 1e-6;
pub const DEFAULT_SEED: u64 = 0x5eed_d3a1;
pub const DEFAULT_SAMPLES: usize = 2048;
/// Deepest materialized level accepted by `build`.
pub const MAX_DEPTH: usize = 18;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Syntax { path: PathBuf, line: usize, msg: String },
}

fn usage(msg: impl Into<String>) -> ConfigError {
    ConfigError::Usage(msg.into())
}

/// How β is given.
#[derive(Clone, Debug, PartialEq)]
pub enum BetaSpec {
    Catalog(Catalog),
    /// Integer minimal polynomial, leading coefficient first, and an
    /// isolating interval.
    Poly { coeffs: Vec<i64>, isolate: (BigRational, BigRational) },
}

impl BetaSpec {
    pub fn parameter(&self) -> Result<AlgebraicParameter, ConfigError> {
        match self {
            BetaSpec::Catalog(c) => Ok(c.parameter()),
            BetaSpec::Poly { coeffs, isolate } => {
                let poly = coeffs.iter().map(|&c| BigInt::from(c)).collect();
                AlgebraicParameter::new(poly, isolate.0.clone(), isolate.1.clone())
                    .map_err(|e| usage(format!("invalid beta: {e}")))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            BetaSpec::Catalog(c) => c.name().to_string(),
            BetaSpec::Poly { coeffs, isolate } => {
                let c: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                format!("poly[{}] in ({}, {})", c.join(","), isolate.0, isolate.1)
            }
        }
    }
}

/// Parses `a/b`, an integer or a finite decimal exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, ConfigError> {
    let s = s.trim();
    let bad = || usage(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let q = BigRational::new(num, den);
    Ok(if neg { -q } else { q })
}

/// Parses `1,0,-2`.
pub fn parse_poly(s: &str) -> Result<Vec<i64>, ConfigError> {
    let coeffs = s
        .split(',')
        .map(|c| c.trim().parse::<i64>().map_err(|_| usage(format!("bad polynomial coefficient {c:?} in {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if coeffs.len() < 2 {
        return Err(usage("--beta-poly needs at least two coefficients"));
    }
    Ok(coeffs)
}

/// Settings as given, before defaults are applied.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub beta: Option<String>,
    pub beta_poly: Option<String>,
    pub isolate: Option<(String, String)>,
    pub depth: Option<usize>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub max_iter: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    /// Fills unset fields from `other`.
    pub fn or(self, other: Overrides) -> Overrides {
        let poly_given = self.beta.is_some() || self.beta_poly.is_some();
        Overrides {
            beta: if poly_given { self.beta } else { other.beta },
            beta_poly: if poly_given { self.beta_poly } else { other.beta_poly },
            isolate: if poly_given { self.isolate } else { other.isolate },
            depth: self.depth.or(other.depth),
            eps: self.eps.or(other.eps),
            seed: self.seed.or(other.seed),
            samples: self.samples.or(other.samples),
            max_iter: self.max_iter.or(other.max_iter),
            out_dir: self.out_dir.or(other.out_dir),
        }
    }

    /// Reads a flat `key = value` file. Blank lines and `#` comments are skipped.
    pub fn from_file(path: &Path) -> Result<Overrides, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Overrides::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Overrides, ConfigError> {
        let mut seen = BTreeMap::new();
        let mut o = Overrides::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ConfigError::Syntax { path: path.to_path_buf(), line: i + 1, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let key = key.trim().replace('_', "-");
            let value = value.trim();
            if seen.insert(key.clone(), i + 1).is_some() {
                return Err(err(format!("duplicate key {key}")));
            }
            let num = |what: &str| err(format!("{key}: not a valid {what}: {value:?}"));
            match key.as_str() {
                "beta" => o.beta = Some(value.to_string()),
                "beta-poly" => o.beta_poly = Some(value.to_string()),
                "isolate" => {
                    let parts: Vec<&str> = value.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
                    if parts.len() != 2 {
                        return Err(err("isolate needs two endpoints".into()));
                    }
                    o.isolate = Some((parts[0].to_string(), parts[1].to_string()));
                }
                "depth" => o.depth = Some(value.parse().map_err(|_| num("integer"))?),
                "eps" => o.eps = Some(value.parse().map_err(|_| num("number"))?),
                "seed" => o.seed = Some(value.parse().map_err(|_| num("integer"))?),
                "samples" => o.samples = Some(value.parse().map_err(|_| num("integer"))?),
                "max-iter" => o.max_iter = Some(value.parse().map_err(|_| num("integer"))?),
                "out-dir" => o.out_dir = Some(PathBuf::from(value)),
                other => return Err(err(format!("unknown key {other}"))),
            }
        }
        Ok(o)
    }
}

/// Resolved configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub beta: BetaSpec,
    pub depth: usize,
    pub eps: f64,
    pub seed: u64,
    pub samples: usize,
    pub max_iter: usize,
    pub out_dir: PathBuf,
}

impl RunConfig {
    /// Applies defaults; `env_out_dir` is the value of [`OUT_DIR_ENV`], if set.
    pub fn resolve(o: Overrides, env_out_dir: Option<PathBuf>) -> Result<RunConfig, ConfigError> {
        let beta = match (&o.beta, &o.beta_poly) {
            (Some(_), Some(_)) => return Err(usage("give either --beta or --beta-poly, not both")),
            (Some(name), None) => {
                if o.isolate.is_some() {
                    return Err(usage("--isolate only applies to --beta-poly"));
                }
                BetaSpec::Catalog(name.parse::<Catalog>().map_err(usage)?)
            }
            (None, Some(poly)) => {
                let coeffs = parse_poly(poly)?;
                let (lo, hi) = o.isolate.as_ref().ok_or_else(|| usage("--beta-poly needs --isolate LO HI"))?;
                let isolate = (parse_rational(lo)?, parse_rational(hi)?);
                if isolate.0 >= isolate.1 {
                    return Err(usage("--isolate needs LO < HI"));
                }
                BetaSpec::Poly { coeffs, isolate }
            }
            (None, None) => BetaSpec::Catalog(Catalog::Full),
        };
        let eps = o.eps.unwrap_or(DEFAULT_EPS);
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(usage(format!("--eps must be positive, got {eps}")));
        }
        let depth = o.depth.unwrap_or(DEFAULT_DEPTH);
        if depth == 0 {
            return Err(usage("--depth must be at least 1"));
        }
        let samples = o.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples < 2 {
            return Err(usage("--samples must be at least 2"));
        }
        Ok(RunConfig {
            beta,
            depth,
            eps,
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            samples,
            max_iter: o.max_iter.unwrap_or(DEFAULT_MAX_ITER),
            out_dir: o.out_dir.or(env_out_dir).unwrap_or_else(|| PathBuf::from(".")),
        })
    }

    /// `path` if given, else `name` inside the output directory.
    pub fn output_path(&self, path: Option<&Path>, name: &str) -> PathBuf {
        match path {
            Some(p) => p.to_path_buf(),
            None => self.out_dir.join(name),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_rational("1.5").unwrap(), BigRational::new(3.into(), 2.into()));
        assert_eq!(parse_rational("-0.25").unwrap(), BigRational::new((-1).into(), 4.into()));
        assert_eq!(parse_rational("7/3").unwrap(), BigRational::new(7.into(), 3.into()));
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn file_keys_mirror_flags() {
        let text = "# comment\nbeta-poly = 1,0,-2\nisolate = 1 2\ndepth=9\nout_dir = plots\n";
        let o = Overrides::parse(text, Path::new("x.conf")).unwrap();
        let c = RunConfig::resolve(o, None).unwrap();
        assert_eq!(c.depth, 9);
        assert_eq!(c.out_dir, PathBuf::from("plots"));
        assert!(matches!(c.beta, BetaSpec::Poly { .. }));
    }

    #[test]
    fn flags_beat_file() {
        let file = Overrides { beta: Some("golden".into()), depth: Some(5), ..Default::default() };
        let flags = Overrides { beta_poly: Some("1,0,-2".into()), isolate: Some(("1".into(), "2".into())), ..Default::default() };
        let c = RunConfig::resolve(flags.or(file), None).unwrap();
        assert_eq!(c.depth, 5);
        assert!(matches!(c.beta, BetaSpec::Poly { .. }));
    }

    #[test]
    fn env_only_sets_default_dir() {
        let c = RunConfig::resolve(Overrides::default(), Some("env".into())).unwrap();
        assert_eq!(c.out_dir, PathBuf::from("env"));
        let o = Overrides { out_dir: Some("flag".into()), ..Default::default() };
        assert_eq!(RunConfig::resolve(o, Some("env".into())).unwrap().out_dir, PathBuf::from("flag"));
    }

    #[test]
    fn rejects_bad_settings() {
        let both = Overrides { beta: Some("full".into()), beta_poly: Some("1,-2".into()), ..Default::default() };
        assert!(RunConfig::resolve(both, None).is_err());
        let eps = Overrides { eps: Some(0.0), ..Default::default() };
        assert!(RunConfig::resolve(eps, None).is_err());
        assert!(Overrides::parse("bogus = 1", Path::new("c")).is_err());
        assert!(Overrides::parse("depth = 1\ndepth = 2", Path::new("c")).is_err());
    }
}
