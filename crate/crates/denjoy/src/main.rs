//! `denjoy`: tent maps with finite critical orbit and their Denjoy-type
//! surgery, from the command line.
//!
//! Exit status: 0 when everything checked passed, 1 on a failed check or a
//! runtime error, 2 on a usage error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use denjoy::commands::{self, CliError, PlotKind, Suite, VerifyOptions};
use denjoy::config::{Overrides, RunConfig, OUT_DIR_ENV};

#[derive(Parser, Debug)]
#[command(name = "denjoy", version, about = "Tent maps with finite critical orbit and their Denjoy-type surgery")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Catalog slope: full (beta = 2), golden or sqrt2.
    #[arg(long, global = true)]
    beta: Option<String>,
    /// Minimal polynomial of beta, integer coefficients, leading first (e.g. 1,0,-2).
    #[arg(long = "beta-poly", global = true, allow_hyphen_values = true)]
    beta_poly: Option<String>,
    /// Interval isolating beta among the roots of --beta-poly.
    #[arg(long, global = true, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
    isolate: Option<Vec<String>>,
    /// Deepest level of materialized inserted intervals.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Evaluation tolerance.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Seed for sampled checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sample count for plots.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Step limit when searching for the closing of the critical orbit.
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
    /// Default directory for output files (else $DENJOY_OUT_DIR, else .).
    #[arg(long = "out-dir", global = true)]
    out_dir: Option<PathBuf>,
    /// Flat key = value file with the same keys as the long flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            beta: self.beta.clone(),
            beta_poly: self.beta_poly.clone(),
            isolate: self.isolate.as_ref().map(|v| (v[0].clone(), v[1].clone())),
            depth: self.depth,
            eps: self.eps,
            seed: self.seed,
            samples: self.samples,
            max_iter: self.max_iter,
            out_dir: self.out_dir.clone(),
        }
    }

    fn beta_given(&self) -> bool {
        self.beta.is_some() || self.beta_poly.is_some()
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical orbit, preperiod t, period m, renormalization depth and core.
    ///
    /// Slopes whose critical orbit is finite are dense in (1, 2]; the others
    /// are reported as such.
    Analyze {
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Table of F(n) from the tree and the recursion, a(n) and the running sum of F(n) a(n).
    Count {
        /// Last level n.
        #[arg(long, default_value_t = 20)]
        levels: usize,
        /// Deepest level enumerated as a tree; the tree column is left empty beyond it.
        #[arg(long = "tree-cap", default_value_t = 14)]
        tree_cap: usize,
        /// CSV output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lay out the surgered map and save its descriptor as JSON.
    Build {
        /// Descriptor file (default: <out-dir>/descriptor.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the surgered map on [0, 1] with a certified enclosure.
    Eval {
        /// Points in [0, 1] (repeat or separate by commas).
        #[arg(long = "x", required = true, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        /// Points are coordinates on [0, b] and the unscaled map is evaluated.
        #[arg(long)]
        raw: bool,
        /// Also print a derivative enclosure.
        #[arg(long)]
        deriv: bool,
        /// Load this descriptor instead of building one.
        #[arg(long)]
        descriptor: Option<PathBuf>,
    },
    /// Run verification suites; exit status 1 if any check fails.
    Verify {
        /// Suites to run (comma separated).
        #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
        suite: Vec<Suite>,
        /// Load this descriptor instead of building one.
        #[arg(long)]
        descriptor: Option<PathBuf>,
        /// Write the check results as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Quotient samples per depth.
        #[arg(long = "quotient-samples", default_value_t = 100)]
        quotient_samples: usize,
        /// Endpoint seeds for the hyperbolicity check.
        #[arg(long = "hyper-seeds", default_value_t = 200)]
        hyper_seeds: usize,
        /// Interior seeds for the absorption check.
        #[arg(long = "basin-seeds", default_value_t = 100)]
        basin_seeds: usize,
        /// Random points for the conjugacy check.
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
    /// Write a static SVG plot and the CSV behind it.
    Plot {
        #[arg(long, value_enum)]
        what: PlotKind,
        /// SVG file (default: <out-dir>/<what>.svg); the CSV goes next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV file (default: the SVG path with extension .csv).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Levels of the preimage tree plot.
        #[arg(long = "tree-depth", default_value_t = 7)]
        tree_depth: usize,
        /// Load this descriptor instead of building one.
        #[arg(long)]
        descriptor: Option<PathBuf>,
    },
    /// Markov partition, transition matrix, spectral radius and growth constant.
    Markov,
}

fn config(common: &Common) -> Result<RunConfig, CliError> {
    let mut o = common.overrides();
    if let Some(path) = &common.config {
        o = o.or(Overrides::from_file(path)?);
    }
    let env = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    Ok(RunConfig::resolve(o, env)?)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let cfg = config(&cli.common)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let beta_given = cli.common.beta_given();
    let ok = match cli.command {
        Command::Analyze { json } => commands::analyze(&cfg, json, &mut out)?,
        Command::Count { levels, tree_cap, out: path } => {
            commands::count(&cfg, levels, tree_cap, path.as_deref(), &mut out)?
        }
        Command::Build { out: path } => commands::build(&cfg, path.as_deref(), &mut out)?,
        Command::Eval { x, raw, deriv, descriptor } => {
            let d = commands::obtain_descriptor(&cfg, descriptor.as_deref(), beta_given)?;
            commands::eval(&d, &x, raw, deriv, &mut out)?
        }
        Command::Verify { suite, descriptor, json, quotient_samples, hyper_seeds, basin_seeds, points } => {
            let d = match descriptor.as_deref() {
                Some(p) => Some(commands::obtain_descriptor(&cfg, Some(p), beta_given)?),
                None => None,
            };
            let opts = VerifyOptions {
                suites: suite,
                quotient_samples,
                hyper_seeds,
                basin_seeds,
                conjugacy_points: points,
                json,
            };
            commands::verify(&cfg, d, &opts, &mut out)?.0
        }
        Command::Plot { what, out: path, csv, tree_depth, descriptor } => {
            let svg_path = cfg.output_path(path.as_deref(), &format!("{}.svg", what.name()));
            let csv_path = csv.unwrap_or_else(|| commands::csv_sibling(&svg_path));
            let plot = match what {
                PlotKind::Tree => {
                    let (beta, orbit) = commands::setup(&cfg)?;
                    commands::plot_tree(&beta, &orbit, tree_depth)?
                }
                _ => {
                    let d = commands::obtain_descriptor(&cfg, descriptor.as_deref(), beta_given)?;
                    match what {
                        PlotKind::Map => commands::plot_map(&d, cfg.samples)?,
                        PlotKind::Lengths => commands::plot_lengths(&d, cfg.samples)?,
                        _ => commands::plot_basin(&d, (cfg.samples / 8).max(2))?,
                    }
                }
            };
            commands::write_plot(&plot, &svg_path, &csv_path, &mut out)?;
            true
        }
        Command::Markov => commands::markov(&cfg, &mut out)?,
    };
    out.flush()?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        // Output piped into `head` and similar.
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
