//! Front end for the `mm` binary: flag and config parsing, experiment
//! dispatch, and CSV/JSON artifacts.
//!
//! Exit codes: 0 when the experiment ran (and any verification passed), 2 when
//! a verification failed, 1 for usage, configuration, I/O or numerical errors.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use momentmap::dhlab::{
    dh_big, dh_chamber, gc_margin, level_lifts, lift_chamber_point, sreg_region_report, verify_corollary, verify_main_theorem, RegionReport,
    VerificationReport,
};
use momentmap::liegc::{check_strong_datum, gc_polytope, gc_polytope_volume, sweep};
use momentmap::measure::{Grid, Sampling};
use momentmap::spaces::{cpn_space, orbit_space, product_space, wishart_space, SpaceModel};
use momentmap::{ChamberPoint, ChamberPointExact, GroupSpec, LiePointF64};
use thiserror::Error;

pub use config::{ExperimentConfig, SpaceRecipe, Target};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid {field}: {reason}")]
    Config { field: String, reason: String },
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] momentmap::Error),
}

impl CliError {
    pub fn config(field: &str, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 2,
        }
    }

    fn from_passed(passed: bool) -> Self {
        if passed {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

/// Samples used to pick default ranges, radii and test points.
const SURVEY_SAMPLES: u64 = 100_000;
/// Offset of the stream that picks default test points.
const POINT_SEED_OFFSET: u64 = 0x5eed_7e57_0f00;
const DEFAULT_POINTS: usize = 6;
/// Shrink factor towards the centroid for default test points.
const POINT_SHRINK: f64 = 0.6;
/// Default box radius as a fraction of the largest chamber extent.
const RADIUS_FRACTION: f64 = 0.05;
/// Largest box radius as a fraction of the distance to the nearest boundary.
const MARGIN_FRACTION: f64 = 0.25;
/// Default range padding as a fraction of the sampled extent.
const RANGE_PAD: f64 = 0.02;
/// Default target for the total bin count.
const DEFAULT_TOTAL_BINS: f64 = 1e5;
const MAX_BINS_PER_AXIS: usize = 200;

#[derive(Debug, Parser)]
#[command(name = "mm", version, about = "Monte Carlo Duistermaat–Heckman experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand, Clone, Copy)]
pub enum Command {
    /// Pushforward density on the Gelfand–Cetlin codomain (CSV).
    DhBig,
    /// Pushforward density on the Weyl chamber (CSV).
    DhChamber,
    /// Corollary and fiber/interior constancy checks (JSON).
    Verify,
    /// Chamber density against orbit volume times the big density (JSON).
    VerifyCorollary,
    /// Fiber and interior constancy of the big density (JSON).
    VerifyMain,
    /// Structural checks of the Gelfand–Cetlin datum of a group (JSON).
    CheckStrong,
    /// Exact Gelfand–Cetlin polytope volume of the orbit through --lambda.
    GcVolume,
    /// Sampled image extents and s-regular fractions (JSON).
    Region,
}

impl Command {
    fn target(self) -> Target {
        match self {
            Command::DhBig => Target::DhBig,
            Command::DhChamber => Target::DhChamber,
            Command::Verify => Target::Verify,
            Command::VerifyCorollary => Target::VerifyCorollary,
            Command::VerifyMain => Target::VerifyMain,
            Command::CheckStrong => Target::CheckStrong,
            Command::GcVolume => Target::GcVolume,
            Command::Region => Target::Region,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Flags {
    /// key=value config file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// su2, unN or torusK.
    #[arg(long, global = true)]
    pub group: Option<String>,
    /// Orbit chamber points: `1,0.5` for su2 radii, `2,0,-2;1,0,-1` for unN.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub orbits: Option<String>,
    /// Chamber point for gc-volume, parsed exactly (`2,0,-2`, `1/3,0`).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// orbits, cpn:N or wishart:n,k.
    #[arg(long, global = true)]
    pub space: Option<String>,
    #[arg(long, global = true)]
    pub samples: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Bins per axis, one value or one per axis.
    #[arg(long, global = true)]
    pub bins: Option<String>,
    /// Histogram range `lo:hi,lo:hi,...`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub range: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "MM_THREADS")]
    pub threads: Option<usize>,
    /// Output file (CSV or JSON); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Relative tolerance, optionally followed by a sigma multiplier.
    #[arg(long, global = true)]
    pub tolerance: Option<String>,
    /// Half-width of the density boxes around test points.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub radius: Option<String>,
    /// Chamber test points, `;`-separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub points: Option<String>,
}

impl Flags {
    fn entries(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("group", &self.group),
            ("orbits", &self.orbits),
            ("lambda", &self.lambda),
            ("space", &self.space),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("bins", &self.bins),
            ("range", &self.range),
            ("out", &self.out),
            ("tolerance", &self.tolerance),
            ("radius", &self.radius),
            ("points", &self.points),
        ]
    }
}

/// Merges config file and flags (flags win) into a validated config.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut map = match &cli.flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::parse_kv(&text)?
        }
        None => BTreeMap::new(),
    };
    map.insert("target".to_string(), cli.command.target().name().to_string());
    for (key, value) in cli.flags.entries() {
        if let Some(v) = value {
            map.insert(key.to_string(), v.clone());
        }
    }
    ExperimentConfig::from_map(&map)
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code. Normal output goes to `stdout`, diagnostics to `stderr`.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let result = resolve_config(&cli).and_then(|config| {
        let threads = cli.flags.threads.unwrap_or_else(default_threads);
        if threads == 0 {
            return Err(CliError::config("threads", "must be positive"));
        }
        run(&config, threads, stdout)
    });
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

/// Runs one experiment, writing its artifact to `config.out` or `stdout`.
pub fn run(config: &ExperimentConfig, threads: usize, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    config.validate()?;
    match config.target {
        Target::GcVolume => run_gc_volume(config, stdout),
        Target::CheckStrong => {
            let group = config.group.ok_or_else(|| CliError::config("group", "missing"))?;
            let n = usize::try_from(config.samples).map_err(|_| CliError::config("samples", "too large"))?;
            let report = check_strong_datum(group, seed(config)?, n)?;
            emit_json(config, &report, stdout)?;
            Ok(Outcome::from_passed(report.passed))
        }
        Target::Region => {
            let space = build_space(config)?;
            let report = sreg_region_report(&space, sampling(config, threads)?)?;
            emit_json(config, &report, stdout)?;
            Ok(Outcome::Pass)
        }
        Target::DhBig | Target::DhChamber => run_density(config, threads, stdout),
        Target::Verify | Target::VerifyCorollary | Target::VerifyMain => run_verify(config, threads, stdout),
    }
}

fn seed(config: &ExperimentConfig) -> Result<u64, CliError> {
    config.seed.ok_or_else(|| CliError::config("seed", "missing"))
}

fn sampling(config: &ExperimentConfig, threads: usize) -> Result<Sampling, CliError> {
    Ok(Sampling::new(config.samples, seed(config)?).with_threads(threads))
}

fn run_gc_volume(config: &ExperimentConfig, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let group = config.group.ok_or_else(|| CliError::config("group", "missing"))?;
    let c: ChamberPointExact =
        ChamberPoint::new(group, config.lambda.clone()).map_err(|e| CliError::config("lambda", e.to_string()))?;
    let volume = gc_polytope_volume(&gc_polytope(&c));
    let text = format!("{volume}\n");
    match &config.out {
        Some(path) => output::write_file(path, |w| w.write_all(text.as_bytes()))?,
        None => stdout.write_all(text.as_bytes()).map_err(stdout_err)?,
    }
    Ok(Outcome::Pass)
}

fn stdout_err(source: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn emit_json<T: serde::Serialize>(config: &ExperimentConfig, value: &T, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = output::to_json(value);
    match &config.out {
        Some(path) => output::write_file(path, |w| w.write_all(text.as_bytes())),
        None => stdout.write_all(text.as_bytes()).map_err(stdout_err),
    }
}

/// Rows of chamber coordinates, with `su2` radii accepted as one flat list.
fn chamber_rows(group: GroupSpec, rows: &[Vec<f64>], field: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let l = group.rank();
    if rows.iter().all(|r| r.len() == l) {
        return Ok(rows.to_vec());
    }
    if l == 1 {
        return Ok(rows.iter().flatten().map(|&x| vec![x]).collect());
    }
    Err(CliError::config(field, format!("each entry of {group} needs {l} coordinates separated by ','; entries are separated by ';'")))
}

pub fn build_space(config: &ExperimentConfig) -> Result<SpaceModel, CliError> {
    let group = config.resolved_group()?;
    let space = match config.resolved_space()? {
        SpaceRecipe::Orbits => {
            let mut factors = Vec::new();
            for row in chamber_rows(group, &config.orbits, "orbits")? {
                let c = ChamberPoint::new(group, row).map_err(|e| CliError::config("orbits", e.to_string()))?;
                factors.push(orbit_space(&c).map_err(|e| CliError::config("orbits", e.to_string()))?);
            }
            if factors.len() == 1 {
                factors.pop().expect("one factor")
            } else {
                product_space(factors)?
            }
        }
        SpaceRecipe::Cpn(n) => cpn_space(n)?,
        SpaceRecipe::Wishart(n, k) => wishart_space(n, k)?,
    };
    Ok(space)
}

fn survey(space: &SpaceModel, config: &ExperimentConfig, threads: usize) -> Result<RegionReport, CliError> {
    let n = config.samples.min(SURVEY_SAMPLES);
    Ok(sreg_region_report(space, Sampling::new(n, seed(config)?).with_threads(threads))?)
}

fn default_bins(dim: usize) -> usize {
    (DEFAULT_TOTAL_BINS.powf(1.0 / dim as f64).round() as usize).clamp(2, MAX_BINS_PER_AXIS)
}

fn padded(lo: &[f64], hi: &[f64]) -> Vec<(f64, f64)> {
    lo.iter()
        .zip(hi)
        .map(|(&a, &b)| {
            let pad = if b > a { RANGE_PAD * (b - a) } else { 0.5 };
            (a - pad, b + pad)
        })
        .collect()
}

fn build_grid(config: &ExperimentConfig, space: &SpaceModel, threads: usize) -> Result<Grid, CliError> {
    let big = config.target == Target::DhBig;
    let dim = if big { space.group().b() } else { space.group().rank() };
    let range = if config.range.is_empty() {
        let r = survey(space, config, threads)?;
        if big {
            padded(&r.big_lo, &r.big_hi)
        } else {
            padded(&r.chamber_lo, &r.chamber_hi)
        }
    } else {
        config.range.clone()
    };
    if range.len() != dim {
        return Err(CliError::config(
            "range",
            format!("{} needs {dim} axes, got {}", config.target, range.len()),
        ));
    }
    let bins = match config.bins.len() {
        0 => vec![default_bins(dim); dim],
        1 => vec![config.bins[0]; dim],
        k if k == dim => config.bins.clone(),
        k => return Err(CliError::config("bins", format!("{} needs 1 or {dim} values, got {k}", config.target))),
    };
    let (lo, hi) = range.into_iter().unzip();
    Ok(Grid::new(lo, hi, bins)?)
}

fn run_density(config: &ExperimentConfig, threads: usize, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let space = build_space(config)?;
    let grid = build_grid(config, &space, threads)?;
    let sampling = sampling(config, threads)?;
    let est = if config.target == Target::DhBig {
        dh_big(&space, &grid, sampling)?
    } else {
        dh_chamber(&space, &grid, sampling)?
    };
    match &config.out {
        Some(path) => {
            output::emit_plot_data(&est, path)?;
            writeln!(
                stdout,
                "{}: total mass {} +- {}, overflow mass {}",
                path.display(),
                est.total_mass_estimate(),
                est.total_mass_stderr(),
                est.overflow_mass()
            )
            .map_err(stdout_err)?;
        }
        None => output::write_plot_data(stdout, &est).map_err(stdout_err)?,
    }
    Ok(Outcome::Pass)
}

/// Test points: the configured chamber points, or sampled chamber points
/// pulled towards their centroid so that they sit inside the image.
pub fn test_points(config: &ExperimentConfig, space: &SpaceModel) -> Result<Vec<LiePointF64>, CliError> {
    let group = space.group();
    let chambers = if config.points.is_empty() {
        let seed = seed(config)?.wrapping_add(POINT_SEED_OFFSET);
        let mut pts = Vec::new();
        for i in 0..SURVEY_SAMPLES.min(1024) {
            let (m, _) = space.sample_moment(seed, i)?;
            pts.push(sweep(&m)?.coords().to_vec());
        }
        let l = group.rank();
        let centroid: Vec<f64> = (0..l).map(|k| pts.iter().map(|p| p[k]).sum::<f64>() / pts.len() as f64).collect();
        pts.iter()
            .take(DEFAULT_POINTS)
            .map(|p| p.iter().zip(&centroid).map(|(x, c)| c + POINT_SHRINK * (x - c)).collect())
            .collect()
    } else {
        chamber_rows(group, &config.points, "points")?
    };
    chambers
        .into_iter()
        .map(|row| {
            let c = ChamberPoint::new(group, row).map_err(|e| CliError::config("points", e.to_string()))?;
            lift_chamber_point(&c).map_err(|e| CliError::config("points", e.to_string()))
        })
        .collect()
}

/// A fraction of the chamber extent, shrunk so that every density box stays
/// well inside the Gelfand–Cetlin polytope of each test point and its level
/// lifts, and inside the sampled chamber extent.
fn default_radius(region: &RegionReport, points: &[LiePointF64]) -> Result<f64, CliError> {
    let extent = region.chamber_lo.iter().zip(&region.chamber_hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let mut radius = if extent > 0.0 { RADIUS_FRACTION * extent } else { RADIUS_FRACTION };
    for xi in points {
        let mut margin = gc_margin(xi)?;
        for lift in level_lifts(xi)? {
            margin = margin.min(gc_margin(&lift)?);
        }
        let c = sweep(xi)?;
        for (k, &x) in c.coords().iter().enumerate() {
            let inside = (x - region.chamber_lo[k]).min(region.chamber_hi[k] - x);
            if inside > 0.0 {
                margin = margin.min(inside);
            }
        }
        radius = radius.min(MARGIN_FRACTION * margin);
    }
    Ok(radius)
}

fn run_verify(config: &ExperimentConfig, threads: usize, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let space = build_space(config)?;
    let points = test_points(config, &space)?;
    let radius = match config.radius {
        Some(r) => r,
        None => default_radius(&survey(&space, config, threads)?, &points)?,
    };
    let sampling = sampling(config, threads)?;
    let tol = config.tolerance.unwrap_or_default();
    let report = match config.target {
        Target::VerifyCorollary => verify_corollary(&space, &points, radius, sampling, tol)?,
        Target::VerifyMain => verify_main_theorem(&space, &points, radius, sampling, tol)?,
        _ => VerificationReport::combine(
            "verify",
            vec![
                verify_corollary(&space, &points, radius, sampling, tol)?,
                verify_main_theorem(&space, &points, radius, sampling, tol)?,
            ],
        )?,
    };
    emit_json(config, &report, stdout)?;
    if config.out.is_some() {
        let verdict = if report.passed { "pass" } else { "FAIL" };
        writeln!(stdout, "{}: {} rows, {verdict}", report.experiment, report.rows.len()).map_err(stdout_err)?;
    }
    Ok(Outcome::from_passed(report.passed))
}

/// Reads a config file and runs it; convenience for embedding.
pub fn run_file(path: &Path, threads: usize, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
    run(&ExperimentConfig::from_kv(&text)?, threads, stdout)
}
