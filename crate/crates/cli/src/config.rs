//! Experiment configuration: a flat `key=value` form shared by config files and
//! command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use momentmap::dhlab::Tolerance;
use momentmap::{GroupKind, GroupSpec, Rational};
use num_bigint::BigInt;
use num_traits::Zero;

use crate::CliError;

/// Keys accepted in config files, in canonical output order.
pub const KEYS: [&str; 13] = [
    "target", "group", "space", "orbits", "lambda", "samples", "seed", "bins", "range", "out", "tolerance", "radius",
    "points",
];

pub const DEFAULT_SAMPLES: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    DhBig,
    DhChamber,
    Verify,
    VerifyCorollary,
    VerifyMain,
    CheckStrong,
    GcVolume,
    Region,
}

impl Target {
    pub const ALL: [Target; 8] = [
        Target::DhBig,
        Target::DhChamber,
        Target::Verify,
        Target::VerifyCorollary,
        Target::VerifyMain,
        Target::CheckStrong,
        Target::GcVolume,
        Target::Region,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::DhBig => "dh_big",
            Target::DhChamber => "dh_chamber",
            Target::Verify => "verify",
            Target::VerifyCorollary => "verify_corollary",
            Target::VerifyMain => "verify_main",
            Target::CheckStrong => "check_strong",
            Target::GcVolume => "gc_volume",
            Target::Region => "region",
        }
    }

    fn needs_seed(self) -> bool {
        self != Target::GcVolume
    }

    fn needs_space(self) -> bool {
        !matches!(self, Target::CheckStrong | Target::GcVolume)
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = CliError;

    /// Accepts both `dh_big` and `dh-big` spellings.
    fn from_str(s: &str) -> Result<Self, CliError> {
        let norm = s.trim().replace('-', "_");
        Target::ALL
            .into_iter()
            .find(|t| t.name() == norm)
            .ok_or_else(|| CliError::config("target", format!("unknown target '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceRecipe {
    /// Product of coadjoint orbits through the given chamber points.
    Orbits,
    Cpn(usize),
    Wishart(usize, usize),
}

impl fmt::Display for SpaceRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceRecipe::Orbits => f.write_str("orbits"),
            SpaceRecipe::Cpn(n) => write!(f, "cpn:{n}"),
            SpaceRecipe::Wishart(n, k) => write!(f, "wishart:{n},{k}"),
        }
    }
}

impl FromStr for SpaceRecipe {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        let bad = |why: &str| CliError::config("space", format!("'{s}': {why}"));
        if s == "orbits" {
            return Ok(SpaceRecipe::Orbits);
        }
        if let Some(n) = s.strip_prefix("cpn:") {
            return n.trim().parse().map(SpaceRecipe::Cpn).map_err(|_| bad("expected cpn:N"));
        }
        if let Some(rest) = s.strip_prefix("wishart:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if let [n, k] = parts[..] {
                let n = n.parse().map_err(|_| bad("expected wishart:n,k"))?;
                let k = k.parse().map_err(|_| bad("expected wishart:n,k"))?;
                return Ok(SpaceRecipe::Wishart(n, k));
            }
            return Err(bad("expected wishart:n,k"));
        }
        Err(bad("expected orbits, cpn:N or wishart:n,k"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub target: Target,
    pub group: Option<GroupSpec>,
    pub space: Option<SpaceRecipe>,
    /// Chamber coordinates of each orbit factor.
    pub orbits: Vec<Vec<f64>>,
    /// Exact chamber point for `gc_volume`.
    pub lambda: Vec<Rational>,
    pub samples: u64,
    pub seed: Option<u64>,
    /// Bins per axis; a single entry applies to every axis.
    pub bins: Vec<usize>,
    pub range: Vec<(f64, f64)>,
    pub out: Option<PathBuf>,
    pub tolerance: Option<Tolerance>,
    pub radius: Option<f64>,
    /// Chamber coordinates of the test points.
    pub points: Vec<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn new(target: Target) -> Self {
        Self {
            target,
            group: None,
            space: None,
            orbits: Vec::new(),
            lambda: Vec::new(),
            samples: DEFAULT_SAMPLES,
            seed: None,
            bins: Vec::new(),
            range: Vec::new(),
            out: None,
            tolerance: None,
            radius: None,
            points: Vec::new(),
        }
    }

    /// Builds a config from raw values; unknown keys and malformed values are
    /// reported with the offending key.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, CliError> {
        if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(CliError::config("config", format!("unknown key '{k}'")));
        }
        let target: Target = map
            .get("target")
            .ok_or_else(|| CliError::config("target", "missing experiment target"))?
            .parse()?;
        let mut c = Self::new(target);
        for (key, value) in map {
            let v = value.trim();
            match key.as_str() {
                "target" => {}
                "group" => c.group = Some(v.parse().map_err(|e: momentmap::Error| CliError::config("group", e.to_string()))?),
                "space" => c.space = Some(v.parse()?),
                "orbits" => c.orbits = parse_rows("orbits", v)?,
                "lambda" => {
                    c.lambda = split_list(v).map(|s| parse_rational("lambda", s)).collect::<Result<_, _>>()?;
                }
                "samples" => c.samples = parse_num("samples", v)?,
                "seed" => c.seed = Some(parse_num("seed", v)?),
                "bins" => c.bins = split_list(v).map(|s| parse_num("bins", s)).collect::<Result<_, _>>()?,
                "range" => c.range = parse_range(v)?,
                "out" => c.out = (!v.is_empty()).then(|| PathBuf::from(v)),
                "tolerance" => c.tolerance = Some(parse_tolerance(v)?),
                "radius" => c.radius = Some(parse_num("radius", v)?),
                "points" => c.points = parse_rows("points", v)?,
                _ => unreachable!(),
            }
        }
        c.validate()?;
        Ok(c)
    }

    /// Parses a config file body: `key=value` lines, `#` comments, blank lines.
    pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, CliError> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config("config", format!("line {}: expected key=value", lineno + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(map)
    }

    pub fn from_kv(text: &str) -> Result<Self, CliError> {
        Self::from_map(&Self::parse_kv(text)?)
    }

    /// Canonical `key=value` text; `from_kv(to_kv())` reproduces the config.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        put("target", self.target.to_string());
        if let Some(g) = self.group {
            put("group", g.to_string());
        }
        if let Some(s) = &self.space {
            put("space", s.to_string());
        }
        if !self.orbits.is_empty() {
            put("orbits", format_rows(&self.orbits));
        }
        if !self.lambda.is_empty() {
            put("lambda", join(self.lambda.iter()));
        }
        put("samples", self.samples.to_string());
        if let Some(s) = self.seed {
            put("seed", s.to_string());
        }
        if !self.bins.is_empty() {
            put("bins", join(self.bins.iter()));
        }
        if !self.range.is_empty() {
            put("range", self.range.iter().map(|(a, b)| format!("{a}:{b}")).collect::<Vec<_>>().join(","));
        }
        if let Some(p) = &self.out {
            put("out", p.display().to_string());
        }
        if let Some(t) = self.tolerance {
            put("tolerance", format!("{},{}", t.relative, t.sigma));
        }
        if let Some(r) = self.radius {
            put("radius", r.to_string());
        }
        if !self.points.is_empty() {
            put("points", format_rows(&self.points));
        }
        out
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.target.needs_seed() && self.seed.is_none() {
            return Err(CliError::config("seed", "a seed is required; there is no nondeterministic default"));
        }
        if self.target.needs_seed() && self.samples == 0 {
            return Err(CliError::config("samples", "must be positive"));
        }
        if self.target.needs_space() {
            self.resolved_group()?;
        }
        if matches!(self.target, Target::CheckStrong) && self.group.is_none() {
            return Err(CliError::config("group", "check_strong needs a group"));
        }
        if self.target == Target::GcVolume {
            let g = self.group.ok_or_else(|| CliError::config("group", "gc_volume needs a group"))?;
            if self.lambda.len() != g.rank() {
                return Err(CliError::config(
                    "lambda",
                    format!("{g} needs {} chamber coordinates, got {}", g.rank(), self.lambda.len()),
                ));
            }
        }
        if self.bins.contains(&0) {
            return Err(CliError::config("bins", "bin counts must be positive"));
        }
        if let Some(r) = self.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(CliError::config("radius", "must be positive and finite"));
            }
        }
        if let Some(t) = self.tolerance {
            if !(t.relative >= 0.0 && t.sigma >= 0.0 && t.relative.is_finite() && t.sigma.is_finite()) {
                return Err(CliError::config("tolerance", "must be non-negative and finite"));
            }
        }
        Ok(())
    }

    /// The recipe, defaulting to `orbits` when orbit data is present.
    pub fn resolved_space(&self) -> Result<SpaceRecipe, CliError> {
        match &self.space {
            Some(s) => Ok(s.clone()),
            None if !self.orbits.is_empty() => Ok(SpaceRecipe::Orbits),
            None => Err(CliError::config("space", "no space given (use --space or --orbits)")),
        }
    }

    /// The acting group, inferred from the space when not given.
    pub fn resolved_group(&self) -> Result<GroupSpec, CliError> {
        let implied = match self.resolved_space()? {
            SpaceRecipe::Orbits => {
                if self.orbits.is_empty() {
                    return Err(CliError::config("orbits", "orbit space without orbits"));
                }
                None
            }
            SpaceRecipe::Cpn(n) => Some(GroupSpec::new(GroupKind::Torus(n)).map_err(|e| CliError::config("space", e.to_string()))?),
            SpaceRecipe::Wishart(n, _) => Some(GroupSpec::new(GroupKind::Un(n)).map_err(|e| CliError::config("space", e.to_string()))?),
        };
        match (self.group, implied) {
            (Some(g), Some(i)) if g != i => Err(CliError::config("group", format!("space acts through {i}, not {g}"))),
            (Some(g), _) => Ok(g),
            (None, Some(i)) => Ok(i),
            (None, None) => Err(CliError::config("group", "orbit spaces need --group")),
        }
    }
}

fn join<T: fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn format_rows(rows: &[Vec<f64>]) -> String {
    rows.iter().map(|r| join(r.iter())).collect::<Vec<_>>().join(";")
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_num<T: FromStr>(field: &'static str, s: &str) -> Result<T, CliError> {
    s.trim().parse().map_err(|_| CliError::config(field, format!("cannot parse '{s}'")))
}

/// `a,b;c,d` into rows.
fn parse_rows(field: &'static str, v: &str) -> Result<Vec<Vec<f64>>, CliError> {
    v.split(';')
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(|r| split_list(r).map(|s| parse_num::<f64>(field, s)).collect::<Result<Vec<_>, _>>())
        .collect()
}

fn parse_range(v: &str) -> Result<Vec<(f64, f64)>, CliError> {
    split_list(v)
        .map(|axis| {
            let (a, b) = axis
                .split_once(':')
                .ok_or_else(|| CliError::config("range", format!("'{axis}': expected lo:hi")))?;
            Ok((parse_num("range", a)?, parse_num("range", b)?))
        })
        .collect()
}

/// `relative` or `relative,sigma`.
fn parse_tolerance(v: &str) -> Result<Tolerance, CliError> {
    let parts: Vec<&str> = split_list(v).collect();
    match parts[..] {
        [r] => Ok(Tolerance::relative(parse_num("tolerance", r)?)),
        [r, s] => Ok(Tolerance {
            relative: parse_num("tolerance", r)?,
            sigma: parse_num("tolerance", s)?,
        }),
        _ => Err(CliError::config("tolerance", format!("'{v}': expected relative[,sigma]"))),
    }
}

/// Exact parse of `-12`, `0.25`, `3/4` or `1.5e-3`.
pub fn parse_rational(field: &'static str, s: &str) -> Result<Rational, CliError> {
    let bad = || CliError::config(field, format!("'{s}' is not a rational number"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("0{int}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    let mut r = if scale >= 0 {
        Rational::from_integer(all * pow)
    } else {
        Rational::new(all, pow)
    };
    if neg {
        r = -r;
    }
    Ok(r)
}
