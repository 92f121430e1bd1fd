//! Experiment harness: the non-abelian Duistermaat–Heckman measures of a model
//! space, and numerical checks of the density identities
//!
//! * `rho_chamber(c) = vol(O_c) * rho_big(nu_big(xi))` for `xi` over `c`, and
//! * `rho_big` is constant along the Gelfand–Cetlin fibers and along the
//!   interior directions of one orbit level.
//!
//! Quotient volumes are never computed directly; they only appear as the
//! common value of `rho_big` over an orbit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::liegc::{fiber_element, gc_map, haar_element, is_sreg, orbit_volume, sweep, GroupKind, LiePoint};
use crate::measure::{densities_at, push_forward, sharded, DensityEstimate, Grid, PointDensity, Sampling};
use crate::rng::SampleStream;
use crate::spaces::{Point, SpaceModel};
use crate::{ChamberPointF64, LiePointF64};

/// Seed of the unitary stream used to lift `un` chamber points.
const LIFT_SEED: u64 = 0x11f7_5eed;
/// Number of conjugates searched for a well-centred `un` lift.
const LIFT_CANDIDATES: u64 = 256;
/// Offset between the two independent runs of a fiber-constancy row.
const FIBER_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;
/// Height of the lifted `su2` test point as a fraction of its radius.
const SU2_LIFT_HEIGHT: f64 = 0.3;
/// Interior heights compared along one `su2` orbit level.
const SU2_INT_FRACTIONS: [f64; 3] = [-0.4, 0.0, 0.4];
/// Number of extra lifts compared along one `un` orbit level.
const UN_EXTRA_LIFTS: usize = 2;

/// `gc_map` of the moment, as a point of `R^b`.
pub fn big_map(space: &SpaceModel) -> impl Fn(&Point) -> Result<Vec<f64>> + Sync + '_ {
    move |p| Ok(gc_map(&space.moment(p)?)?.concat())
}

/// Chamber coordinates of the moment.
pub fn chamber_map(space: &SpaceModel) -> impl Fn(&Point) -> Result<Vec<f64>> + Sync + '_ {
    move |p| Ok(sweep(&space.moment(p)?)?.coords().to_vec())
}

/// Interior Gelfand–Cetlin coordinates of the moment.
pub fn int_map(space: &SpaceModel) -> impl Fn(&Point) -> Result<Vec<f64>> + Sync + '_ {
    move |p| Ok(gc_map(&space.moment(p)?)?.int)
}

fn check_grid_dim(grid: &Grid, want: usize, what: &str) -> Result<()> {
    if grid.dim() != want {
        return Err(Error::invalid(
            "grid",
            format!("{what} lives in dimension {want}, grid has dimension {}", grid.dim()),
        ));
    }
    Ok(())
}

/// Pushforward along `gc_map . moment`.
pub fn dh_big(space: &SpaceModel, grid: &Grid, sampling: Sampling) -> Result<DensityEstimate> {
    check_grid_dim(grid, space.group().b(), "DH_big")?;
    push_forward(space, &big_map(space), grid, sampling)
}

/// Pushforward along `sweep . moment`.
pub fn dh_chamber(space: &SpaceModel, grid: &Grid, sampling: Sampling) -> Result<DensityEstimate> {
    check_grid_dim(grid, space.group().rank(), "the chamber measure")?;
    push_forward(space, &chamber_map(space), grid, sampling)
}

/// Pass rule `|lhs - rhs| <= max(sigma * pooled stderr, relative * |rhs|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerance {
    pub sigma: f64,
    pub relative: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            sigma: 3.0,
            relative: 0.05,
        }
    }
}

impl Tolerance {
    pub fn relative(relative: f64) -> Self {
        Self {
            relative,
            ..Self::default()
        }
    }

    fn accepts(&self, lhs: f64, rhs: f64, pooled: f64) -> bool {
        (lhs - rhs).abs() <= (self.sigma * pooled).max(self.relative * rhs.abs())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationRow {
    pub family: String,
    /// Chamber coordinates of the test point.
    pub chamber: Vec<f64>,
    /// Where the left and right hand sides were evaluated.
    pub lhs_at: Vec<f64>,
    pub rhs_at: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
    pub lhs_hits: u64,
    pub rhs_hits: u64,
    pub low_statistics: bool,
    pub lhs_seed: u64,
    pub rhs_seed: u64,
    pub n_samples: u64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub experiment: String,
    pub space: String,
    pub group: String,
    pub radius: f64,
    pub seed: u64,
    pub n_samples: u64,
    pub tolerance: Tolerance,
    pub rows: Vec<VerificationRow>,
    pub passed: bool,
}

impl VerificationReport {
    fn new(experiment: &str, space: &SpaceModel, radius: f64, sampling: Sampling, tolerance: Tolerance, rows: Vec<VerificationRow>) -> Self {
        let passed = !rows.is_empty() && rows.iter().all(|r| r.passed);
        Self {
            experiment: experiment.to_string(),
            space: space.name().to_string(),
            group: space.group().to_string(),
            radius,
            seed: sampling.seed,
            n_samples: sampling.n,
            tolerance,
            rows,
            passed,
        }
    }

    /// Concatenates the rows of several reports on the same space.
    pub fn combine(experiment: &str, parts: Vec<VerificationReport>) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::invalid("reports", "nothing to combine"))?;
        let mut out = Self {
            experiment: experiment.to_string(),
            space: first.space.clone(),
            group: first.group.clone(),
            radius: first.radius,
            seed: first.seed,
            n_samples: first.n_samples,
            tolerance: first.tolerance,
            rows: Vec::new(),
            passed: true,
        };
        for p in parts {
            out.passed &= p.passed;
            out.rows.extend(p.rows);
        }
        Ok(out)
    }
}

#[allow(clippy::too_many_arguments)]
fn make_row(
    family: &str,
    chamber: &[f64],
    lhs_at: Vec<f64>,
    rhs_at: Vec<f64>,
    lhs: &PointDensity,
    rhs: &PointDensity,
    rhs_factor: f64,
    seeds: (u64, u64),
    n: u64,
    tol: Tolerance,
) -> VerificationRow {
    let rhs_value = rhs_factor * rhs.value;
    let rhs_err = rhs_factor * rhs.stderr;
    let pooled = (lhs.stderr.powi(2) + rhs_err.powi(2)).sqrt();
    let low = lhs.low_statistics || rhs.low_statistics;
    VerificationRow {
        family: family.to_string(),
        chamber: chamber.to_vec(),
        lhs_at,
        rhs_at,
        lhs: lhs.value,
        rhs: rhs_value,
        stderr: pooled,
        lhs_hits: lhs.hits,
        rhs_hits: rhs.hits,
        low_statistics: low,
        lhs_seed: seeds.0,
        rhs_seed: seeds.1,
        n_samples: n,
        passed: !low && tol.accepts(lhs.value, rhs_value, pooled),
    }
}

/// Deterministic s-regular point over a regular chamber point: the `su2`
/// point at height `0.3 r` in the `x1 x3` half-plane, or the conjugate of the
/// diagonal matrix, among draws of a fixed unitary stream, whose
/// Gelfand–Cetlin pattern lies furthest inside its polytope.
pub fn lift_chamber_point(c: &ChamberPointF64) -> Result<LiePointF64> {
    lift_with(c, SU2_LIFT_HEIGHT, 0)
}

fn lift_with(c: &ChamberPointF64, su2_height: f64, skip: usize) -> Result<LiePointF64> {
    if !c.is_regular() {
        return Err(Error::invalid("test point", format!("chamber point {:?} is not regular", c.coords())));
    }
    match c.group().kind() {
        GroupKind::Torus(_) => Ok(c.embed()),
        GroupKind::Su2 => {
            let r = c.coords()[0];
            let h = su2_height * r;
            Ok(LiePoint::Su2([(r * r - h * h).sqrt(), 0.0, h]))
        }
        GroupKind::Un(_) => un_lifts(c, skip + 1)?
            .pop()
            .ok_or_else(|| Error::invalid("test point", "no s-regular lift found")),
    }
}

/// The best-centred conjugate first, then conjugates that keep at least half
/// its margin and are pairwise as far apart as possible in the interior
/// coordinates.
fn un_lifts(c: &ChamberPointF64, count: usize) -> Result<Vec<LiePointF64>> {
    let base = c.embed();
    let mut candidates = Vec::new();
    for i in 0..LIFT_CANDIDATES {
        let g = haar_element(c.group(), &mut SampleStream::new(LIFT_SEED, i))?;
        let xi = base.act(&g);
        if is_sreg(&xi)? {
            candidates.push((gc_margin(&xi)?, gc_map(&xi)?.int, xi));
        }
    }
    let Some(best) = candidates.iter().map(|c| c.0).reduce(f64::max) else {
        return Ok(Vec::new());
    };
    let first = candidates.iter().position(|c| c.0 == best).expect("maximum is attained");
    let mut chosen = vec![candidates.swap_remove(first)];
    candidates.retain(|c| c.0 >= 0.5 * best);
    while chosen.len() < count && !candidates.is_empty() {
        let spread = |int: &[f64]| {
            chosen
                .iter()
                .map(|(_, other, _)| int.iter().zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min)
        };
        let mut pick = 0;
        let mut pick_spread = f64::NEG_INFINITY;
        for (k, c) in candidates.iter().enumerate() {
            let d = spread(&c.1);
            if d > pick_spread {
                pick = k;
                pick_spread = d;
            }
        }
        chosen.push(candidates.remove(pick));
    }
    Ok(chosen.into_iter().map(|(_, _, xi)| xi).collect())
}

/// Smallest gap of the Gelfand–Cetlin pattern of `xi`, i.e. how far each
/// coordinate of `gc_map(xi)` can move before leaving its polytope. Infinite
/// for tori.
pub fn gc_margin(xi: &LiePointF64) -> Result<f64> {
    let group = xi.group();
    let v = gc_map(xi)?;
    Ok(match group.kind() {
        GroupKind::Torus(_) => f64::INFINITY,
        GroupKind::Su2 => v.small[0] - v.int[0].abs(),
        GroupKind::Un(_) => {
            let mut margin = f64::INFINITY;
            for w in v.rows(group).windows(2) {
                for (i, &m) in w[1].iter().enumerate() {
                    margin = margin.min(w[0][i] - m).min(m - w[0][i + 1]);
                }
            }
            margin
        }
    })
}

fn check_test_points(space: &SpaceModel, points: &[LiePointF64]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::invalid("points", "at least one test point is required"));
    }
    for xi in points {
        if xi.group() != space.group() {
            return Err(Error::invalid(
                "points",
                format!("test point of {} for a {} space", xi.group(), space.group()),
            ));
        }
        if !is_sreg(xi)? {
            return Err(Error::invalid("points", "test points must be s-regular"));
        }
    }
    Ok(())
}

/// `rho_chamber(sweep xi)` against `vol(O) * rho_big(gc_map xi)`.
pub fn verify_corollary(space: &SpaceModel, points: &[LiePointF64], radius: f64, sampling: Sampling, tol: Tolerance) -> Result<VerificationReport> {
    verify_corollary_with(space, points, radius, sampling, tol, orbit_volume)
}

/// As [`verify_corollary`] with the orbit volume supplied by the caller.
pub fn verify_corollary_with<V>(space: &SpaceModel, points: &[LiePointF64], radius: f64, sampling: Sampling, tol: Tolerance, volume: V) -> Result<VerificationReport>
where
    V: Fn(&ChamberPointF64) -> f64,
{
    check_test_points(space, points)?;
    let chambers: Vec<ChamberPointF64> = points.iter().map(sweep).collect::<Result<_>>()?;
    let chamber_xs: Vec<Vec<f64>> = chambers.iter().map(|c| c.coords().to_vec()).collect();
    let big_xs: Vec<Vec<f64>> = points.iter().map(|xi| gc_map(xi).map(|v| v.concat())).collect::<Result<_>>()?;
    let lhs = densities_at(space, &chamber_map(space), &chamber_xs, radius, sampling)?;
    let rhs = densities_at(space, &big_map(space), &big_xs, radius, sampling)?;
    let rows = (0..points.len())
        .map(|j| {
            make_row(
                "corollary",
                &chamber_xs[j],
                chamber_xs[j].clone(),
                big_xs[j].clone(),
                &lhs[j],
                &rhs[j],
                volume(&chambers[j]),
                (sampling.seed, sampling.seed),
                sampling.n,
                tol,
            )
        })
        .collect();
    Ok(VerificationReport::new("corollary", space, radius, sampling, tol, rows))
}

/// Alternative lifts over the orbit of `xi` with different interior
/// coordinates, as compared by [`verify_main_theorem`].
pub fn level_lifts(xi: &LiePointF64) -> Result<Vec<LiePointF64>> {
    let c = sweep(xi)?;
    let c = &c;
    match xi {
        LiePoint::Torus(_) => Ok(Vec::new()),
        LiePoint::Su2(_) => SU2_INT_FRACTIONS.iter().map(|&f| lift_with(c, f, 0)).collect(),
        LiePoint::Un(_) => Ok(un_lifts(c, UN_EXTRA_LIFTS + 1)?.into_iter().skip(1).collect()),
    }
}

/// Constancy of `rho_big` on Gelfand–Cetlin fibers (independent runs at two
/// points of one fiber) and along the interior directions of one orbit level.
pub fn verify_main_theorem(space: &SpaceModel, points: &[LiePointF64], radius: f64, sampling: Sampling, tol: Tolerance) -> Result<VerificationReport> {
    check_test_points(space, points)?;
    let map = big_map(space);
    let group = space.group();
    let fiber_seed = sampling.seed.wrapping_add(FIBER_SEED_OFFSET);

    let mut rows = Vec::new();
    for (j, xi) in points.iter().enumerate() {
        let c = sweep(xi)?;
        let at_xi = gc_map(xi)?.concat();

        let eta = xi.act(&fiber_element(group, &mut SampleStream::new(sampling.seed, j as u64)));
        let at_eta = gc_map(&eta)?.concat();
        if at_xi.iter().zip(&at_eta).any(|(a, b)| (a - b).abs() > 1e-9) {
            return Err(Error::invalid("fiber", "fiber partner does not share the Gelfand–Cetlin value"));
        }
        let mut targets = vec![at_xi.clone()];
        let lifts = level_lifts(xi)?;
        for l in &lifts {
            targets.push(gc_map(l)?.concat());
        }
        let main = densities_at(space, &map, &targets, radius, sampling)?;
        let partner = densities_at(space, &map, std::slice::from_ref(&at_eta), radius, sampling.with_seed(fiber_seed))?;
        rows.push(make_row(
            "fiber",
            c.coords(),
            at_xi.clone(),
            at_eta,
            &main[0],
            &partner[0],
            1.0,
            (sampling.seed, fiber_seed),
            sampling.n,
            tol,
        ));
        for (k, target) in targets.iter().enumerate().skip(1) {
            rows.push(make_row(
                "interior",
                c.coords(),
                target.clone(),
                at_xi.clone(),
                &main[k],
                &main[0],
                1.0,
                (sampling.seed, sampling.seed),
                sampling.n,
                tol,
            ));
        }
    }
    Ok(VerificationReport::new("main_theorem", space, radius, sampling, tol, rows))
}

/// Where the density claims apply: sampled extents of the two moment images,
/// the s-regular fraction, and a regular-value heuristic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionReport {
    pub space: String,
    pub group: String,
    pub seed: u64,
    pub n_samples: u64,
    pub big_lo: Vec<f64>,
    pub big_hi: Vec<f64>,
    pub chamber_lo: Vec<f64>,
    pub chamber_hi: Vec<f64>,
    pub sreg_fraction: f64,
    pub regular_value_fraction: f64,
    pub hypotheses_met: bool,
    pub note: String,
}

struct RegionTally {
    big_lo: Vec<f64>,
    big_hi: Vec<f64>,
    ch_lo: Vec<f64>,
    ch_hi: Vec<f64>,
    sreg: u64,
    regular: u64,
}

pub fn sreg_region_report(space: &SpaceModel, sampling: Sampling) -> Result<RegionReport> {
    if sampling.n == 0 {
        return Err(Error::invalid("samples", "at least one sample is required"));
    }
    let group = space.group();
    let (b, l) = (group.b(), group.rank());
    let tally = sharded(
        0..sampling.n,
        sampling.threads,
        || RegionTally {
            big_lo: vec![f64::INFINITY; b],
            big_hi: vec![f64::NEG_INFINITY; b],
            ch_lo: vec![f64::INFINITY; l],
            ch_hi: vec![f64::NEG_INFINITY; l],
            sreg: 0,
            regular: 0,
        },
        |t, i| {
            let (m, _) = space.sample_moment(sampling.seed, i)?;
            let big = gc_map(&m)?.concat();
            let ch = sweep(&m)?;
            for k in 0..b {
                t.big_lo[k] = t.big_lo[k].min(big[k]);
                t.big_hi[k] = t.big_hi[k].max(big[k]);
            }
            for k in 0..l {
                t.ch_lo[k] = t.ch_lo[k].min(ch.coords()[k]);
                t.ch_hi[k] = t.ch_hi[k].max(ch.coords()[k]);
            }
            t.sreg += u64::from(is_sreg(&m)?);
            t.regular += u64::from(ch.is_regular());
            Ok(())
        },
        |a, o| {
            for k in 0..b {
                a.big_lo[k] = a.big_lo[k].min(o.big_lo[k]);
                a.big_hi[k] = a.big_hi[k].max(o.big_hi[k]);
            }
            for k in 0..l {
                a.ch_lo[k] = a.ch_lo[k].min(o.ch_lo[k]);
                a.ch_hi[k] = a.ch_hi[k].max(o.ch_hi[k]);
            }
            a.sreg += o.sreg;
            a.regular += o.regular;
        },
    )?;
    let n = sampling.n as f64;
    // the moment map cannot be a submersion anywhere when dim M < dim G
    let dimension_ok = 2 * space.half_dim() >= group.dim();
    let regular_value_fraction = if dimension_ok { tally.regular as f64 / n } else { 0.0 };
    let sreg_fraction = tally.sreg as f64 / n;
    let hypotheses_met = regular_value_fraction > 0.0 && sreg_fraction > 0.0;
    let note = if !dimension_ok {
        format!(
            "theorem hypotheses not met: dim M = {} < dim G = {}, no regular values",
            2 * space.half_dim(),
            group.dim()
        )
    } else if !hypotheses_met {
        "theorem hypotheses not met: no sampled regular s-regular values".to_string()
    } else {
        "ok".to_string()
    };
    Ok(RegionReport {
        space: space.name().to_string(),
        group: group.to_string(),
        seed: sampling.seed,
        n_samples: sampling.n,
        big_lo: tally.big_lo,
        big_hi: tally.big_hi,
        chamber_lo: tally.ch_lo,
        chamber_hi: tally.ch_hi,
        sreg_fraction,
        regular_value_fraction,
        hypotheses_met,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegc::{ChamberPoint, GroupSpec};
    use crate::measure::compare;
    use crate::spaces::{cpn_space, orbit_space, product_space, su2_orbit};

    fn su2_pair() -> SpaceModel {
        product_space(vec![su2_orbit(1.0).unwrap(), su2_orbit(0.5).unwrap()]).unwrap()
    }

    fn su2_points(ts: &[f64]) -> Vec<LiePointF64> {
        ts.iter()
            .map(|&t| lift_chamber_point(&ChamberPoint::new(GroupSpec::su2(), vec![t]).unwrap()).unwrap())
            .collect()
    }

    #[test]
    fn single_un2_orbit_big_measure() {
        let c = ChamberPoint::new(GroupSpec::un(2), vec![1.0, -1.0]).unwrap();
        let space = orbit_space(&c).unwrap();
        // unit-width bins around the fixed invariant part
        let grid = Grid::new(vec![0.5, -1.5, -1.0], vec![1.5, -0.5, 1.0], vec![1, 1, 20]).unwrap();
        let est = dh_big(&space, &grid, Sampling::new(200_000, 1)).unwrap();
        let report = compare(&est, |_| 1.0, 100.0, 0.05);
        assert!(report.passed, "{report:?}");
        assert!(dh_big(&space, &Grid::new(vec![0.0], vec![1.0], vec![2]).unwrap(), Sampling::new(10, 1)).is_err());
    }

    #[test]
    fn single_su2_orbit_measures() {
        let space = su2_orbit(1.0).unwrap();
        let grid = Grid::new(vec![0.5, -1.0], vec![1.5, 1.0], vec![1, 20]).unwrap();
        let est = dh_big(&space, &grid, Sampling::new(100_000, 2)).unwrap();
        assert!(compare(&est, |_| 1.0, 100.0, 0.05).passed);
        let grid = Grid::new(vec![0.0], vec![2.0], vec![9]).unwrap();
        let est = dh_chamber(&space, &grid, Sampling::new(1000, 2)).unwrap();
        let bin = grid.locate(&[1.0]).unwrap();
        assert_eq!(est.counts()[bin], 1000);
    }

    #[test]
    fn cp1_big_equals_chamber() {
        let space = cpn_space(1).unwrap();
        let grid = Grid::new(vec![0.0], vec![1.0], vec![20]).unwrap();
        let s = Sampling::new(50_000, 3);
        let big = dh_big(&space, &grid, s).unwrap();
        let ch = dh_chamber(&space, &grid, s).unwrap();
        assert_eq!(big, ch);
        assert!(compare(&big, |_| 1.0, 100.0, 0.06).passed);
    }

    #[test]
    fn horn_total_mass() {
        let grid = Grid::new(vec![0.5], vec![1.5], vec![50]).unwrap();
        let est = dh_chamber(&su2_pair(), &grid, Sampling::new(200_000, 4)).unwrap();
        assert!((est.total_mass_estimate() - 2.0).abs() < 1e-9);
        assert!(compare(&est, |x| 2.0 * x[0], 100.0, 0.06).passed);
    }

    #[test]
    fn corollary_on_su2_pair() {
        let pts = su2_points(&[0.6, 0.8, 1.0, 1.2, 1.4]);
        let r = verify_corollary(&su2_pair(), &pts, 0.05, Sampling::new(400_000, 5), Tolerance::relative(0.1)).unwrap();
        assert!(r.passed, "{r:#?}");
        let at_one = &r.rows[2];
        assert!((at_one.lhs - 2.0).abs() < 0.1 && (at_one.rhs - 2.0).abs() < 0.1);
    }

    #[test]
    fn corollary_detects_missing_orbit_volume() {
        let pts = su2_points(&[0.8, 1.0, 1.2, 1.4]);
        let r = verify_corollary_with(&su2_pair(), &pts, 0.05, Sampling::new(200_000, 6), Tolerance::relative(0.1), |_| 1.0).unwrap();
        assert!(r.rows.iter().all(|row| !row.passed));
    }

    #[test]
    fn main_theorem_on_su2_pair() {
        let pts = su2_points(&[1.0]);
        let r = verify_main_theorem(&su2_pair(), &pts, 0.05, Sampling::new(400_000, 7), Tolerance::relative(0.1)).unwrap();
        assert!(r.passed, "{r:#?}");
        assert_eq!(r.rows.len(), 1 + SU2_INT_FRACTIONS.len());
        for row in &r.rows {
            assert!((row.lhs - 1.0).abs() < 0.1, "{row:?}");
        }
    }

    #[test]
    fn cp2_abelian_case() {
        let space = cpn_space(2).unwrap();
        let pts = vec![LiePoint::Torus(vec![0.2, 0.3]), LiePoint::Torus(vec![0.5, 0.2])];
        let r = verify_corollary(&space, &pts, 0.05, Sampling::new(200_000, 8), Tolerance::relative(0.1)).unwrap();
        assert!(r.passed);
        for row in &r.rows {
            assert_eq!(row.lhs, row.rhs);
            assert!((row.lhs - 1.0).abs() < 0.1);
        }
    }

    #[test]
    fn rejects_bad_test_points() {
        let space = su2_pair();
        let s = Sampling::new(100, 1);
        assert!(verify_corollary(&space, &[LiePoint::Su2([0.0, 0.0, 1.0])], 0.05, s, Tolerance::default()).is_err());
        assert!(verify_corollary(&space, &[], 0.05, s, Tolerance::default()).is_err());
        assert!(verify_main_theorem(&space, &[LiePoint::Torus(vec![1.0])], 0.05, s, Tolerance::default()).is_err());
    }

    #[test]
    fn low_statistics_rows_fail() {
        let pts = su2_points(&[1.0]);
        let r = verify_corollary(&su2_pair(), &pts, 0.01, Sampling::new(200, 9), Tolerance::relative(0.5)).unwrap();
        assert!(r.rows[0].low_statistics);
        assert!(!r.passed);
    }

    #[test]
    fn lifts_are_sreg_and_over_the_point() {
        for c in [
            ChamberPoint::new(GroupSpec::un(3), vec![2.0, 0.0, -2.0]).unwrap(),
            ChamberPoint::new(GroupSpec::su2(), vec![0.7]).unwrap(),
        ] {
            let xi = lift_chamber_point(&c).unwrap();
            assert!(is_sreg(&xi).unwrap());
            let s = sweep(&xi).unwrap();
            for (a, b) in s.coords().iter().zip(c.coords()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
        assert!(lift_chamber_point(&ChamberPoint::new(GroupSpec::su2(), vec![0.0]).unwrap()).is_err());
    }

    #[test]
    fn region_reports() {
        let r = sreg_region_report(&su2_pair(), Sampling::new(20_000, 10)).unwrap();
        assert!((r.chamber_lo[0] - 0.5).abs() < 0.02 && (r.chamber_hi[0] - 1.5).abs() < 0.02);
        assert_eq!(r.sreg_fraction, 1.0);
        assert!(r.hypotheses_met);

        let r = sreg_region_report(&su2_orbit(1.0).unwrap(), Sampling::new(2_000, 10)).unwrap();
        assert_eq!(r.sreg_fraction, 1.0);
        assert_eq!(r.regular_value_fraction, 0.0);
        assert!(!r.hypotheses_met);
        assert!(r.note.contains("hypotheses not met"));

        let r = sreg_region_report(&cpn_space(2).unwrap(), Sampling::new(20_000, 10)).unwrap();
        for k in 0..2 {
            assert!(r.chamber_lo[k] < 0.01 && r.chamber_hi[k] > 0.99);
        }
    }

    #[test]
    fn margins_and_level_lifts() {
        let xi = LiePoint::Su2([0.8, 0.0, 0.6]);
        assert!((gc_margin(&xi).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(gc_margin(&LiePoint::Torus(vec![0.2, 0.3])).unwrap(), f64::INFINITY);

        let c = ChamberPoint::new(GroupSpec::un(3), vec![2.0, 0.0, -2.0]).unwrap();
        let xi = lift_chamber_point(&c).unwrap();
        let best = gc_margin(&xi).unwrap();
        // the centre of the pattern polytope has margin 1 (rows (1, -1) and 0)
        assert!(best > 0.5 && best <= 1.0 + 1e-9, "{best}");
        let lifts = level_lifts(&xi).unwrap();
        assert_eq!(lifts.len(), UN_EXTRA_LIFTS);
        let ints: Vec<Vec<f64>> = std::iter::once(&xi).chain(&lifts).map(|l| gc_map(l).unwrap().int).collect();
        for (k, l) in lifts.iter().enumerate() {
            assert!(gc_margin(l).unwrap() >= 0.5 * best);
            let s = sweep(l).unwrap();
            assert!((s.coords()[0] - 2.0).abs() < 1e-9);
            for other in &ints[..=k] {
                let d = ints[k + 1].iter().zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(d > 0.1, "lifts should differ in interior coordinates");
            }
        }
    }
}
