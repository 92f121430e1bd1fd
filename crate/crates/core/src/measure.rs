//! Monte Carlo pushforward of a space's Liouville measure: binned densities
//! with standard errors, box estimates at single points, and comparison
//! against reference densities.
//!
//! Samples are addressed by `(seed, index)`. Index ranges are cut into fixed
//! shards aligned to multiples of [`SHARD_SIZE`]; shards may run on any number
//! of threads but are always merged in index order, so results do not depend
//! on the thread count.

use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::spaces::{Point, SpaceModel};

pub const SHARD_SIZE: u64 = 4096;
pub const MAX_TOTAL_BINS: usize = 10_000_000;
/// Box estimates with fewer hits than this are flagged.
pub const LOW_STATISTICS_HITS: u64 = 30;

/// Regular rectangular grid on `R^d`. Bins are half-open `[lo, hi)` except
/// that the global upper face is closed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    bins: Vec<usize>,
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, bins: Vec<usize>) -> Result<Self> {
        let d = lo.len();
        if d == 0 {
            return Err(Error::invalid("grid", "dimension must be at least 1"));
        }
        if hi.len() != d || bins.len() != d {
            return Err(Error::invalid("grid", "lo, hi and bins must have the same length"));
        }
        for k in 0..d {
            if !(lo[k].is_finite() && hi[k].is_finite()) {
                return Err(Error::invalid("range", format!("axis {k} has a non-finite bound")));
            }
            if !(lo[k] < hi[k]) {
                return Err(Error::invalid("range", format!("axis {k}: lo {} is not below hi {}", lo[k], hi[k])));
            }
            if bins[k] == 0 {
                return Err(Error::invalid("bins", format!("axis {k} has zero bins")));
            }
        }
        let total = bins.iter().try_fold(1usize, |acc, &b| acc.checked_mul(b));
        match total {
            Some(t) if t <= MAX_TOTAL_BINS => {}
            _ => return Err(Error::invalid("bins", format!("more than {MAX_TOTAL_BINS} bins in total"))),
        }
        let grid = Self { lo, hi, bins };
        if !(grid.bin_volume() > 0.0) {
            return Err(Error::invalid("bins", "bins have zero volume"));
        }
        Ok(grid)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn total_bins(&self) -> usize {
        self.bins.iter().product()
    }

    fn width(&self, k: usize) -> f64 {
        (self.hi[k] - self.lo[k]) / self.bins[k] as f64
    }

    pub fn bin_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.width(k)).product()
    }

    /// Flat bin index of `x` (last axis fastest), or `None` outside the grid.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut idx = 0usize;
        for k in 0..self.dim() {
            let v = x[k];
            if !(v >= self.lo[k] && v <= self.hi[k]) {
                return None;
            }
            let b = if v == self.hi[k] {
                self.bins[k] - 1
            } else {
                (((v - self.lo[k]) / self.width(k)) as usize).min(self.bins[k] - 1)
            };
            idx = idx * self.bins[k] + b;
        }
        Some(idx)
    }

    fn axis_indices(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            out[k] = flat % self.bins[k];
            flat /= self.bins[k];
        }
        out
    }

    pub fn bin_lower(&self, flat: usize) -> Vec<f64> {
        self.axis_indices(flat)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.lo[k] + i as f64 * self.width(k))
            .collect()
    }

    pub fn bin_upper(&self, flat: usize) -> Vec<f64> {
        self.axis_indices(flat)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.lo[k] + (i + 1) as f64 * self.width(k))
            .collect()
    }

    pub fn bin_center(&self, flat: usize) -> Vec<f64> {
        self.axis_indices(flat)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.lo[k] + (i as f64 + 0.5) * self.width(k))
            .collect()
    }

    /// Same box with every bin halved along each axis.
    pub fn refined(&self) -> Result<Grid> {
        Grid::new(self.lo.clone(), self.hi.clone(), self.bins.iter().map(|b| b * 2).collect())
    }
}

/// Sample count, seed and worker count of one experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Sampling {
    pub n: u64,
    pub seed: u64,
    #[serde(skip)]
    pub threads: usize,
}

impl Sampling {
    pub fn new(n: u64, seed: u64) -> Self {
        Self { n, seed, threads: 1 }
    }

    pub fn with_threads(self, threads: usize) -> Self {
        Self {
            threads: threads.max(1),
            ..self
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Runs `fill` over every index of `range`, shard by shard, and merges the
/// shard accumulators in index order.
pub(crate) fn sharded<A, E, F, M>(range: Range<u64>, threads: usize, empty: E, fill: F, merge: M) -> Result<A>
where
    A: Send,
    E: Fn() -> A + Sync,
    F: Fn(&mut A, u64) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    let mut shards = Vec::new();
    let mut start = range.start;
    while start < range.end {
        let end = ((start / SHARD_SIZE + 1) * SHARD_SIZE).min(range.end);
        shards.push(start..end);
        start = end;
    }
    let run = |r: &Range<u64>| -> Result<A> {
        let mut acc = empty();
        for i in r.clone() {
            fill(&mut acc, i)?;
        }
        Ok(acc)
    };

    let mut total = empty();
    if threads <= 1 {
        for r in &shards {
            merge(&mut total, run(r)?);
        }
        return Ok(total);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    for batch in shards.chunks(threads * 8) {
        let parts: Vec<Result<A>> = pool.install(|| batch.par_iter().map(run).collect());
        for part in parts {
            merge(&mut total, part?);
        }
    }
    Ok(total)
}

/// Raw weighted tallies over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub weight: Vec<f64>,
    pub weight_sq: Vec<f64>,
    pub count: Vec<u64>,
    pub overflow_count: u64,
    pub overflow_weight: f64,
    pub samples: u64,
    pub unit_weights: bool,
}

impl Histogram {
    pub fn empty(bins: usize) -> Self {
        Self {
            weight: vec![0.0; bins],
            weight_sq: vec![0.0; bins],
            count: vec![0; bins],
            overflow_count: 0,
            overflow_weight: 0.0,
            samples: 0,
            unit_weights: true,
        }
    }

    /// Tallies samples `range` of `space` pushed along `map`.
    pub fn fill<M>(space: &SpaceModel, map: &M, grid: &Grid, seed: u64, range: Range<u64>, threads: usize) -> Result<Self>
    where
        M: Fn(&Point) -> Result<Vec<f64>> + Sync,
    {
        let bins = grid.total_bins();
        sharded(
            range,
            threads,
            || Histogram::empty(bins),
            |h, i| {
                let (p, w) = space.sample_at(seed, i);
                let y = map(&p)?;
                if y.len() != grid.dim() {
                    return Err(Error::invalid(
                        "map",
                        format!("map returned {} coordinates for a {}-dimensional grid", y.len(), grid.dim()),
                    ));
                }
                h.record(grid.locate(&y), w);
                Ok(())
            },
            |a, b| a.merge(&b),
        )
    }

    fn record(&mut self, bin: Option<usize>, w: f64) {
        self.samples += 1;
        self.unit_weights &= w == 1.0;
        match bin {
            Some(b) => {
                self.weight[b] += w;
                self.weight_sq[b] += w * w;
                self.count[b] += 1;
            }
            None => {
                self.overflow_count += 1;
                self.overflow_weight += w;
            }
        }
    }

    /// Adds `other` into `self`; bin layouts must match.
    pub fn merge(&mut self, other: &Histogram) {
        assert_eq!(self.weight.len(), other.weight.len(), "histogram layouts differ");
        for b in 0..self.weight.len() {
            self.weight[b] += other.weight[b];
            self.weight_sq[b] += other.weight_sq[b];
            self.count[b] += other.count[b];
        }
        self.overflow_count += other.overflow_count;
        self.overflow_weight += other.overflow_weight;
        self.samples += other.samples;
        self.unit_weights &= other.unit_weights;
    }
}

/// Binned estimate of `d(pushforward) / d(Lebesgue)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityEstimate {
    grid: Grid,
    density: Vec<f64>,
    stderr: Vec<f64>,
    counts: Vec<u64>,
    n_samples: u64,
    normalization: f64,
    total_mass_estimate: f64,
    overflow_mass: f64,
    overflow_count: u64,
    unit_weights: bool,
}

impl DensityEstimate {
    /// `normalization` is the space's total mass (1 for weighted models).
    pub fn from_histogram(grid: Grid, hist: &Histogram, normalization: f64) -> Result<Self> {
        if hist.weight.len() != grid.total_bins() {
            return Err(Error::invalid("histogram", "bin count does not match the grid"));
        }
        if hist.samples == 0 {
            return Err(Error::invalid("samples", "at least one sample is required"));
        }
        if hist.overflow_count == hist.samples {
            return Err(Error::AllOverflow { samples: hist.samples });
        }
        let n = hist.samples as f64;
        let vol = grid.bin_volume();
        let scale = normalization / vol;
        let mut density = Vec::with_capacity(hist.weight.len());
        let mut stderr = Vec::with_capacity(hist.weight.len());
        for b in 0..hist.weight.len() {
            let mean = hist.weight[b] / n;
            let var = (hist.weight_sq[b] / n - mean * mean).max(0.0);
            density.push(scale * mean);
            stderr.push(scale * (var / n).sqrt());
        }
        let total_mass_estimate = density.iter().sum::<f64>() * vol;
        Ok(Self {
            grid,
            density,
            stderr,
            counts: hist.count.clone(),
            n_samples: hist.samples,
            normalization,
            total_mass_estimate,
            overflow_mass: normalization * hist.overflow_weight / n,
            overflow_count: hist.overflow_count,
            unit_weights: hist.unit_weights,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn stderr(&self) -> &[f64] {
        &self.stderr
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn total_mass_estimate(&self) -> f64 {
        self.total_mass_estimate
    }

    /// Standard error of the total in-grid mass.
    pub fn total_mass_stderr(&self) -> f64 {
        let n = self.n_samples as f64;
        let p = self.total_mass_estimate / self.normalization;
        if self.unit_weights {
            self.normalization * (p * (1.0 - p) / n).max(0.0).sqrt()
        } else {
            // bins are disjoint, so per-bin variances add up to first order
            let vol = self.grid.bin_volume();
            self.stderr.iter().map(|s| (s * vol).powi(2)).sum::<f64>().sqrt()
        }
    }

    pub fn overflow_mass(&self) -> f64 {
        self.overflow_mass
    }

    pub fn overflow_count(&self) -> u64 {
        self.overflow_count
    }

    pub fn unit_weights(&self) -> bool {
        self.unit_weights
    }

    /// Density of the bin containing `x`, 0 outside the grid.
    pub fn lookup(&self, x: &[f64]) -> f64 {
        self.grid.locate(x).map_or(0.0, |b| self.density[b])
    }
}

/// Pushes the Liouville measure of `space` forward along `map` onto `grid`.
pub fn push_forward<M>(space: &SpaceModel, map: &M, grid: &Grid, sampling: Sampling) -> Result<DensityEstimate>
where
    M: Fn(&Point) -> Result<Vec<f64>> + Sync,
{
    if sampling.n == 0 {
        return Err(Error::invalid("samples", "at least one sample is required"));
    }
    let hist = Histogram::fill(space, map, grid, sampling.seed, 0..sampling.n, sampling.threads)?;
    DensityEstimate::from_histogram(grid.clone(), &hist, space.normalization())
}

/// Box estimate of the pushforward density at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointDensity {
    pub value: f64,
    pub stderr: f64,
    pub hits: u64,
    pub low_statistics: bool,
}

#[derive(Clone)]
struct BoxTally {
    weight: Vec<f64>,
    weight_sq: Vec<f64>,
    hits: Vec<u64>,
}

/// Box estimates at several points from one shared sample run: mass of the
/// closed `l-infinity` ball of `radius` around each point over its volume.
pub fn densities_at<M>(space: &SpaceModel, map: &M, points: &[Vec<f64>], radius: f64, sampling: Sampling) -> Result<Vec<PointDensity>>
where
    M: Fn(&Point) -> Result<Vec<f64>> + Sync,
{
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius", "must be positive and finite"));
    }
    if sampling.n == 0 {
        return Err(Error::invalid("samples", "at least one sample is required"));
    }
    let Some(d) = points.first().map(Vec::len) else {
        return Ok(Vec::new());
    };
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::invalid("points", "all points must have the same dimension"));
    }
    let m = points.len();
    let tally = sharded(
        0..sampling.n,
        sampling.threads,
        || BoxTally {
            weight: vec![0.0; m],
            weight_sq: vec![0.0; m],
            hits: vec![0; m],
        },
        |t, i| {
            let (p, w) = space.sample_at(sampling.seed, i);
            let y = map(&p)?;
            if y.len() != d {
                return Err(Error::invalid("map", format!("map returned {} coordinates, points have {d}", y.len())));
            }
            for (j, x) in points.iter().enumerate() {
                if y.iter().zip(x).all(|(a, b)| (a - b).abs() <= radius) {
                    t.weight[j] += w;
                    t.weight_sq[j] += w * w;
                    t.hits[j] += 1;
                }
            }
            Ok(())
        },
        |a, b| {
            for j in 0..m {
                a.weight[j] += b.weight[j];
                a.weight_sq[j] += b.weight_sq[j];
                a.hits[j] += b.hits[j];
            }
        },
    )?;
    let n = sampling.n as f64;
    let vol = (2.0 * radius).powi(d as i32);
    let scale = space.normalization() / vol;
    Ok((0..m)
        .map(|j| {
            let hits = tally.hits[j];
            if hits == 0 {
                // rule-of-three upper bound on the hit probability
                return PointDensity {
                    value: 0.0,
                    stderr: scale * 3.0 / n,
                    hits,
                    low_statistics: true,
                };
            }
            let mean = tally.weight[j] / n;
            let var = (tally.weight_sq[j] / n - mean * mean).max(0.0);
            PointDensity {
                value: scale * mean,
                stderr: scale * (var / n).sqrt(),
                hits,
                low_statistics: hits < LOW_STATISTICS_HITS,
            }
        })
        .collect())
}

pub fn density_at<M>(space: &SpaceModel, map: &M, x: &[f64], radius: f64, sampling: Sampling) -> Result<PointDensity>
where
    M: Fn(&Point) -> Result<Vec<f64>> + Sync,
{
    let mut out = densities_at(space, map, &[x.to_vec()], radius, sampling)?;
    Ok(out.remove(0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub bins_used: usize,
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares an estimate with a reference density over all bins whose expected
/// count is at least `min_count`.
pub fn compare<R>(est: &DensityEstimate, reference: R, min_count: f64, tolerance: f64) -> ComparisonReport
where
    R: Fn(&[f64]) -> f64,
{
    compare_where(est, reference, min_count, tolerance, |_, _| true)
}

/// As [`compare`], restricted to bins `[lower, upper]` accepted by `keep`.
///
/// The chi-square statistic uses the binomial variance implied by the
/// reference for unit-weight estimates and the estimated variance otherwise.
pub fn compare_where<R, K>(est: &DensityEstimate, reference: R, min_count: f64, tolerance: f64, keep: K) -> ComparisonReport
where
    R: Fn(&[f64]) -> f64,
    K: Fn(&[f64], &[f64]) -> bool,
{
    let grid = est.grid();
    let vol = grid.bin_volume();
    let n = est.n_samples() as f64;
    let z = est.normalization();
    let mut used = 0usize;
    let mut max_rel: f64 = 0.0;
    let mut sum_rel = 0.0;
    let mut chi2 = 0.0;
    let mut dof = 0usize;
    for b in 0..grid.total_bins() {
        if !keep(&grid.bin_lower(b), &grid.bin_upper(b)) {
            continue;
        }
        let rho = reference(&grid.bin_center(b));
        let expected = n * rho * vol / z;
        if !(expected >= min_count) || rho <= 0.0 {
            continue;
        }
        used += 1;
        let diff = est.density()[b] - rho;
        let rel = diff.abs() / rho;
        max_rel = max_rel.max(rel);
        sum_rel += rel;
        let var = if est.unit_weights() {
            let p = (rho * vol / z).min(1.0);
            (z / vol).powi(2) * p * (1.0 - p) / n
        } else {
            est.stderr()[b].powi(2)
        };
        if var > 0.0 {
            chi2 += diff * diff / var;
            dof += 1;
        }
    }
    let p_value = if dof > 0 {
        ChiSquared::new(dof as f64).map_or(f64::NAN, |d| d.sf(chi2))
    } else {
        f64::NAN
    };
    ComparisonReport {
        bins_used: used,
        max_rel_error: max_rel,
        mean_rel_error: if used > 0 { sum_rel / used as f64 } else { 0.0 },
        chi_square: chi2,
        dof,
        p_value,
        tolerance,
        passed: used > 0 && max_rel <= tolerance,
    }
}
