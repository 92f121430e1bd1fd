//! Model Hamiltonian spaces: normalized Liouville samplers, moment maps and
//! total masses.
//!
//! Masses are in normalized units where the Liouville form is divided by
//! `(2 pi)^n`; with this choice an orbit's mass is the volume of its
//! Gelfand–Cetlin polytope and `CP^n` has mass `1/n!`.

use crate::error::{Error, Result};
use crate::liegc::{orbit_volume, ChamberPoint, GroupKind, GroupSpec, LiePoint};
use crate::linalg::{haar_unitary, HermitianMatrix};
use crate::rng::SampleStream;
use crate::{ChamberPointF64, LiePointF64, C64};

/// Proposal variance `E|z|^2` per complex coordinate of the Wishart sampler.
pub const WISHART_PROPOSAL_VARIANCE: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mass {
    Finite(f64),
    Infinite,
}

impl Mass {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            Mass::Finite(m) => Some(m),
            Mass::Infinite => None,
        }
    }
}

/// A sampled point of phase space.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    /// A point of a coadjoint orbit, i.e. of `g*` itself.
    Orbit(LiePointF64),
    /// One point per factor of a product.
    Product(Vec<Point>),
    /// Complex coordinates (`CP^n` representatives, Wishart phase space).
    Coordinates(Vec<C64>),
}

#[derive(Clone, Debug, PartialEq)]
enum Recipe {
    Orbit(ChamberPointF64),
    Product(Vec<SpaceModel>),
    ProjectiveSpace(usize),
    Wishart { n: usize, k: usize, proposal_variance: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceModel {
    name: String,
    group: GroupSpec,
    half_dim: usize,
    mass: Mass,
    recipe: Recipe,
}

impl SpaceModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    /// `n` with `dim M = 2n`.
    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn mass(&self) -> Mass {
        self.mass
    }

    pub fn is_compact(&self) -> bool {
        matches!(self.mass, Mass::Finite(_))
    }

    /// Factor turning weighted sample frequencies into Liouville mass: the
    /// total mass for compact models, 1 for importance-weighted ones whose
    /// weights already carry the normalization.
    pub fn normalization(&self) -> f64 {
        self.mass.finite().unwrap_or(1.0)
    }

    /// Sample `index` of the stream seeded with `seed`.
    pub fn sample_at(&self, seed: u64, index: u64) -> (Point, f64) {
        self.sample(&mut SampleStream::new(seed, index))
    }

    /// One draw from the normalized Liouville law, with its importance weight.
    pub fn sample(&self, rng: &mut SampleStream) -> (Point, f64) {
        match &self.recipe {
            Recipe::Orbit(c) => (Point::Orbit(sample_orbit(c, rng)), 1.0),
            Recipe::Product(factors) => {
                let mut weight = 1.0;
                let points = factors
                    .iter()
                    .map(|f| {
                        let (p, w) = f.sample(rng);
                        weight *= w;
                        p
                    })
                    .collect();
                (Point::Product(points), weight)
            }
            Recipe::ProjectiveSpace(n) => {
                let mut z: Vec<C64> = (0..=*n).map(|_| rng.complex_normal()).collect();
                let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                for c in &mut z {
                    *c = c.unscale(norm);
                }
                (Point::Coordinates(z), 1.0)
            }
            Recipe::Wishart { n, k, proposal_variance } => {
                let s = *proposal_variance;
                let scale = s.sqrt();
                let z: Vec<C64> = (0..n * k).map(|_| rng.complex_normal::<f64>().scale(scale)).collect();
                // Lebesgue / (2 pi)^{nk} over the Gaussian density, per coordinate
                // (s / 2) exp(|z|^2 / s); accumulated in log space.
                let log_w = (n * k) as f64 * (s / 2.0).ln() + z.iter().map(|c| c.norm_sqr()).sum::<f64>() / s;
                (Point::Coordinates(z), log_w.exp())
            }
        }
    }

    pub fn moment(&self, point: &Point) -> Result<LiePointF64> {
        match (&self.recipe, point) {
            (Recipe::Orbit(_), Point::Orbit(xi)) => Ok(xi.clone()),
            (Recipe::Product(factors), Point::Product(points)) if factors.len() == points.len() => {
                let mut total = LiePoint::zero(self.group);
                for (f, p) in factors.iter().zip(points) {
                    total = total.add(&f.moment(p)?)?;
                }
                Ok(total)
            }
            (Recipe::ProjectiveSpace(n), Point::Coordinates(z)) if z.len() == n + 1 => {
                Ok(LiePoint::Torus(z[..*n].iter().map(|c| c.norm_sqr()).collect()))
            }
            (Recipe::Wishart { n, k, .. }, Point::Coordinates(z)) if z.len() == n * k => {
                let mut h = HermitianMatrix::zeros(*n);
                for col in z.chunks(*n) {
                    h = h.add_outer(col, 0.5);
                }
                Ok(LiePoint::Un(h))
            }
            _ => Err(Error::invalid("point", format!("point does not belong to space '{}'", self.name))),
        }
    }

    /// Moment value and weight of sample `index`.
    pub fn sample_moment(&self, seed: u64, index: u64) -> Result<(LiePointF64, f64)> {
        let (p, w) = self.sample_at(seed, index);
        Ok((self.moment(&p)?, w))
    }

    /// Apply the same group element to every orbit factor of a point.
    pub fn act_on_point(&self, point: &Point, g: &crate::liegc::GroupElement<f64>) -> Point {
        match point {
            Point::Orbit(xi) => Point::Orbit(xi.act(g)),
            Point::Product(ps) => Point::Product(ps.iter().map(|p| self.act_on_point(p, g)).collect()),
            Point::Coordinates(z) => Point::Coordinates(z.clone()),
        }
    }
}

fn sample_orbit(c: &ChamberPointF64, rng: &mut SampleStream) -> LiePointF64 {
    match c.group().kind() {
        GroupKind::Torus(_) => c.embed(),
        GroupKind::Su2 => {
            // Archimedes: the height is uniform on [-r, r]
            let r = c.coords()[0];
            let z = rng.uniform_in(-r, r);
            let phi = rng.uniform_in(0.0, std::f64::consts::TAU);
            let rho = (r * r - z * z).max(0.0).sqrt();
            LiePoint::Su2([rho * phi.cos(), rho * phi.sin(), z])
        }
        GroupKind::Un(n) => {
            let u = haar_unitary(n, rng).expect("n >= 1");
            LiePoint::Un(HermitianMatrix::diagonal(c.coords()).conjugated_by(&u))
        }
    }
}

/// The coadjoint orbit through a regular chamber point.
pub fn orbit_space(c: &ChamberPointF64) -> Result<SpaceModel> {
    let group = c.group();
    if group.is_torus() {
        return Err(Error::invalid("orbit", "torus orbits are points; use a torus space model instead"));
    }
    if !c.is_regular() {
        return Err(Error::invalid(
            "orbit",
            format!("chamber point {:?} is not regular", c.coords()),
        ));
    }
    let coords: Vec<String> = c.coords().iter().map(|x| x.to_string()).collect();
    Ok(SpaceModel {
        name: format!("O({})", coords.join(",")),
        group,
        half_dim: group.u(),
        mass: Mass::Finite(orbit_volume(c)),
        recipe: Recipe::Orbit(c.clone()),
    })
}

/// Convenience for the `su2` orbit of radius `r`.
pub fn su2_orbit(r: f64) -> Result<SpaceModel> {
    orbit_space(&ChamberPoint::new(GroupSpec::su2(), vec![r])?)
}

/// Product with the diagonal action; moments add.
pub fn product_space(factors: Vec<SpaceModel>) -> Result<SpaceModel> {
    let first = factors
        .first()
        .ok_or_else(|| Error::invalid("factors", "product needs at least one factor"))?;
    let group = first.group;
    if let Some(bad) = factors.iter().find(|f| f.group != group) {
        return Err(Error::invalid(
            "factors",
            format!("mixed groups {} and {}", group, bad.group),
        ));
    }
    let mass = factors.iter().try_fold(1.0, |acc, f| f.mass.finite().map(|m| acc * m));
    Ok(SpaceModel {
        name: factors.iter().map(|f| f.name.as_str()).collect::<Vec<_>>().join("x"),
        group,
        half_dim: factors.iter().map(|f| f.half_dim).sum(),
        mass: mass.map_or(Mass::Infinite, Mass::Finite),
        recipe: Recipe::Product(factors),
    })
}

/// `CP^n` with the standard torus action; moment image is the standard simplex.
pub fn cpn_space(n: usize) -> Result<SpaceModel> {
    if n == 0 {
        return Err(Error::invalid("n", "CP^n needs n >= 1"));
    }
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    Ok(SpaceModel {
        name: format!("CP{n}"),
        group: GroupSpec::torus(n),
        half_dim: n,
        mass: Mass::Finite(1.0 / factorial),
        recipe: Recipe::ProjectiveSpace(n),
    })
}

/// `(C^n)^k` with `U(n)` acting on each column; moment `1/2 sum_j z_j z_j^*`.
/// Noncompact: samples are importance-weighted against a Gaussian proposal.
pub fn wishart_space(n: usize, k: usize) -> Result<SpaceModel> {
    wishart_space_with_proposal(n, k, WISHART_PROPOSAL_VARIANCE)
}

pub fn wishart_space_with_proposal(n: usize, k: usize, proposal_variance: f64) -> Result<SpaceModel> {
    if n == 0 {
        return Err(Error::invalid("n", "Wishart space needs n >= 1"));
    }
    if k < n {
        return Err(Error::invalid("k", format!("need k >= n for regular values, got k={k} < n={n}")));
    }
    if !(proposal_variance > 0.0 && proposal_variance.is_finite()) {
        return Err(Error::invalid("proposal variance", "must be positive and finite"));
    }
    Ok(SpaceModel {
        name: format!("Wishart({n},{k})"),
        group: GroupSpec::un(n),
        half_dim: n * k,
        mass: Mass::Infinite,
        recipe: Recipe::Wishart { n, k, proposal_variance },
    })
}
