//! Concrete group data for tori, SU(2) and U(n), the sweeping map onto the
//! Weyl chamber, and the Gelfand–Cetlin map with its s-regular locus,
//! interlacing polytopes and orbit volumes.
//!
//! Models of `g*`:
//! * `torus(k)`: `R^k`, orbits are points;
//! * `su2`: `R^3`, orbits are centered spheres, chamber coordinate is the radius;
//! * `un(n)`: Hermitian `n x n` matrices, chamber coordinates are the descending
//!   spectrum.
//!
//! The Gelfand–Cetlin vector lists the full spectrum first (the invariant part),
//! then the spectra of the leading blocks of size `n-1` down to `1`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_h, haar_unitary, principal_submatrix, ComplexMatrix, HermitianMatrix, Spectrum};
use crate::rng::SampleStream;
use crate::{Field, Rational, Real};

/// Relative margin below which an interlacing inequality counts as an equality.
const SREG_MARGIN: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    Torus(usize),
    Su2,
    Un(usize),
}

/// A supported compact group together with its rank `l`, `u = (dim g - l)/2`
/// and `b = l + u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    kind: GroupKind,
}

impl GroupSpec {
    pub fn new(kind: GroupKind) -> Result<Self> {
        match kind {
            GroupKind::Torus(0) => Err(Error::invalid("group", "torus rank must be at least 1")),
            GroupKind::Un(0) => Err(Error::invalid("group", "U(n) needs n >= 1")),
            _ => Ok(Self { kind }),
        }
    }

    pub fn torus(k: usize) -> Self {
        Self::new(GroupKind::Torus(k)).expect("torus rank >= 1")
    }

    pub fn su2() -> Self {
        Self { kind: GroupKind::Su2 }
    }

    pub fn un(n: usize) -> Self {
        Self::new(GroupKind::Un(n)).expect("n >= 1")
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        match self.kind {
            GroupKind::Torus(k) => k,
            GroupKind::Su2 => 1,
            GroupKind::Un(n) => n,
        }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            GroupKind::Torus(k) => k,
            GroupKind::Su2 => 3,
            GroupKind::Un(n) => n * n,
        }
    }

    pub fn u(&self) -> usize {
        (self.dim() - self.rank()) / 2
    }

    pub fn b(&self) -> usize {
        (self.dim() + self.rank()) / 2
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.kind, GroupKind::Torus(_))
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GroupKind::Torus(k) => write!(f, "torus{k}"),
            GroupKind::Su2 => write!(f, "su2"),
            GroupKind::Un(n) => write!(f, "un{n}"),
        }
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    /// Accepts `su2`, `unN` / `uN` and `torusK` / `tK`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || Error::invalid("group", format!("unknown group '{s}' (expected su2, unN or torusK)"));
        if s == "su2" {
            return Ok(Self::su2());
        }
        let (prefix_len, ctor): (usize, fn(usize) -> GroupKind) = if let Some(rest) = s.strip_prefix("torus") {
            (s.len() - rest.len(), GroupKind::Torus)
        } else if let Some(rest) = s.strip_prefix("un") {
            (s.len() - rest.len(), GroupKind::Un)
        } else if let Some(rest) = s.strip_prefix('t') {
            (s.len() - rest.len(), GroupKind::Torus)
        } else if let Some(rest) = s.strip_prefix('u') {
            (s.len() - rest.len(), GroupKind::Un)
        } else {
            return Err(bad());
        };
        let k: usize = s[prefix_len..].parse().map_err(|_| bad())?;
        Self::new(ctor(k))
    }
}

/// `(l, u, b)` for `group`.
pub fn dims(group: GroupSpec) -> (usize, usize, usize) {
    (group.rank(), group.u(), group.b())
}

/// A point of `g*` in the group's concrete model.
#[derive(Clone, Debug, PartialEq)]
pub enum LiePoint<T> {
    Torus(Vec<T>),
    Su2([T; 3]),
    Un(HermitianMatrix<T>),
}

impl<T: Real> LiePoint<T> {
    pub fn group(&self) -> GroupSpec {
        match self {
            LiePoint::Torus(v) => GroupSpec::torus(v.len()),
            LiePoint::Su2(_) => GroupSpec::su2(),
            LiePoint::Un(h) => GroupSpec::un(h.dim()),
        }
    }

    /// The origin of `g*`.
    pub fn zero(group: GroupSpec) -> Self {
        match group.kind() {
            GroupKind::Torus(k) => LiePoint::Torus(vec![T::zero(); k]),
            GroupKind::Su2 => LiePoint::Su2([T::zero(); 3]),
            GroupKind::Un(n) => LiePoint::Un(HermitianMatrix::zeros(n)),
        }
    }

    /// Euclidean norm (Frobenius for matrices).
    pub fn norm(&self) -> T {
        match self {
            LiePoint::Torus(v) => v.iter().fold(T::zero(), |a, &x| a + x * x).sqrt(),
            LiePoint::Su2(x) => (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt(),
            LiePoint::Un(h) => h.frobenius_norm(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (LiePoint::Torus(a), LiePoint::Torus(b)) if a.len() == b.len() => {
                Ok(LiePoint::Torus(a.iter().zip(b).map(|(&x, &y)| x + y).collect()))
            }
            (LiePoint::Su2(a), LiePoint::Su2(b)) => Ok(LiePoint::Su2([a[0] + b[0], a[1] + b[1], a[2] + b[2]])),
            (LiePoint::Un(a), LiePoint::Un(b)) if a.dim() == b.dim() => Ok(LiePoint::Un(a.add(b))),
            _ => Err(Error::invalid(
                "lie point",
                format!("cannot add points of {} and {}", self.group(), other.group()),
            )),
        }
    }

    /// Coadjoint action of a group element: a rotation for `su2`, a unitary
    /// for `un`, trivial for tori.
    pub fn act(&self, g: &GroupElement<T>) -> Self {
        match (self, g) {
            (LiePoint::Su2(x), GroupElement::Rotation(r)) => {
                let mut y = [T::zero(); 3];
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = r[i][0] * x[0] + r[i][1] * x[1] + r[i][2] * x[2];
                }
                LiePoint::Su2(y)
            }
            (LiePoint::Un(h), GroupElement::Unitary(u)) => LiePoint::Un(h.conjugated_by(u)),
            (p, _) => p.clone(),
        }
    }
}

/// Group element acting on `g*`.
#[derive(Clone, Debug)]
pub enum GroupElement<T> {
    Identity,
    Rotation([[T; 3]; 3]),
    Unitary(ComplexMatrix<T>),
}

/// Haar-random element of `group`. SU(2) elements are drawn as unit
/// quaternions and returned as their rotation of `R^3`.
pub fn haar_element<T: Real>(group: GroupSpec, rng: &mut SampleStream) -> Result<GroupElement<T>> {
    match group.kind() {
        GroupKind::Torus(_) => Ok(GroupElement::Identity),
        GroupKind::Su2 => {
            let q: [f64; 4] = [rng.normal(), rng.normal(), rng.normal(), rng.normal()];
            let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            let [w, x, y, z] = q.map(|c| c / norm);
            let r = [
                [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
                [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
                [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
            ];
            Ok(GroupElement::Rotation(r.map(|row| row.map(T::lit))))
        }
        GroupKind::Un(n) => Ok(GroupElement::Unitary(haar_unitary(n, rng)?)),
    }
}

/// Random element of the Gelfand–Cetlin torus direction: rotation about the
/// third axis for `su2`, diagonal phases for `un`. Preserves `gc_map`.
pub fn fiber_element<T: Real>(group: GroupSpec, rng: &mut SampleStream) -> GroupElement<T> {
    match group.kind() {
        GroupKind::Torus(_) => GroupElement::Identity,
        GroupKind::Su2 => {
            let a = rng.uniform_in(0.0, std::f64::consts::TAU);
            let (s, c) = (T::lit(a.sin()), T::lit(a.cos()));
            let (o, z) = (T::one(), T::zero());
            GroupElement::Rotation([[c, -s, z], [s, c, z], [z, z, o]])
        }
        GroupKind::Un(n) => {
            let phases: Vec<T> = (0..n).map(|_| T::lit(rng.uniform_in(0.0, std::f64::consts::TAU))).collect();
            GroupElement::Unitary(ComplexMatrix::diagonal_phases(&phases))
        }
    }
}

/// An element of the fundamental Weyl chamber.
#[derive(Clone, Debug, PartialEq)]
pub struct ChamberPoint<T> {
    group: GroupSpec,
    coords: Vec<T>,
}

impl<T: Clone + PartialOrd + Zero> ChamberPoint<T> {
    pub fn new(group: GroupSpec, coords: Vec<T>) -> Result<Self> {
        if coords.len() != group.rank() {
            return Err(Error::invalid(
                "chamber point",
                format!("{group} needs {} coordinates, got {}", group.rank(), coords.len()),
            ));
        }
        match group.kind() {
            GroupKind::Torus(_) => {}
            GroupKind::Su2 => {
                if !(coords[0] >= T::zero()) {
                    return Err(Error::invalid("chamber point", "su2 radius must be nonnegative"));
                }
            }
            GroupKind::Un(_) => {
                if coords.windows(2).any(|w| !(w[0] >= w[1])) {
                    return Err(Error::invalid("chamber point", "U(n) coordinates must be descending"));
                }
            }
        }
        Ok(Self { group, coords })
    }

    /// Distinct entries (`un`) or positive radius (`su2`).
    pub fn is_regular(&self) -> bool {
        match self.group.kind() {
            GroupKind::Torus(_) => true,
            GroupKind::Su2 => self.coords[0] > T::zero(),
            GroupKind::Un(_) => self.coords.windows(2).all(|w| w[0] > w[1]),
        }
    }
}

impl<T> ChamberPoint<T> {
    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }
}

impl<T: Real> ChamberPoint<T> {
    /// The canonical representative in `g*`: the diagonal matrix, or the
    /// point on the positive third axis.
    pub fn embed(&self) -> LiePoint<T> {
        match self.group.kind() {
            GroupKind::Torus(_) => LiePoint::Torus(self.coords.clone()),
            GroupKind::Su2 => LiePoint::Su2([T::zero(), T::zero(), self.coords[0]]),
            GroupKind::Un(_) => LiePoint::Un(HermitianMatrix::diagonal(&self.coords)),
        }
    }
}

/// Value of the Gelfand–Cetlin map: invariant part then interior part.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GcVector<T> {
    pub small: Vec<T>,
    pub int: Vec<T>,
}

impl<T: Real> GcVector<T> {
    pub fn concat(&self) -> Vec<T> {
        self.small.iter().chain(&self.int).copied().collect()
    }

    /// Splits a vector of length `b` back into its parts.
    pub fn from_concat(group: GroupSpec, values: &[T]) -> Result<Self> {
        if values.len() != group.b() {
            return Err(Error::invalid(
                "gc vector",
                format!("{group} needs {} coordinates, got {}", group.b(), values.len()),
            ));
        }
        let (small, int) = values.split_at(group.rank());
        Ok(Self {
            small: small.to_vec(),
            int: int.to_vec(),
        })
    }

    /// Rows of the pattern from the top (length `n`) to the bottom (length 1).
    pub fn rows(&self, group: GroupSpec) -> Vec<Vec<T>> {
        match group.kind() {
            GroupKind::Un(n) => {
                let mut rows = vec![self.small.clone()];
                let mut offset = 0;
                for k in (1..n).rev() {
                    rows.push(self.int[offset..offset + k].to_vec());
                    offset += k;
                }
                rows
            }
            _ => vec![self.small.clone(), self.int.clone()],
        }
    }

    /// Layout and interlacing (`un`) or `|int| <= small` (`su2`) within `tol`.
    pub fn satisfies_invariants(&self, group: GroupSpec, tol: T) -> bool {
        if self.small.len() != group.rank() || self.int.len() != group.u() {
            return false;
        }
        match group.kind() {
            GroupKind::Torus(_) => true,
            GroupKind::Su2 => self.int[0].abs() <= self.small[0] + tol,
            GroupKind::Un(_) => self.rows(group).windows(2).all(|w| {
                let outer = &w[0];
                let inner = &w[1];
                inner
                    .iter()
                    .enumerate()
                    .all(|(i, &m)| outer[i] + tol >= m && m + tol >= outer[i + 1])
            }),
        }
    }
}

/// Chamber representative of the orbit through `xi`.
pub fn sweep<T: Real>(xi: &LiePoint<T>) -> Result<ChamberPoint<T>> {
    let group = xi.group();
    let coords = match xi {
        LiePoint::Torus(v) => v.clone(),
        LiePoint::Su2(_) => vec![xi.norm()],
        LiePoint::Un(h) => eig_h(h)?.into_vec(),
    };
    Ok(ChamberPoint { group, coords })
}

fn block_spectra<T: Real>(h: &HermitianMatrix<T>) -> Result<Vec<Spectrum<T>>> {
    let n = h.dim();
    (1..=n)
        .rev()
        .map(|k| principal_submatrix(h, k).and_then(|b| eig_h(&b)))
        .collect()
}

/// The Gelfand–Cetlin map.
pub fn gc_map<T: Real>(xi: &LiePoint<T>) -> Result<GcVector<T>> {
    Ok(match xi {
        LiePoint::Torus(v) => GcVector {
            small: v.clone(),
            int: Vec::new(),
        },
        LiePoint::Su2(x) => GcVector {
            small: vec![xi.norm()],
            int: vec![x[2]],
        },
        LiePoint::Un(h) => {
            let mut rows = block_spectra(h)?.into_iter();
            let small = rows.next().expect("n >= 1").into_vec();
            let int = rows.flat_map(Spectrum::into_vec).collect();
            GcVector { small, int }
        }
    })
}

/// Whether `xi` lies in the s-regular locus: strict interlacing of all nested
/// block spectra (`un`), off the third axis (`su2`), everywhere for tori.
pub fn is_sreg<T: Real>(xi: &LiePoint<T>) -> Result<bool> {
    Ok(match xi {
        LiePoint::Torus(_) => true,
        LiePoint::Su2(x) => {
            let r = xi.norm();
            x[2].abs() < r * (T::one() - T::lit(SREG_MARGIN))
        }
        LiePoint::Un(h) => {
            let rows = block_spectra(h)?;
            let scale = rows[0].values().iter().fold(T::zero(), |m, x| m.max(x.abs()));
            let margin = T::lit(SREG_MARGIN) * scale.max(T::min_positive_value());
            rows.windows(2).all(|w| {
                let outer = w[0].values();
                w[1].values()
                    .iter()
                    .enumerate()
                    .all(|(i, &m)| outer[i] - m > margin && m - outer[i + 1] > margin)
            })
        }
    })
}

/// Normalized symplectic volume of the orbit through `c`: `1` for tori, `2r`
/// for `su2`, `prod_{i<j} (c_i - c_j) / prod_{i<j} (j - i)` for `un`. Zero at
/// non-regular points.
pub fn orbit_volume<F: Field>(c: &ChamberPoint<F>) -> F {
    let coords = c.coords();
    match c.group().kind() {
        GroupKind::Torus(_) => F::one(),
        GroupKind::Su2 => {
            let r = coords[0].clone();
            if r > F::zero() {
                F::from_int(2) * r
            } else {
                F::zero()
            }
        }
        GroupKind::Un(n) => {
            let mut num = F::one();
            let mut den = F::one();
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = coords[i].clone() - coords[j].clone();
                    if !(d > F::zero()) {
                        return F::zero();
                    }
                    num = num * d;
                    den = den * F::from_int((j - i) as i64);
                }
            }
            num / den
        }
    }
}

/// `sum_j coeffs[j] * x[j] <= bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineConstraint<F> {
    pub coeffs: Vec<F>,
    pub bound: F,
}

impl<F: Field> AffineConstraint<F> {
    pub fn holds(&self, x: &[F]) -> bool {
        let lhs = self
            .coeffs
            .iter()
            .zip(x)
            .fold(F::zero(), |acc, (a, xi)| acc + a.clone() * xi.clone());
        lhs <= self.bound
    }
}

/// The Gelfand–Cetlin polytope over a chamber point: the set of interior
/// coordinates compatible with the fixed top row.
#[derive(Clone, Debug, PartialEq)]
pub struct GcPolytope<F> {
    base: ChamberPoint<F>,
    dimension: usize,
    constraints: Vec<AffineConstraint<F>>,
}

impl<F: Field> GcPolytope<F> {
    pub fn group(&self) -> GroupSpec {
        self.base.group()
    }

    pub fn base(&self) -> &ChamberPoint<F> {
        &self.base
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn constraints(&self) -> &[AffineConstraint<F>] {
        &self.constraints
    }

    pub fn contains(&self, x: &[F]) -> bool {
        x.len() == self.dimension && self.constraints.iter().all(|c| c.holds(x))
    }

    /// Coordinate-wise bounds: for `un`, entry `i` of row `k` lies in
    /// `[c_{i+n-k}, c_i]`.
    pub fn bounding_box(&self) -> Vec<(F, F)> {
        let c = self.base.coords();
        match self.group().kind() {
            GroupKind::Torus(_) => Vec::new(),
            GroupKind::Su2 => vec![(-c[0].clone(), c[0].clone())],
            GroupKind::Un(n) => (1..n)
                .rev()
                .flat_map(|k| (0..k).map(move |i| (c[i + n - k].clone(), c[i].clone())))
                .collect(),
        }
    }
}

/// Offset of row `k` (length `k`) in the interior coordinates of `un(n)`.
fn row_offset(n: usize, k: usize) -> usize {
    (n - 1) * n / 2 - k * (k + 1) / 2
}

pub fn gc_polytope<F: Field>(c: &ChamberPoint<F>) -> GcPolytope<F> {
    let group = c.group();
    let dimension = group.u();
    let coords = c.coords();
    let unit = |j: usize, sign: F| {
        let mut coeffs = vec![F::zero(); dimension];
        coeffs[j] = sign;
        coeffs
    };
    let mut constraints = Vec::new();
    match group.kind() {
        GroupKind::Torus(_) => {}
        GroupKind::Su2 => {
            let r = coords[0].clone();
            constraints.push(AffineConstraint { coeffs: unit(0, F::one()), bound: r.clone() });
            constraints.push(AffineConstraint { coeffs: unit(0, -F::one()), bound: r });
        }
        GroupKind::Un(n) => {
            for k in (1..n).rev() {
                let off = row_offset(n, k);
                for i in 0..k {
                    let var = off + i;
                    if k + 1 == n {
                        constraints.push(AffineConstraint { coeffs: unit(var, F::one()), bound: coords[i].clone() });
                        constraints.push(AffineConstraint {
                            coeffs: unit(var, -F::one()),
                            bound: -coords[i + 1].clone(),
                        });
                    } else {
                        let up = row_offset(n, k + 1);
                        let mut le = unit(var, F::one());
                        le[up + i] = -F::one();
                        constraints.push(AffineConstraint { coeffs: le, bound: F::zero() });
                        let mut ge = unit(var, -F::one());
                        ge[up + i + 1] = F::one();
                        constraints.push(AffineConstraint { coeffs: ge, bound: F::zero() });
                    }
                }
            }
        }
    }
    GcPolytope {
        base: c.clone(),
        dimension,
        constraints,
    }
}

/// Exact Euclidean volume of a Gelfand–Cetlin polytope.
///
/// For `un(n)` the rows are integrated out from the bottom: with the row above
/// fixed, the next row ranges over a box, and the volume of everything below
/// it is a polynomial in that row, so each step is exact symbolic integration
/// of a polynomial over a box.
pub fn gc_polytope_volume<F: Field>(p: &GcPolytope<F>) -> F {
    match p.group().kind() {
        GroupKind::Torus(_) => F::one(),
        GroupKind::Su2 => {
            // interval cut out by the constraints
            let mut lo: Option<F> = None;
            let mut hi: Option<F> = None;
            for c in p.constraints() {
                let a = c.coeffs[0].clone();
                if a > F::zero() {
                    let v = c.bound.clone() / a;
                    hi = Some(match hi {
                        Some(h) if h < v => h,
                        _ => v,
                    });
                } else if a < F::zero() {
                    let v = c.bound.clone() / a;
                    lo = Some(match lo {
                        Some(l) if l > v => l,
                        _ => v,
                    });
                }
            }
            match (lo, hi) {
                (Some(l), Some(h)) if h > l => h - l,
                _ => F::zero(),
            }
        }
        GroupKind::Un(n) => {
            let coords = p.base().coords();
            if coords.windows(2).any(|w| !(w[0] >= w[1])) {
                return F::zero();
            }
            let v = interlacing_volume_polynomial(n).evaluate(coords);
            if v > F::zero() {
                v
            } else {
                F::zero()
            }
        }
    }
}

/// Polynomial with rational coefficients; keys are exponent vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Polynomial {
    fn constant(nvars: usize, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; nvars], c);
        }
        Self { nvars, terms }
    }

    fn monomial(nvars: usize, var: usize, power: u32, c: Rational) -> Self {
        let mut e = vec![0; nvars];
        e[var] = power;
        let mut terms = BTreeMap::new();
        terms.insert(e, c);
        Self { nvars, terms }
    }

    fn add_assign(&mut self, other: &Polynomial) {
        for (e, c) in &other.terms {
            let entry = self.terms.entry(e.clone()).or_insert_with(Rational::zero);
            *entry += c;
            if entry.is_zero() {
                self.terms.remove(e);
            }
        }
    }

    fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::constant(self.nvars, Rational::zero());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let entry = out.terms.entry(e).or_insert_with(Rational::zero);
                *entry += ca * cb;
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn evaluate<F: Field>(&self, x: &[F]) -> F {
        assert_eq!(x.len(), self.nvars, "wrong number of variables");
        self.terms.iter().fold(F::zero(), |acc, (e, c)| {
            let mut term = F::from_ratio(c);
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    term = term * xi.clone();
                }
            }
            acc + term
        })
    }
}

/// Volume of the interlacing polytope over a top row of length `n`, as a
/// polynomial in the top row.
pub fn interlacing_volume_polynomial(n: usize) -> Polynomial {
    assert!(n >= 1);
    let mut poly = Polynomial::constant(1, Rational::one());
    for m in 2..=n {
        // poly is in the m-1 variables of the row below; integrate variable i
        // over [x_{i+1}, x_i] of the new top row (m variables).
        let mut next = Polynomial::constant(m, Rational::zero());
        for (exps, coef) in &poly.terms {
            let mut term = Polynomial::constant(m, coef.clone());
            for (i, &a) in exps.iter().enumerate() {
                let p = a + 1;
                let scale = Rational::new(BigInt::one(), BigInt::from(p));
                let mut antiderivative = Polynomial::monomial(m, i, p, scale.clone());
                antiderivative.add_assign(&Polynomial::monomial(m, i + 1, p, -scale));
                term = term.mul(&antiderivative);
            }
            next.add_assign(&term);
        }
        poly = next;
    }
    poly
}

/// One line of a strong-datum check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub condition: &'static str,
    pub description: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrongDatumReport {
    pub group: String,
    pub seed: u64,
    pub n_samples: usize,
    pub conditions: Vec<ConditionCheck>,
    pub passed: bool,
}

const STRONG_TOL: f64 = 1e-10;
const EQUAL_TOL: f64 = 1e-9;

/// Random point of `g*`: Gaussian coordinates, or a GUE-type matrix.
pub fn random_lie_point(group: GroupSpec, rng: &mut SampleStream) -> LiePoint<f64> {
    match group.kind() {
        GroupKind::Torus(k) => LiePoint::Torus((0..k).map(|_| rng.normal()).collect()),
        GroupKind::Su2 => LiePoint::Su2([rng.normal(), rng.normal(), rng.normal()]),
        GroupKind::Un(n) => {
            let mut data = vec![Complex::zero(); n * n];
            for i in 0..n {
                data[i * n + i] = Complex::new(rng.normal(), 0.0);
                for j in (i + 1)..n {
                    let z: Complex<f64> = rng.complex_normal();
                    data[i * n + j] = z;
                    data[j * n + i] = z.conj();
                }
            }
            LiePoint::Un(HermitianMatrix::new(n, data).expect("constructed Hermitian"))
        }
    }
}

/// Points on which `gc_map` is degenerate: the third axis, diagonal matrices.
fn degenerate_lie_point(group: GroupSpec, rng: &mut SampleStream) -> LiePoint<f64> {
    match group.kind() {
        GroupKind::Torus(_) => random_lie_point(group, rng),
        GroupKind::Su2 => LiePoint::Su2([0.0, 0.0, rng.normal()]),
        GroupKind::Un(n) => {
            let d: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
            LiePoint::Un(HermitianMatrix::diagonal(&d))
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Executable check of the strong Gelfand–Cetlin conditions on random data.
///
/// * (vi) equal invariant parts force equal chamber points (pairs in one orbit);
/// * (vii) `|xi| = |nu_small(xi)|`, which makes the map proper;
/// * (viii) points in one fiber agree on s-regularity (generic and degenerate pairs);
/// * (ix) Haar conjugates of an s-regular point are s-regular.
pub fn check_strong_datum(group: GroupSpec, seed: u64, n_samples: usize) -> Result<StrongDatumReport> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be at least 1"));
    }
    let n = n_samples as u64;

    let mut vi_dev: f64 = 0.0;
    let mut vi_ok = true;
    let mut vii_dev: f64 = 0.0;
    let mut viii_ok = true;
    let mut viii_dev: f64 = 0.0;
    for i in 0..n {
        let mut rng = SampleStream::new(seed, i);
        let xi = random_lie_point(group, &mut rng);
        let g = haar_element(group, &mut rng)?;
        let eta = xi.act(&g);

        let small_xi = gc_map(&xi)?.small;
        let small_eta = gc_map(&eta)?.small;
        if max_abs_diff(&small_xi, &small_eta) <= EQUAL_TOL {
            let d = max_abs_diff(sweep(&xi)?.coords(), sweep(&eta)?.coords());
            vi_dev = vi_dev.max(d);
            vi_ok &= d <= EQUAL_TOL;
        } else {
            // a group translate must share the invariant part
            vi_ok = false;
        }

        let d = (xi.norm() - small_xi.iter().map(|x| x * x).sum::<f64>().sqrt()).abs();
        vii_dev = vii_dev.max(d);

        let base = if i % 2 == 0 { xi.clone() } else { degenerate_lie_point(group, &mut rng) };
        let partner = base.act(&fiber_element(group, &mut rng));
        let d = max_abs_diff(&gc_map(&base)?.concat(), &gc_map(&partner)?.concat());
        viii_dev = viii_dev.max(d);
        viii_ok &= d <= EQUAL_TOL && is_sreg(&base)? == is_sreg(&partner)?;
        if i % 2 == 1 && !group.is_torus() {
            // degenerate fibers must be excluded on both sides
            viii_ok &= !is_sreg(&base)?;
        }
    }

    let mut anchor_rng = SampleStream::new(seed ^ 0x5eed_5eed, 0);
    let anchor = loop {
        let candidate = random_lie_point(group, &mut anchor_rng);
        if is_sreg(&candidate)? {
            break candidate;
        }
    };
    let mut sreg_hits = 0usize;
    for i in 0..n {
        let mut rng = SampleStream::new(seed ^ 0x5eed_5eed, i + 1);
        let g = haar_element(group, &mut rng)?;
        if is_sreg(&anchor.act(&g))? {
            sreg_hits += 1;
        }
    }
    let ix_fraction = sreg_hits as f64 / n as f64;

    let conditions = vec![
        ConditionCheck {
            condition: "vi",
            description: "equal invariant parts imply equal orbits",
            passed: vi_ok,
            cases: n_samples,
            max_deviation: vi_dev,
        },
        ConditionCheck {
            condition: "vii",
            description: "norm identity |xi| = |nu_small(xi)| (properness)",
            passed: vii_dev <= STRONG_TOL,
            cases: n_samples,
            max_deviation: vii_dev,
        },
        ConditionCheck {
            condition: "viii",
            description: "s-regular locus is a union of fibers",
            passed: viii_ok,
            cases: n_samples,
            max_deviation: viii_dev,
        },
        ConditionCheck {
            condition: "ix",
            description: "s-regular points are dense in each regular orbit",
            passed: sreg_hits == n_samples,
            cases: n_samples,
            max_deviation: 1.0 - ix_fraction,
        },
    ];
    let passed = conditions.iter().all(|c| c.passed);
    Ok(StrongDatumReport {
        group: group.to_string(),
        seed,
        n_samples,
        conditions,
        passed,
    })
}
