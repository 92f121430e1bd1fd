//! Dense Hermitian linear algebra at toy sizes: a cyclic Jacobi eigensolver,
//! Haar-random unitaries and leading principal blocks.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rng::SampleStream;
use crate::Real;

const MAX_SWEEPS: usize = 100;

fn hermitian_tolerance<T: Real>(scale: T) -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(16.0) * scale)
}

/// Square complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Diagonal matrix with unit-modulus entries `exp(i * phase_k)`.
    pub fn diagonal_phases(phases: &[T]) -> Self {
        let mut m = Self::zeros(phases.len());
        for (k, &p) in phases.iter().enumerate() {
            m[(k, k)] = Complex::new(p.cos(), p.sin());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    /// `max_{ij} |(M M*)_{ij} - delta_{ij}|`.
    pub fn unitarity_defect(&self) -> T {
        let prod = self.matmul(&self.adjoint());
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                let target = if i == j { Complex::one() } else { Complex::zero() };
                worst = worst.max((prod[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}

/// Hermitian matrix; construction enforces `H = H*` and a real diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> HermitianMatrix<T> {
    /// Validates row-major `entries` and stores the exactly Hermitian part.
    pub fn new(n: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("matrix", "dimension must be at least 1"));
        }
        if entries.len() != n * n {
            return Err(Error::invalid(
                "matrix",
                format!("expected {} entries, got {}", n * n, entries.len()),
            ));
        }
        let scale = entries.iter().fold(T::zero(), |m, z| m.max(z.norm()));
        if !scale.is_finite() {
            return Err(Error::invalid("matrix", "non-finite entry"));
        }
        let tol = hermitian_tolerance(scale);
        let mut data = entries;
        for i in 0..n {
            let d = data[i * n + i];
            if d.im.abs() > tol {
                return Err(Error::invalid(
                    "matrix",
                    format!("diagonal entry {i} has imaginary part {}", d.im),
                ));
            }
            data[i * n + i] = Complex::new(d.re, T::zero());
            for j in (i + 1)..n {
                let a = data[i * n + j];
                let b = data[j * n + i];
                if (a - b.conj()).norm() > tol {
                    return Err(Error::invalid(
                        "matrix",
                        format!("entries ({i},{j}) and ({j},{i}) are not conjugate"),
                    ));
                }
                let avg = (a + b.conj()).scale(T::lit(0.5));
                data[i * n + j] = avg;
                data[j * n + i] = avg.conj();
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix", "rows must form a square array"));
        }
        Self::new(n, rows.iter().flatten().copied().collect())
    }

    pub fn from_real_rows(rows: &[Vec<T>]) -> Result<Self> {
        let rows: Vec<Vec<Complex<T>>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex::new(x, T::zero())).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(values: &[T]) -> Self {
        let n = values.len();
        let mut data = vec![Complex::zero(); n * n];
        for (i, &v) in values.iter().enumerate() {
            data[i * n + i] = Complex::new(v, T::zero());
        }
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self.data[i * self.n + i].re)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// `U H U*`, re-symmetrized to stay exactly Hermitian.
    pub fn conjugated_by(&self, u: &ComplexMatrix<T>) -> Self {
        assert_eq!(u.dim(), self.n, "dimension mismatch");
        let h = ComplexMatrix {
            n: self.n,
            data: self.data.clone(),
        };
        let m = u.matmul(&h).matmul(&u.adjoint());
        Self::hermitize(self.n, m.data)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Rank-one update `self + c * v v*`.
    pub fn add_outer(&self, v: &[Complex<T>], c: T) -> Self {
        assert_eq!(v.len(), self.n, "dimension mismatch");
        let mut data = self.data.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                data[i * self.n + j] = data[i * self.n + j] + (v[i] * v[j].conj()).scale(c);
            }
        }
        Self::hermitize(self.n, data)
    }

    fn hermitize(n: usize, mut data: Vec<Complex<T>>) -> Self {
        let half = T::lit(0.5);
        for i in 0..n {
            data[i * n + i].im = T::zero();
            for j in (i + 1)..n {
                let avg = (data[i * n + j] + data[j * n + i].conj()).scale(half);
                data[i * n + j] = avg;
                data[j * n + i] = avg.conj();
            }
        }
        Self { n, data }
    }

    fn to_complex_matrix(&self) -> ComplexMatrix<T> {
        ComplexMatrix {
            n: self.n,
            data: self.data.clone(),
        }
    }
}

/// Eigenvalues sorted in descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    values: Vec<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn from_unsorted(mut values: Vec<T>) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Self { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether `inner` (one shorter) weakly interlaces `self` within `tol`:
    /// `self[i] >= inner[i] >= self[i + 1]`.
    pub fn interlaced_by(&self, inner: &Spectrum<T>, tol: T) -> bool {
        inner.len() + 1 == self.len()
            && inner.values.iter().enumerate().all(|(i, &m)| {
                self.values[i] + tol >= m && m + tol >= self.values[i + 1]
            })
    }
}

fn off_diagonal_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    let mut s = T::zero();
    for i in 0..a.n {
        for j in 0..a.n {
            if i != j {
                s = s + a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi<T: Real>(h: &HermitianMatrix<T>, want_vectors: bool) -> Result<(Vec<T>, Option<ComplexMatrix<T>>)> {
    let n = h.n;
    let mut a = h.to_complex_matrix();
    let mut v = want_vectors.then(|| ComplexMatrix::identity(n));
    let norm = h.frobenius_norm();
    let threshold = T::lit(1e-13).max(T::epsilon() * T::lit(64.0)) * norm;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= threshold || norm.is_zero() {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off.to_f64_lossy(),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let mag = b.norm();
                if mag.is_zero() {
                    continue;
                }
                // b = |b| e^{i phi}; J = diag(1, e^{-i phi}) * [[c, s], [-s, c]]
                let phase = b.unscale(mag);
                let phase_c = phase.conj();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (mag + mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;

                // A <- A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp.scale(c) - (akq * phase_c).scale(s);
                    a[(k, q)] = akp.scale(s) + (akq * phase_c).scale(c);
                }
                // A <- J* A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk.scale(c) - (phase * aqk).scale(s);
                    a[(q, k)] = apk.scale(s) + (phase * aqk).scale(c);
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)].im = T::zero();
                a[(q, q)].im = T::zero();

                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp.scale(c) - (vkq * phase_c).scale(s);
                        v[(k, q)] = vkp.scale(s) + (vkq * phase_c).scale(c);
                    }
                }
            }
        }
    }
    Ok(((0..n).map(|i| a[(i, i)].re).collect(), v))
}

/// All eigenvalues of `h`, descending.
pub fn eig_h<T: Real>(h: &HermitianMatrix<T>) -> Result<Spectrum<T>> {
    let (values, _) = jacobi(h, false)?;
    Ok(Spectrum::from_unsorted(values))
}

/// Eigenvalues (descending) with unit eigenvectors as the matching columns.
pub fn eigh<T: Real>(h: &HermitianMatrix<T>) -> Result<(Spectrum<T>, ComplexMatrix<T>)> {
    let (values, vectors) = jacobi(h, true)?;
    let vectors = vectors.expect("vectors requested");
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap_or(std::cmp::Ordering::Equal));
    let sorted = ComplexMatrix::from_fn(n, |i, j| vectors[(i, order[j])]);
    let spectrum = Spectrum {
        values: order.iter().map(|&i| values[i]).collect(),
    };
    Ok((spectrum, sorted))
}

/// `max_j ||H v_j - lambda_j v_j||`.
pub fn eigen_residual<T: Real>(h: &HermitianMatrix<T>, spectrum: &Spectrum<T>, vectors: &ComplexMatrix<T>) -> T {
    let n = h.dim();
    let mut worst = T::zero();
    for (j, &lambda) in spectrum.values().iter().enumerate() {
        let mut r2 = T::zero();
        for i in 0..n {
            let mut acc: Complex<T> = Complex::zero();
            for k in 0..n {
                acc = acc + h.entry(i, k) * vectors[(k, j)];
            }
            r2 = r2 + (acc - vectors[(i, j)].scale(lambda)).norm_sqr();
        }
        worst = worst.max(r2.sqrt());
    }
    worst
}

/// The leading `k x k` block.
pub fn principal_submatrix<T: Real>(h: &HermitianMatrix<T>, k: usize) -> Result<HermitianMatrix<T>> {
    if k == 0 || k > h.n {
        return Err(Error::invalid(
            "block size",
            format!("{k} is outside 1..={}", h.n),
        ));
    }
    let mut data = Vec::with_capacity(k * k);
    for i in 0..k {
        data.extend_from_slice(&h.data[i * h.n..i * h.n + k]);
    }
    Ok(HermitianMatrix { n: k, data })
}

/// Haar-distributed unitary: Ginibre matrix, QR by modified Gram–Schmidt with
/// one reorthogonalization pass, then each column of Q divided by the phase of
/// the matching diagonal entry of R.
pub fn haar_unitary<T: Real>(n: usize, rng: &mut SampleStream) -> Result<ComplexMatrix<T>> {
    if n == 0 {
        return Err(Error::invalid("n", "unitary dimension must be at least 1"));
    }
    // columns of the Ginibre matrix
    let mut cols: Vec<Vec<Complex<T>>> = (0..n)
        .map(|_| (0..n).map(|_| rng.complex_normal()).collect())
        .collect();
    let mut r_diag = Vec::with_capacity(n);
    for j in 0..n {
        let (done, rest) = cols.split_at_mut(j);
        let col = &mut rest[0];
        for _pass in 0..2 {
            for q in done.iter() {
                let proj = q
                    .iter()
                    .zip(col.iter())
                    .fold(Complex::zero(), |acc: Complex<T>, (qi, ci)| acc + qi.conj() * ci);
                for (ci, qi) in col.iter_mut().zip(q) {
                    *ci = *ci - proj * qi;
                }
            }
        }
        let norm = col.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        if norm.is_zero() {
            return Err(Error::invalid("ginibre", "rank-deficient draw"));
        }
        for ci in col.iter_mut() {
            *ci = ci.unscale(norm);
        }
        // Gram–Schmidt leaves R_jj = norm > 0; the correction below is then the
        // identity but is kept so any QR with complex diagonal stays Haar.
        r_diag.push(Complex::new(norm, T::zero()));
    }
    let mut q = ComplexMatrix::zeros(n);
    for (j, col) in cols.iter().enumerate() {
        let r = r_diag[j];
        let phase = r.unscale(r.norm());
        for i in 0..n {
            q[(i, j)] = col[i] / phase;
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    pub(crate) fn random_hermitian(n: usize, rng: &mut SampleStream) -> HermitianMatrix<f64> {
        let mut data = vec![Complex::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = c(rng.normal(), 0.0);
            for j in (i + 1)..n {
                let z = c(rng.normal(), rng.normal());
                data[i * n + j] = z;
                data[j * n + i] = z.conj();
            }
        }
        HermitianMatrix::new(n, data).unwrap()
    }

    #[test]
    fn swap_matrix_eigenvalues() {
        let h = HermitianMatrix::<f64>::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = eig_h(&h).unwrap();
        assert!((s.values()[0] - 1.0).abs() < 1e-14);
        assert!((s.values()[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_is_sorted() {
        let h = HermitianMatrix::diagonal(&[3.0, 1.0, 2.0]);
        assert_eq!(eig_h(&h).unwrap().values(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn complex_two_by_two() {
        // [[1, i], [-i, 2]]: eigenvalues (3 +- sqrt 5) / 2
        let h = HermitianMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(2.0, 0.0)]]).unwrap();
        let s = eig_h(&h).unwrap();
        let r5 = 5f64.sqrt();
        assert!((s.values()[0] - (3.0 + r5) / 2.0).abs() < 1e-13);
        assert!((s.values()[1] - (3.0 - r5) / 2.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let err = HermitianMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 1.0), c(2.0, 0.0)]]);
        assert!(matches!(err, Err(Error::Validation { .. })));
        let err = HermitianMatrix::new(1, vec![c(1.0, 0.5)]);
        assert!(err.is_err());
        assert!(HermitianMatrix::<f64>::new(0, vec![]).is_err());
    }

    #[test]
    fn residuals_small() {
        for i in 0..200 {
            let mut rng = SampleStream::new(11, i);
            let n = 1 + (i as usize % 8);
            let h = random_hermitian(n, &mut rng);
            let (s, v) = eigh(&h).unwrap();
            let res = eigen_residual(&h, &s, &v);
            assert!(res <= 1e-10 * h.frobenius_norm().max(1.0), "residual {res}");
        }
    }

    #[test]
    fn trace_and_frobenius_preserved() {
        for i in 0..200 {
            let mut rng = SampleStream::new(12, i);
            let h = random_hermitian(5, &mut rng);
            let s = eig_h(&h).unwrap();
            let sum: f64 = s.values().iter().sum();
            let sq: f64 = s.values().iter().map(|x| x * x).sum();
            assert!((sum - h.trace()).abs() < 1e-10);
            assert!((sq - h.frobenius_norm().powi(2)).abs() < 1e-10 * sq.max(1.0));
        }
    }

    #[test]
    fn zero_matrix() {
        let s = eig_h(&HermitianMatrix::<f64>::zeros(4)).unwrap();
        assert_eq!(s.values(), &[0.0; 4]);
    }

    #[test]
    fn works_in_f32() {
        let h = HermitianMatrix::<f32>::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let s = eig_h(&h).unwrap();
        assert!((s.values()[0] - 3.0).abs() < 1e-5);
        assert!((s.values()[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn haar_scalar_has_unit_modulus() {
        for i in 0..100 {
            let u = haar_unitary::<f64>(1, &mut SampleStream::new(5, i)).unwrap();
            assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn haar_is_unitary() {
        for i in 0..500 {
            let n = 1 + (i as usize % 10);
            let u = haar_unitary::<f64>(n, &mut SampleStream::new(6, i)).unwrap();
            assert!(u.unitarity_defect() < 1e-12);
        }
        assert!(haar_unitary::<f64>(0, &mut SampleStream::new(6, 0)).is_err());
    }

    #[test]
    fn conjugation_preserves_spectrum() {
        for i in 0..200 {
            let mut rng = SampleStream::new(13, i);
            let h = random_hermitian(4, &mut rng);
            let u = haar_unitary(4, &mut rng).unwrap();
            let a = eig_h(&h).unwrap();
            let b = eig_h(&h.conjugated_by(&u)).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn principal_blocks() {
        let h = HermitianMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(2.0, 0.0)]]).unwrap();
        let b = principal_submatrix(&h, 1).unwrap();
        assert_eq!(b.entries(), &[c(1.0, 0.0)]);
        assert_eq!(principal_submatrix(&h, 2).unwrap(), h);
        assert!(principal_submatrix(&h, 0).is_err());
        assert!(principal_submatrix(&h, 3).is_err());
    }

    #[test]
    fn cauchy_interlacing() {
        for i in 0..1000 {
            let mut rng = SampleStream::new(14, i);
            let n = 2 + (i as usize % 6);
            let h = random_hermitian(n, &mut rng);
            let outer = eig_h(&h).unwrap();
            let inner = eig_h(&principal_submatrix(&h, n - 1).unwrap()).unwrap();
            assert!(outer.interlaced_by(&inner, 1e-10));
        }
    }
}
