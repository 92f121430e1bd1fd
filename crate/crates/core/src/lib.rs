//! Gelfand–Cetlin data for tori, SU(2) and U(n), model Hamiltonian spaces with
//! seeded Liouville samplers, and a Monte Carlo pushforward engine used to check
//! the non-abelian Duistermaat–Heckman identities numerically.
//!
//! The linear algebra and Lie-theoretic layers are generic over the scalar type
//! (`f32`/`f64` through [`Real`], exact rationals through [`Field`] for volumes).
//! The sampling layers work in `f64`; the aliases below name the concrete types
//! used there.

// `!(a < b)` comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dhlab;
pub mod error;
pub mod liegc;
pub mod linalg;
pub mod measure;
pub mod rng;
pub mod scalar;
pub mod spaces;

pub use error::{Error, Result};
pub use scalar::{Field, Real};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::Ratio;

pub use liegc::{ChamberPoint, GcPolytope, GcVector, GroupKind, GroupSpec, LiePoint};
pub use linalg::{ComplexMatrix, HermitianMatrix, Spectrum};

/// Exact rational scalar used for closed-form volumes.
pub type Rational = Ratio<BigInt>;

pub type C64 = Complex<f64>;
pub type HermitianMatrixF64 = HermitianMatrix<f64>;
pub type HermitianMatrixF32 = HermitianMatrix<f32>;
pub type ComplexMatrixF64 = ComplexMatrix<f64>;
pub type SpectrumF64 = Spectrum<f64>;
pub type LiePointF64 = LiePoint<f64>;
pub type LiePointF32 = LiePoint<f32>;
pub type ChamberPointF64 = ChamberPoint<f64>;
pub type ChamberPointExact = ChamberPoint<Rational>;
pub type GcVectorF64 = GcVector<f64>;
pub type GcPolytopeF64 = GcPolytope<f64>;
pub type GcPolytopeExact = GcPolytope<Rational>;
