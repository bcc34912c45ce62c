//! Functional calculus for bounded normal definitizable operators on
//! finite-dimensional Krein spaces.
//!
//! A Krein space is modelled as `ℂⁿ` with an invertible Hermitian Gram matrix
//! `J`, so that `[x, y] = yᴴJx`. Given a normal operator `N` with real part `A`
//! and imaginary part `B`, together with definitizing real polynomials `p` and
//! `q`, the crate builds the Hilbert spaces `V`, `V₁`, `V₂` with their
//! embeddings, diagonalizes `Θ(N)` on `V`, and evaluates
//!
//! ```text
//! φ(N) = s(A, B) + Ξ( ∫^{R₁,R₂} g dE )
//! ```
//!
//! for functions `φ` that carry scalar values on the noncritical spectrum and
//! truncated jets at the critical points.
//!
//! The modules mirror the pipeline:
//!
//! * [`jets`] – the truncated jet algebras `𝒜ₘ,ₙ` and `ℬₘ,ₙ`.
//! * [`bipoly`] – univariate/bivariate polynomials, zero grids, Euclidean
//!   reduction and bivariate Hermite interpolation.
//! * [`krein`] – the indefinite inner product, Krein adjoints, normality and
//!   definitizing polynomials.
//! * [`embed`] – Gram factorizations and the commutant homomorphisms.
//! * [`spectral`] – spectral measure of `Θ(N)` and spectral integrals.
//! * [`calculus`] – the function class, `φ ↦ φ(N)`, projections and spectra.
//! * [`harness`] – file formats, instance generation and the property suite.

// Negated comparisons such as `!(residual <= threshold)` are deliberate: a NaN
// residual must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod bipoly;
pub mod calculus;
pub mod embed;
mod error;
pub mod harness;
pub mod jets;
pub mod krein;
pub mod linalg;
pub mod spectral;
mod tol;

pub use error::{Error, Result};
pub use tol::Tolerances;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;

pub use bipoly::{BiPoly, RealUniPoly, Zero, ZeroGrid};
pub use calculus::{CalculusFunction, CriticalSet, DomainPoint, FunctionalCalculus, Region};
pub use embed::EmbeddingBundle;
pub use jets::{Jet, JetKind, JetShape};
pub use krein::{DefinitizablePair, KreinSpace};
pub use spectral::SpectralData;
