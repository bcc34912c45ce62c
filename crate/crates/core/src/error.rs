use thiserror::Error;

use crate::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("jet is not invertible: |a[0,0]| = {modulus:e}")]
    NotInvertible { modulus: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("interpolation system is ill-conditioned (condition number {condition:e})")]
    Conditioning { condition: f64 },

    #[error("operator is not normal: residual {residual:e} exceeds {threshold:e}")]
    NotNormal { residual: f64, threshold: f64 },

    #[error("Gram matrix is not Hermitian: residual {0:e}")]
    NotHermitian(f64),

    #[error("Gram matrix is singular: smallest singular value {0:e}")]
    SingularGram(f64),

    #[error("operator is not Krein-selfadjoint: residual {0:e}")]
    NotSelfAdjoint(f64),

    #[error("real and imaginary parts do not commute: residual {0:e}")]
    NotCommuting(f64),

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e} below {threshold:e}")]
    NotPsd { min_eigenvalue: f64, threshold: f64 },

    #[error("no definitizing polynomial of degree <= {max_degree} found; supply one explicitly")]
    SearchFailed { max_degree: usize },

    #[error("construction failed: {what} residual {residual:e} exceeds {threshold:e}")]
    ConstructionFailed {
        what: &'static str,
        residual: f64,
        threshold: f64,
    },

    #[error("operator is not in the required commutant: {what} residual {residual:e} exceeds {threshold:e}")]
    NotInCommutant {
        what: &'static str,
        residual: f64,
        threshold: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("value at {point} is not invertible")]
    NonInvertiblePoint { point: String },

    #[error("function minus interpolant is not in the ideal: residual {residual:e} exceeds {threshold:e}")]
    NotInIdeal { residual: f64, threshold: f64 },

    #[error("region boundary passes within {distance:e} of critical spectral point {point}")]
    BoundaryTouchesCritical { point: C64, distance: f64 },

    #[error(
        "region separates the conjugate pair images {first} and {second}, both in the spectrum"
    )]
    SplitConjugatePair { first: C64, second: C64 },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
