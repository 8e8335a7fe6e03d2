//! Error types shared by the math modules.

use thiserror::Error;

/// Errors produced by the rotation, filter and bound computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A rotation axis must have unit norm.
    #[error("rotation axis must be unit length, got norm {norm}")]
    NonUnitAxis { norm: f64 },

    /// A raw 3x3 matrix failed the orthonormality / determinant checks.
    #[error("matrix is not a rotation: orthonormality defect {defect:e}")]
    NotRotation { defect: f64 },

    /// A raw 3x3 matrix is not symmetric.
    #[error("matrix is not symmetric: asymmetry defect {defect:e}")]
    NotSymmetric { defect: f64 },

    /// The Rodrigues parameterization blows up on half-turns.
    #[error("rotation too close to a half-turn: |R|_I = {dist_identity}")]
    NearHalfTurn { dist_identity: f64 },

    /// The induced gain matrix 1/2*(tr(A) I - A) must be positive definite.
    #[error("induced gain matrix is not positive definite: min eigenvalue {min_eigenvalue}")]
    GainNotPositiveDefinite { min_eigenvalue: f64 },

    /// Vector observations must contain two noncollinear directions.
    #[error("degenerate vector observations: cross-product norm {cross_norm:e}")]
    DegenerateObservation { cross_norm: f64 },

    /// The configured weighting matrix must be built from the observation
    /// geometry itself; anything else breaks the vector-form identities.
    #[error("weighting matrix does not match the observation geometry: defect {defect:e}")]
    WeightingMismatch { defect: f64 },

    /// The rotation angle is too close to 0 or pi for the axis to be defined.
    #[error("rotation axis undefined: |R|_I = {dist_identity} is too close to 0 or 1")]
    AxisUndefined { dist_identity: f64 },

    /// A scalar argument violated its domain; the constraint names the
    /// violated inequality.
    #[error("{name} = {value} violates {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
