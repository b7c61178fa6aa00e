use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point is off the manifold: distance {dist:.3e} exceeds tolerance {tol:.1e}")]
    OffManifold { dist: f64, tol: f64 },

    #[error("vector is not tangent at the base point (normal component {0:.3e})")]
    NotTangent(f64),

    #[error("vector is not unit length (|v| = {0})")]
    NotUnit(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("paths live on different time grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("decomposition does not reconstruct the path (max residual {0:.3e})")]
    BadDecomposition(f64),

    #[error("jump cap violated: scaled jump size {got:.6} exceeds cap {cap:.6}")]
    JumpCapViolated { got: f64, cap: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
