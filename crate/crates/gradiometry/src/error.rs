//! Error type shared by every module of the crate.

/// Errors reported by geometry construction, analytic formulas, and the
/// exact simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no singlet state exists: {0}")]
    NoSinglet(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("unnormalized profile: {0}")]
    UnnormalizedProfile(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
