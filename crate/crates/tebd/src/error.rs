use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] bandgap_core::Error),
    #[error("invalid evolution config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("discarded weight {discarded:e} in step {step} exceeds the truncation limit")]
    TruncationExplosion { step: usize, discarded: f64 },
    #[error("operator of dimension {got} on a site of dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("site {site} out of range (chain has {len} sites)")]
    SiteOutOfRange { site: usize, len: usize },
    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn linalg<E: std::fmt::Display>(e: E) -> Error {
    Error::Linalg(e.to_string())
}
