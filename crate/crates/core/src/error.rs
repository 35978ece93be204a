use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature did not converge: error {error:.3e} > tolerance {tolerance:.3e} after {intervals} intervals")]
    Quadrature { error: f64, tolerance: f64, intervals: usize },
    #[error("zero weight: chain mapping is undefined for alpha = 0")]
    ZeroWeight,
    #[error("quadrature undersamples the recurrence: need M >= 10 N (M = {m}, N = {n})")]
    InsufficientOversampling { m: usize, n: usize },
    #[error("loss of orthogonality at n = {n} (beta = {beta:.3e})")]
    LossOfOrthogonality { n: usize, beta: f64 },
    #[error("step size rejected: halving dt changed |A|^2 by {deviation:.3e}")]
    StepSizeRejected { deviation: f64 },
    #[error("light-cone violation: tail occupation {occupation:.3e} at t = {time}")]
    LightConeViolation { time: f64, occupation: f64 },
    #[error("no convergence after {iterations} iterations (last iterate {last}, defect {defect:.3e})")]
    NonConvergence { iterations: usize, last: f64, defect: f64 },
    #[error("insufficient periods: {periods:.2} periods in window, need at least 3")]
    InsufficientPeriods { periods: f64 },
    #[error("no dominant peak in spectrum")]
    NoDominantPeak,
    #[error("insufficient decay: envelope decays by factor {factor:.3}, need e")]
    InsufficientDecay { factor: f64 },
    #[error("window too short: {window} < 10 periods of {period}")]
    WindowTooShort { window: f64, period: f64 },
    #[error("linear algebra failure: {0}")]
    Linalg(String),
}
