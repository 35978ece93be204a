//! Numerical core for a two-level emitter coupled to a gapped photonic
//! band: spectral functions, chain mapping, exact single-excitation (RWA)
//! solvers, variational polaron theory and time-series analysis.

pub mod analysis;
pub mod chain;
pub mod error;
pub mod polaron;
pub mod quadrature;
pub mod rwa;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use spectral::ModelParams;
