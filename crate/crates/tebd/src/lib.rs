//! Matrix-product-state time evolution of a two-level emitter coupled to
//! the first site of a bosonic chain.

pub mod error;
pub mod evolve;
pub mod gates;
pub mod mps;
pub mod ops;

pub use error::{Error, Result};
pub use evolve::{convergence_protocol, evolve, tebd_step, ConvergenceReport, EvolutionConfig, TimeSeries};
pub use gates::{build_gates, Gates, Mode};
pub use mps::{AtomState, MpsState, Truncation};
