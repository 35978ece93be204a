//! Exact single-excitation dynamics under the rotating-wave approximation.
//!
//! With the atom initially excited and the field in vacuum, the excited
//! amplitude obeys `dA/dt = -∫ G(t - s) A(s) ds` in the frame rotating at
//! `delta`. Three independent solvers are provided (Volterra stepping,
//! numerical Laplace inversion, exact chain diagonalisation) plus the
//! asymptotic long-time form.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::analysis::Trace;
use crate::spectral::ModelParams;

pub mod analytic;
pub mod chain_evolve;
pub mod laplace;
pub mod volterra;

pub use analytic::{analytic_longtime, branch_integral, classify_regime, Regime, RegimeClassification};
pub use chain_evolve::{chain_evolve, ChainPropagator};
pub use laplace::{laplace_invert, piessens, talbot, LaplaceInversion, PiessensConfig, TalbotContour};
pub use volterra::volterra_solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Volterra,
    Laplace,
    Chain,
    Analytic,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Volterra => "volterra",
            Method::Laplace => "laplace",
            Method::Chain => "chain",
            Method::Analytic => "analytic",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "volterra" => Ok(Method::Volterra),
            "laplace" => Ok(Method::Laplace),
            "chain" => Ok(Method::Chain),
            "analytic" => Ok(Method::Analytic),
            _ => Err(format!("unknown method '{s}'")),
        }
    }
}

/// Lab frame carries the free phase `exp(-i delta t)`; the rotating frame removes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Lab,
    Rotating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSeries {
    pub times: Vec<f64>,
    pub values: Vec<C64>,
    pub method: Method,
    pub frame: Frame,
    pub params: ModelParams,
}

impl AmplitudeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn population(&self) -> Vec<f64> {
        self.values.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn in_frame(&self, frame: Frame) -> AmplitudeSeries {
        if frame == self.frame {
            return self.clone();
        }
        let sign = if frame == Frame::Rotating { 1.0 } else { -1.0 };
        let values = self
            .times
            .iter()
            .zip(&self.values)
            .map(|(&t, &a)| a * C64::new(0.0, sign * self.params.delta * t).exp())
            .collect();
        AmplitudeSeries { values, frame, ..self.clone() }
    }
}

/// Grid `t_j = j t_max / steps`, `j = 0..=steps`.
pub fn uniform_grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|j| t_max * j as f64 / steps as f64).collect()
}

/// `sup |pop_a - pop_b|` over samples with `t <= t_max`. Both series must share a grid.
pub fn population_deviation(a: &AmplitudeSeries, b: &AmplitudeSeries, t_max: f64) -> f64 {
    a.times
        .iter()
        .zip(a.values.iter().zip(&b.values))
        .filter(|(t, _)| **t <= t_max * (1.0 + 1e-12))
        .map(|(_, (x, y))| (x.norm_sqr() - y.norm_sqr()).abs())
        .fold(0.0, f64::max)
}

/// `<sigma_x(t)>` for the initial state `(|g> + |e>)/sqrt(2)`: the real part
/// of the lab-frame amplitude.
pub fn rwa_coherence(series: &AmplitudeSeries) -> Trace {
    let lab = series.in_frame(Frame::Lab);
    Trace { times: lab.times, values: lab.values.iter().map(|a| a.re).collect() }
}
