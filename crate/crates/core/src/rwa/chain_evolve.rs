//! Single-excitation propagation on the chain by exact diagonalisation.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use super::{uniform_grid, AmplitudeSeries, Frame, Method};
use crate::chain::ChainCoefficients;
use crate::error::{Error, Result};

/// Tail occupation above which a run is said to have hit the chain end.
pub const LIGHT_CONE_TOL: f64 = 1e-6;

/// Eigen-decomposition of the `(N+1) x (N+1)` single-excitation Hamiltonian
/// with the atom on index 0.
#[derive(Debug, Clone)]
pub struct ChainPropagator {
    energies: Array1<f64>,
    vectors: Array2<f64>,
}

impl ChainPropagator {
    pub fn new(c: &ChainCoefficients, delta: f64) -> Result<Self> {
        let n = c.n + 1;
        let mut h = Array2::<f64>::zeros((n, n));
        h[[0, 0]] = delta;
        for (i, e) in c.eps.iter().enumerate() {
            h[[i + 1, i + 1]] = *e;
        }
        h[[0, 1]] = c.g;
        h[[1, 0]] = c.g;
        for (i, t) in c.t.iter().enumerate() {
            h[[i + 1, i + 2]] = *t;
            h[[i + 2, i + 1]] = *t;
        }
        let (energies, vectors) = h.eigh(UPLO::Lower).map_err(|e| Error::Linalg(e.to_string()))?;
        Ok(Self { energies, vectors })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `<i| e^{-iHt} |j>`.
    pub fn site_propagator(&self, i: usize, j: usize, t: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..self.dim() {
            let w = self.vectors[[j, k]] * self.vectors[[i, k]];
            acc += C64::new(0.0, -self.energies[k] * t).exp() * w;
        }
        acc
    }

    /// Amplitude on `site` (0 = atom) at time `t`, starting from the atom.
    pub fn amplitude_at(&self, site: usize, t: f64) -> C64 {
        self.site_propagator(site, 0, t)
    }

    /// All site amplitudes at time `t`.
    pub fn state_at(&self, t: f64) -> Vec<C64> {
        let n = self.dim();
        let phases: Vec<C64> =
            (0..n).map(|k| C64::new(0.0, -self.energies[k] * t).exp() * self.vectors[[0, k]]).collect();
        (0..n)
            .map(|i| (0..n).map(|k| phases[k] * self.vectors[[i, k]]).sum())
            .collect()
    }

    pub fn tail_occupation(&self, t: f64) -> f64 {
        self.amplitude_at(self.dim() - 1, t).norm_sqr()
    }
}

/// Result of an unchecked chain run: lab-frame atom amplitude and the
/// occupation of the last chain site.
#[derive(Debug, Clone)]
pub struct ChainRun {
    pub series: AmplitudeSeries,
    pub tail_occupation: Vec<f64>,
    pub first_violation: Option<f64>,
}

/// Runs without enforcing the light cone, for deliberately short chains.
pub fn chain_evolve_unchecked(c: &ChainCoefficients, delta: f64, t_max: f64, samples: usize) -> Result<ChainRun> {
    if samples == 0 || !(t_max > 0.0) {
        return Err(Error::InvalidArgument(format!("need samples >= 1 and t_max > 0, got {samples}, {t_max}")));
    }
    let prop = ChainPropagator::new(c, delta)?;
    let times = uniform_grid(t_max, samples);
    let values: Vec<C64> = times.iter().map(|&t| prop.amplitude_at(0, t)).collect();
    let tail: Vec<f64> = times.iter().map(|&t| prop.tail_occupation(t)).collect();
    let first_violation = times.iter().zip(&tail).find(|(_, o)| **o > LIGHT_CONE_TOL).map(|(t, _)| *t);
    let params = c.params.with_delta(delta);
    Ok(ChainRun {
        series: AmplitudeSeries { times, values, method: Method::Chain, frame: Frame::Lab, params },
        tail_occupation: tail,
        first_violation,
    })
}

/// Lab-frame atom amplitude on `samples + 1` uniform points of `[0, t_max]`.
/// Fails if the excitation reaches the end of the chain.
pub fn chain_evolve(c: &ChainCoefficients, delta: f64, t_max: f64, samples: usize) -> Result<AmplitudeSeries> {
    let run = chain_evolve_unchecked(c, delta, t_max, samples)?;
    if let Some(time) = run.first_violation {
        let i = run.series.times.iter().position(|t| *t == time).unwrap_or(0);
        return Err(Error::LightConeViolation { time, occupation: run.tail_occupation[i] });
    }
    Ok(run.series)
}
