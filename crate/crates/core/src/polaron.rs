//! Silbey–Harris variational polaron: the self-consistent renormalised
//! splitting `D = delta exp(-(2/pi) ∫ J(w) / (w + D)^2 dw)` and the
//! residual excited populations it implies.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::spectral::ModelParams;

pub const DAMPING: f64 = 0.5;
pub const MAX_ITERATIONS: usize = 500;
/// Convergence target as a fraction of `delta`.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaronSolution {
    pub delta_tilde: f64,
    pub phi: f64,
    pub p_up_relaxed: f64,
    pub p_up_dressed: f64,
    pub iterations: usize,
    pub residual: f64,
    /// True when the damped map stalled and bisection finished the solve.
    pub bisected: bool,
}

/// Upper limit of the dressing integral above the band edge.
pub fn integration_width(p: &ModelParams) -> f64 {
    p.omega_c.min(60.0 * p.omega0)
}

/// `(2/pi) ∫ J(w) / (w + x)^2 dw`.
pub fn dressing_exponent(p: &ModelParams, x: f64) -> Result<f64> {
    if p.alpha == 0.0 {
        return Ok(0.0);
    }
    let umax = integration_width(p).sqrt();
    let (a, wb, w0) = (p.alpha, p.omega_b, p.omega0);
    // w = omega_b + u^2
    let f = |u: f64| {
        let u2 = u * u;
        let d = wb + u2 + x;
        4.0 * a * u2 * (-u2 / w0).exp() / (d * d)
    };
    let q = Quadrature::new(1e-14, 1e-12);
    Ok(q.integrate(f, 0.0, umax)?.value / PI)
}

fn rhs(p: &ModelParams, x: f64) -> Result<f64> {
    Ok(p.delta * (-dressing_exponent(p, x)?).exp())
}

fn solution(p: &ModelParams, x: f64, iterations: usize, residual: f64, bisected: bool) -> PolaronSolution {
    let phi = x / p.delta;
    PolaronSolution {
        delta_tilde: x,
        phi,
        p_up_relaxed: 0.5 * (1.0 - phi),
        p_up_dressed: 0.5 * (1.0 + phi),
        iterations,
        residual,
        bisected,
    }
}

pub fn silbey_harris_solve(p: &ModelParams) -> Result<PolaronSolution> {
    p.validate()?;
    if p.delta <= 0.0 {
        return Err(Error::InvalidArgument("delta = 0 leaves phi undefined".into()));
    }
    let tol = RESIDUAL_TOL * p.delta;
    let mut x = p.delta;
    let mut last_defect = f64::INFINITY;
    let mut iterations = 0;
    let mut stalled = false;
    while iterations < MAX_ITERATIONS {
        let r = rhs(p, x)?;
        let defect = (r - x).abs();
        iterations += 1;
        if defect < tol {
            return Ok(solution(p, x, iterations, defect, false));
        }
        if defect >= last_defect {
            log::debug!("damped polaron map stalled at iteration {iterations}, defect {defect:e}");
            stalled = true;
            break;
        }
        last_defect = defect;
        x = (1.0 - DAMPING) * x + DAMPING * r;
    }
    if !stalled {
        log::debug!("damped polaron map used all {MAX_ITERATIONS} iterations");
    }
    // f(x) = x - rhs(x) is negative at 0 and non-negative at delta
    let (mut lo, mut hi) = (0.0, p.delta);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = mid - rhs(p, mid)?;
        iterations += 1;
        if f.abs() < tol || hi - lo < 1e-15 * p.delta {
            return Ok(solution(p, mid, iterations, f.abs(), true));
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    Err(Error::NonConvergence { iterations, last: mid, defect: (mid - rhs(p, mid)?).abs() })
}

/// Residual excited population implied by the polaron solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum ResidualPopulation {
    /// `delta > omega_b`: relaxation into the polaron ground state.
    Relaxed { value: f64 },
    /// `delta < omega_b`: relaxation blocked, dressed excited state.
    Dressed { value: f64 },
    /// `delta = omega_b`: both predictions.
    Boundary { relaxed: f64, dressed: f64 },
}

impl ResidualPopulation {
    /// The single prediction, or the relaxed one on the boundary.
    pub fn value(&self) -> f64 {
        match *self {
            ResidualPopulation::Relaxed { value } | ResidualPopulation::Dressed { value } => value,
            ResidualPopulation::Boundary { relaxed, .. } => relaxed,
        }
    }
}

pub fn residual_population(sol: &PolaronSolution, p: &ModelParams) -> ResidualPopulation {
    if p.delta > p.omega_b {
        ResidualPopulation::Relaxed { value: sol.p_up_relaxed }
    } else if p.delta < p.omega_b {
        ResidualPopulation::Dressed { value: sol.p_up_dressed }
    } else {
        ResidualPopulation::Boundary { relaxed: sol.p_up_relaxed, dressed: sol.p_up_dressed }
    }
}

/// `delta (1 - alpha / sqrt(delta))`, meant for `omega_b << delta << omega0`.
pub fn approx_large_delta(p: &ModelParams) -> f64 {
    if p.delta < 3.0 * p.omega_b || p.delta > p.omega0 / 3.0 {
        log::warn!(
            "approx_large_delta outside omega_b << delta << omega0 (delta={}, omega_b={}, omega0={})",
            p.delta,
            p.omega_b,
            p.omega0
        );
    }
    if p.alpha == 0.0 {
        return p.delta;
    }
    p.delta * (1.0 - p.alpha / p.delta.sqrt())
}

/// `delta exp(-alpha / sqrt(omega_b))`, for `delta << omega_b`.
pub fn adiabatic_renorm(p: &ModelParams) -> f64 {
    p.delta * (-p.alpha / p.omega_b.sqrt()).exp()
}
