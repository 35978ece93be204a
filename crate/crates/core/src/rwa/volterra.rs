//! Product-integration trapezoidal scheme for the amplitude equation.
//!
//! `A` is taken piecewise linear between grid points so the memory integral
//! reduces to weighted sums with the kernel moments over each step,
//! `P_i = ∫ G(s) (s - ih)/h ds` and `Q_i = ∫ G(s) ((i+1)h - s)/h ds` on
//! `[ih, (i+1)h]`. The implicit trapezoid update is linear in the new value
//! and is solved in closed form.

use num_complex::Complex64 as C64;

use super::{AmplitudeSeries, Frame, Method};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::spectral::{bath_correlation, ModelParams};

const SELF_TEST_TOL: f64 = 1e-4;

fn kernel_moments(p: &ModelParams, h: f64, n: usize) -> (Vec<C64>, Vec<C64>) {
    let (x, w) = gauss_legendre(8);
    let mut pm = Vec::with_capacity(n);
    let mut qm = Vec::with_capacity(n);
    for i in 0..n {
        let a = i as f64 * h;
        let mut pi = C64::new(0.0, 0.0);
        let mut qi = C64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(&w) {
            let frac = 0.5 * (xi + 1.0);
            let g = bath_correlation(p, a + h * frac) * (0.5 * h * wi);
            pi += g * frac;
            qi += g * (1.0 - frac);
        }
        pm.push(pi);
        qm.push(qi);
    }
    (pm, qm)
}

/// Solves on `t_j = j dt` up to `t_max` with the given initial amplitude.
/// No step-size validation.
pub fn volterra_raw(p: &ModelParams, t_max: f64, dt: f64, a0: C64) -> Vec<C64> {
    let steps = (t_max / dt).round() as usize;
    let (pm, qm) = kernel_moments(p, dt, steps.max(1));
    let mut a = Vec::with_capacity(steps + 1);
    a.push(a0);
    let mut f_prev = C64::new(0.0, 0.0);
    let denom = 1.0 + 0.5 * dt * qm[0];
    for n in 0..steps {
        // memory integral at t_{n+1} without the A_{n+1} term
        let m = n + 1;
        let mut rest = pm[m - 1] * a[0];
        for k in 1..m {
            rest += (pm[k - 1] + qm[k]) * a[m - k];
        }
        let next = (a[n] - 0.5 * dt * (f_prev + rest)) / denom;
        f_prev = qm[0] * next + rest;
        a.push(next);
    }
    a
}

/// Rotating-frame amplitude on the grid `j dt`, validated by a step-halving
/// self test. The returned values come from the halved-step run.
pub fn volterra_solve(p: &ModelParams, t_max: f64, dt: f64) -> Result<AmplitudeSeries> {
    p.validate()?;
    if !(t_max > 0.0) {
        return Err(Error::InvalidArgument(format!("t_max must be > 0, got {t_max}")));
    }
    if !(dt > 0.0) || dt > 0.1 / p.omega0 * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "dt must lie in (0, 0.1/omega0 = {}], got {dt}",
            0.1 / p.omega0
        )));
    }
    let one = C64::new(1.0, 0.0);
    let coarse = volterra_raw(p, t_max, dt, one);
    let fine = volterra_raw(p, t_max, 0.5 * dt, one);
    let values: Vec<C64> = (0..coarse.len()).map(|j| fine[2 * j]).collect();
    let deviation = coarse
        .iter()
        .zip(&values)
        .map(|(c, f)| (c.norm_sqr() - f.norm_sqr()).abs())
        .fold(0.0, f64::max);
    if deviation >= SELF_TEST_TOL {
        return Err(Error::StepSizeRejected { deviation });
    }
    let times = (0..values.len()).map(|j| j as f64 * dt).collect();
    Ok(AmplitudeSeries { times, values, method: Method::Volterra, frame: Frame::Rotating, params: *p })
}
