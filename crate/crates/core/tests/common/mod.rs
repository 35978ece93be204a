#![allow(dead_code)]

//! Exact rotating-frame amplitude from the spectral representation
//! `A(t) = Z exp(-i (E_p - delta) t) + ∫ rho(E) exp(-i (E - delta) t) dE`,
//! built independently of the solvers under test.

use std::f64::consts::PI;

use bandgap_core::quadrature::{gauss_legendre, Quadrature};
use bandgap_core::spectral::ModelParams;
use bandgap_core::C64;

fn q() -> Quadrature {
    Quadrature { abs_tol: 1e-13, rel_tol: 1e-11, max_intervals: 100_000 }
}

/// `(1/pi) ∫ J(w) / (E - w) dw` for `E < omega_b`, and its derivative.
fn sigma_below(p: &ModelParams, e: f64) -> (f64, f64) {
    let (a, wb, w0) = (p.alpha, p.omega_b, p.omega0);
    let umax = p.omega_c.sqrt();
    let d = |u: f64| e - wb - u * u;
    let s = q().integrate(|u: f64| 2.0 * a * u * u * (-u * u / w0).exp() / d(u), 0.0, umax).unwrap().value;
    let ds = q().integrate(|u: f64| 2.0 * a * u * u * (-u * u / w0).exp() / (d(u) * d(u)), 0.0, umax).unwrap().value;
    (s / PI, -ds / PI)
}

/// Principal value of the self energy at `E = omega_b + v^2` inside the band.
fn sigma_pv(p: &ModelParams, v: f64) -> f64 {
    let (a, w0) = (p.alpha, p.omega0);
    let umax = p.omega_c.sqrt();
    let f = |u: f64| 2.0 * a * u * u * (-u * u / w0).exp() / (v + u);
    let fv = f(v);
    let reg = q().integrate_points(|u: f64| if u == v { 0.0 } else { (f(u) - fv) / (v - u) }, &[0.0, v, umax]);
    (reg.unwrap().value + fv * (v / (umax - v)).ln()) / PI
}

fn density(p: &ModelParams, v: f64) -> f64 {
    let e = p.omega_b + v * v;
    let j = p.alpha * v * (-v * v / p.omega0).exp();
    let r = e - p.delta - sigma_pv(p, v);
    j / (PI * (r * r + j * j))
}

/// Bound state below the band: `(E_p, Z)`.
pub fn bound_state(p: &ModelParams) -> Option<(f64, f64)> {
    let f = |e: f64| e - p.delta - sigma_below(p, e).0;
    let hi = p.omega_b - 1e-12;
    if f(hi) <= 0.0 {
        return None;
    }
    let mut lo = hi - 1.0;
    while f(lo) > 0.0 {
        lo = p.omega_b - 2.0 * (p.omega_b - lo);
    }
    let mut hi = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let e = 0.5 * (lo + hi);
    Some((e, 1.0 / (1.0 - sigma_below(p, e).1)))
}

/// Continuum weight `∫ rho(E) dE` over the whole band.
pub fn continuum_weight(p: &ModelParams) -> f64 {
    let umax = p.omega_c.sqrt();
    q().integrate(|v: f64| 2.0 * v * density(p, v), 0.0, umax).unwrap().value
}

/// Tabulated continuum on `v in [0, vmax]` for repeated time evaluation.
pub struct ExactOracle {
    pole: Option<(f64, f64)>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    delta: f64,
    omega_b: f64,
}

impl ExactOracle {
    /// `vmax` truncates the oscillatory continuum; the neglected boundary term
    /// is of order `alpha / (pi vmax^3 t)`.
    pub fn new(p: &ModelParams, vmax: f64, t_max: f64) -> Self {
        let (x, w) = gauss_legendre(16);
        // a few radians of exp(-i v^2 t) per panel
        let panels = ((vmax * vmax * t_max / 2.0).ceil() as usize).max(64);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for k in 0..panels {
            let (a, b) = (vmax * k as f64 / panels as f64, vmax * (k + 1) as f64 / panels as f64);
            for (xi, wi) in x.iter().zip(&w) {
                let v = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                nodes.push(v);
                weights.push(0.5 * (b - a) * wi * 2.0 * v * density(p, v));
            }
        }
        Self { pole: bound_state(p), nodes, weights, delta: p.delta, omega_b: p.omega_b }
    }

    pub fn amplitude(&self, t: f64) -> C64 {
        let mut acc = match self.pole {
            Some((e, z)) => C64::new(0.0, -(e - self.delta) * t).exp() * z,
            None => C64::new(0.0, 0.0),
        };
        for (v, w) in self.nodes.iter().zip(&self.weights) {
            acc += C64::new(0.0, -(self.omega_b + v * v - self.delta) * t).exp() * *w;
        }
        acc
    }

    pub fn bound_population(&self) -> f64 {
        self.pole.map_or(0.0, |(_, z)| z * z)
    }
}
