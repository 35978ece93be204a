//! Numerical inversion of `A(s) = 1 / (s + L[G](s))`.
//!
//! Two unrelated inverters are used. Piessens' method expands `s F(s)` in
//! Chebyshev polynomials of `1 - 2b/s` on the real axis and inverts term by
//! term; it needs no complex evaluations but the term inverses grow with
//! `b t`, so it loses accuracy at late times. The contour method integrates
//! along a Talbot-type path wrapped around the singular segment on the
//! imaginary axis.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{AmplitudeSeries, Frame, Method};
use crate::error::{Error, Result};
use crate::spectral::{band_edge_self_energy, laplace_integral, ModelParams};

/// Inverter disagreement above which a point is flagged.
pub const DISAGREEMENT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiessensConfig {
    pub terms: usize,
    pub b: f64,
}

impl Default for PiessensConfig {
    fn default() -> Self {
        Self { terms: 30, b: 10.0 }
    }
}

/// Chebyshev coefficients of `s F(s)` in the variable `x = 1 - 2b/s`.
pub fn piessens_coefficients<F>(f: F, cfg: &PiessensConfig) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = cfg.terms;
    let mut vals = Vec::with_capacity(n);
    
    for j in 0..n {
        let x = (PI * (j as f64 + 0.5) / n as f64).cos();
        let s = 2.0 * cfg.b / (1.0 - x);
        vals.push(s * f(s)?);

    }
    Ok((0..n)
        .map(|k| {
            let c: f64 = (0..n).map(|j| vals[j] * (k as f64 * (PI * (j as f64 + 0.5) / n as f64)).cos()).sum();
            let c = 2.0 * c / n as f64;
            if k == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect())
}

/// `2F2(-k, k; 1/2, 1; x)`, the inverse transform of `T_k(1 - 2b/s) / s` at `x = b t`.
pub fn hyp2f2_term(k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut j = 1.0;
    while j <= k {
        term *= (j - 1.0 - k) * (k + j - 1.0) / ((j - 0.5) * j * j) * x;
        sum += term;
        j += 1.0;
    }
    sum
}

/// Piessens estimate at `t` and a tail-based error estimate.
pub fn piessens_eval(coeffs: &[f64], b: f64, t: f64) -> (f64, f64) {
    let x = b * t;
    let mut sum = 0.0;
    let n = coeffs.len();
    let mut tail = 0.0;
    for (k, c) in coeffs.iter().enumerate() {
        let v = c * hyp2f2_term(k, x);
        sum += v;
        if k + 2 >= n {
            tail += v.abs();
        }
    }
    (sum, tail)
}

/// Complex transforms are split into real and imaginary parts, each
/// inverted as a real-valued function of real `s`.
pub fn piessens<F>(f: F, times: &[f64], cfg: &PiessensConfig) -> Result<Vec<(C64, f64)>>
where
    F: Fn(f64) -> Result<C64>,
{
    let re = piessens_coefficients(|s| f(s).map(|v| v.re), cfg)?;
    let im = piessens_coefficients(|s| f(s).map(|v| v.im), cfg)?;
    Ok(times
        .iter()
        .map(|&t| {
            let (a, ea) = piessens_eval(&re, cfg.b, t);
            let (b, eb) = piessens_eval(&im, cfg.b, t);
            (C64::new(a, b), ea.hypot(eb))
        })
        .collect())
}

/// Singularities of the transform are confined to `i [center - half, center + half]`
/// plus the negative real half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TalbotContour {
    pub center: f64,
    pub half_length: f64,
}

impl TalbotContour {
    fn shape(&self, t: f64) -> (f64, f64, usize) {
        let mu = 4.0 / t;
        let nu = (1.3 * 2.0 * self.half_length / (mu * PI)).max(1.0);
        let nodes = ((50.0 * nu).ceil() as usize).max(128);
        (mu, nu, nodes + nodes % 2)
    }
}

/// Contour integral along `s = i c + mu (theta cot theta + i nu theta)`,
/// midpoint rule in `theta`.
pub fn talbot<F>(f: &F, t: f64, contour: &TalbotContour) -> Result<C64>
where
    F: Fn(C64) -> Result<C64>,
{
    let (mu, nu, n) = contour.shape(t);
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let theta = -PI + (j as f64 + 0.5) * 2.0 * PI / n as f64;
        let (sn, cs) = theta.sin_cos();
        let cot = if theta == 0.0 { 0.0 } else { cs / sn };
        let re = if theta == 0.0 { mu } else { mu * theta * cot };
        if re * t < -700.0 {
            continue;
        }
        let s = C64::new(re, contour.center + mu * nu * theta);
        let ds = if theta == 0.0 {
            C64::new(0.0, mu * nu)
        } else {
            C64::new(mu * (cot - theta / (sn * sn)), mu * nu)
        };
        acc += (s * t).exp() * f(s)? * ds;
    }
    Ok(acc / C64::new(0.0, n as f64))
}

#[derive(Debug, Clone)]
pub struct LaplaceInversion {
    /// Piessens value where it agrees with the contour result, the contour
    /// value elsewhere.
    pub series: AmplitudeSeries,
    pub piessens: Vec<C64>,
    pub piessens_error: Vec<f64>,
    pub talbot: Vec<C64>,
    pub disagreement: Vec<f64>,
    pub flagged: Vec<bool>,
}

impl LaplaceInversion {
    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|f| **f).count()
    }
}

/// Contour enclosing the band cut and any bound-state pole, in the rotating frame.
pub fn amplitude_contour(p: &ModelParams) -> Result<TalbotContour> {
    let edge = if p.alpha == 0.0 { 0.0 } else { band_edge_self_energy(p)? };
    let lo = (p.delta + edge).min(p.omega_b).min(p.delta) - 1.0;
    let hi = p.band_top().max(p.delta) + 1.0;
    // energies E map to Im s = delta - E
    Ok(TalbotContour { center: p.delta - 0.5 * (lo + hi), half_length: 0.5 * (hi - lo) })
}

/// Rotating-frame amplitude transform.
pub fn amplitude_transform(p: &ModelParams, s: C64) -> Result<C64> {
    Ok(1.0 / (s + laplace_integral(p, s)?))
}

pub fn laplace_invert(p: &ModelParams, times: &[f64]) -> Result<LaplaceInversion> {
    laplace_invert_with(p, times, &PiessensConfig::default())
}

pub fn laplace_invert_with(p: &ModelParams, times: &[f64], cfg: &PiessensConfig) -> Result<LaplaceInversion> {
    p.validate()?;
    if let Some(t) = times.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::InvalidArgument(format!("inversion times must be > 0, got {t}")));
    }
    let f = |s: C64| amplitude_transform(p, s);
    let pies = piessens(|s: f64| f(C64::new(s, 0.0)), times, cfg)?;
    let contour = amplitude_contour(p)?;
    let mut talb = Vec::with_capacity(times.len());
    for &t in times {
        talb.push(talbot(&f, t, &contour)?);
    }
    let mut values = Vec::with_capacity(times.len());
    let mut disagreement = Vec::with_capacity(times.len());
    let mut flagged = Vec::with_capacity(times.len());
    for ((pv, _), tv) in pies.iter().zip(&talb) {
        let d = (pv - tv).norm();
        disagreement.push(d);
        flagged.push(!(d <= DISAGREEMENT_TOL));
        values.push(if d <= DISAGREEMENT_TOL { *pv } else { *tv });
    }
    Ok(LaplaceInversion {
        series: AmplitudeSeries {
            times: times.to_vec(),
            values,
            method: Method::Laplace,
            frame: Frame::Rotating,
            params: *p,
        },
        piessens: pies.iter().map(|(v, _)| *v).collect(),
        piessens_error: pies.iter().map(|(_, e)| *e).collect(),
        talbot: talb,
        disagreement,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyp2f2_matches_chebyshev_at_small_argument() {
        // 2F2(-k,k;1/2,1;x) = 1 - 2k^2 x + O(x^2)
        for k in 0..6 {
            let x = 1e-9;
            let v = hyp2f2_term(k, x);
            assert!((v - (1.0 - 2.0 * (k * k) as f64 * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn talbot_inverts_exponential() {
        let a = 2.5;
        let f = |s: C64| Ok(1.0 / (s + a));
        let c = TalbotContour { center: 0.0, half_length: 0.0 };
        for t in [0.1, 0.5, 1.0, 2.0, 3.0] {
            let v = talbot(&f, t, &c).unwrap();
            assert!((v.re - (-a * t).exp()).abs() < 1e-8, "t={t} {v}");
            assert!(v.im.abs() < 1e-8);
        }
    }
}
