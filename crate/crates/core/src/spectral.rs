//! Gapped spectral density and the bath functions derived from it.
//!
//! Conventions: `G(t) = (1/pi) ∫ J(w) exp(-i (w - delta) t) dw` and its
//! Laplace transform `(1/pi) ∫ J(w) / (s + i (w - delta)) dw`. All band
//! integrals use `w = omega_b + u^2`, which turns the square-root edge into
//! a smooth integrand.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub omega_b: f64,
    pub omega0: f64,
    pub omega_c: f64,
    pub delta: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, omega_b: f64, omega0: f64, omega_c: f64, delta: f64) -> Self {
        Self { alpha, omega_b, omega0, omega_c, delta }
    }

    /// alpha = 1, omega_b = 5, omega0 = 100, omega_c = 800.
    pub fn standard(delta: f64) -> Self {
        Self::new(1.0, 5.0, 100.0, 800.0, delta)
    }

    /// alpha = 1, omega_b = 2, omega0 = 20, omega_c = 100.
    pub fn reduced(delta: f64) -> Self {
        Self::new(1.0, 2.0, 20.0, 100.0, delta)
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    /// Every violated constraint, as `field: message`.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let finite = |name: &str, x: f64, v: &mut Vec<String>| {
            if !x.is_finite() {
                v.push(format!("{name}: must be finite, got {x}"));
                false
            } else {
                true
            }
        };
        if finite("alpha", self.alpha, &mut v) && self.alpha < 0.0 {
            v.push(format!("alpha: must be >= 0, got {}", self.alpha));
        }
        if finite("omega_b", self.omega_b, &mut v) && self.omega_b <= 0.0 {
            v.push(format!("omega_b: must be > 0, got {}", self.omega_b));
        }
        let w0 = finite("omega0", self.omega0, &mut v) && self.omega0 > 0.0;
        if !w0 && self.omega0.is_finite() {
            v.push(format!("omega0: must be > 0, got {}", self.omega0));
        }
        if finite("omega_c", self.omega_c, &mut v) {
            if self.omega_c <= 0.0 {
                v.push(format!("omega_c: must be > 0, got {}", self.omega_c));
            } else if w0 && self.omega_c < 4.0 * self.omega0 {
                v.push(format!(
                    "omega_c: must be >= 4 * omega0 = {}, got {}",
                    4.0 * self.omega0,
                    self.omega_c
                ));
            }
        }
        if finite("delta", self.delta, &mut v) && self.delta < 0.0 {
            v.push(format!("delta: must be >= 0, got {}", self.delta));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    /// `Omega^2 = alpha omega0^{3/2} / (2 sqrt(pi))`, equal to `G(0)` without cutoff.
    pub fn omega_sq(&self) -> f64 {
        self.alpha * self.omega0.powf(1.5) / (2.0 * PI.sqrt())
    }

    /// Static environment shift `alpha sqrt(omega0/pi)`.
    pub fn omega_s(&self) -> f64 {
        self.alpha * (self.omega0 / PI).sqrt()
    }

    pub fn delta_l(&self) -> f64 {
        self.delta - self.omega_b
    }

    pub fn delta_l_tilde(&self) -> f64 {
        self.delta_l() - self.omega_s()
    }

    /// Upper end of the band support.
    pub fn band_top(&self) -> f64 {
        self.omega_b + self.omega_c
    }
}

pub fn spectral_density(p: &ModelParams, omega: f64) -> f64 {
    let u = omega - p.omega_b;
    if u <= 0.0 || u > p.omega_c {
        return 0.0;
    }
    p.alpha * u.sqrt() * (-u / p.omega0).exp()
}

/// Closed form `Omega^2 exp(i (delta - omega_b) t) / (1 + i omega0 t)^{3/2}` (no cutoff).
pub fn bath_correlation(p: &ModelParams, t: f64) -> C64 {
    let phase = C64::new(0.0, p.delta_l() * t).exp();
    let denom = C64::new(1.0, p.omega0 * t).powf(1.5);
    phase * p.omega_sq() / denom
}

/// `(1/pi) ∫ J(w) f(w) dw` over the band, in the variable `u = sqrt(w - omega_b)`.
pub fn band_integral<F>(p: &ModelParams, q: &Quadrature, breakpoints: &[f64], f: F) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    let umax = p.omega_c.sqrt();
    let mut points = vec![0.0];
    let mut bp: Vec<f64> = breakpoints.iter().copied().filter(|&u| u > 0.0 && u < umax).collect();
    bp.sort_by(f64::total_cmp);
    points.extend(bp);
    points.push(umax);
    let c = 2.0 * p.alpha / PI;
    let w0 = p.omega0;
    let ob = p.omega_b;
    let est = q.integrate_points(|u: f64| f(ob + u * u) * (c * u * u * (-u * u / w0).exp()), &points)?;
    Ok(est.value)
}

/// Real variant of [`band_integral`].
pub fn band_integral_real<F>(p: &ModelParams, q: &Quadrature, f: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let umax = p.omega_c.sqrt();
    let c = 2.0 * p.alpha / PI;
    let w0 = p.omega0;
    let ob = p.omega_b;
    Ok(q.integrate(|u: f64| f(ob + u * u) * c * u * u * (-u * u / w0).exp(), 0.0, umax)?.value)
}

/// Quadrature oracle for [`bath_correlation`], honouring the hard cutoff.
pub fn correlation_by_quadrature(p: &ModelParams, t: f64) -> Result<C64> {
    if p.alpha == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    // one panel per half oscillation of exp(-i u^2 t)
    let n = ((p.omega_c * t / PI).ceil() as usize).clamp(1, 5000);
    let bps: Vec<f64> = (1..n).map(|k| (p.omega_c * k as f64 / n as f64).sqrt()).collect();
    let q = Quadrature { abs_tol: 1e-13 * p.omega_sq().max(1e-300), rel_tol: 1e-10, max_intervals: 200_000 };
    band_integral(p, &q, &bps, |w| C64::new(0.0, -(w - p.delta) * t).exp())
}

/// Laplace transform of `G` on the right half-plane.
pub fn laplace_of_g(p: &ModelParams, s: C64) -> Result<C64> {
    if !(s.re > 0.0) {
        return Err(Error::InvalidArgument(format!("laplace_of_g needs Re(s) > 0, got {s}")));
    }
    laplace_integral(p, s)
}

/// The transform integral for any `s` off the segment `s = -i (w - delta)`,
/// `w` in the band. On the right half-plane this equals [`laplace_of_g`];
/// elsewhere it is the first-sheet continuation used by contour inverters.
pub fn laplace_integral(p: &ModelParams, s: C64) -> Result<C64> {
    if p.alpha == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    // integrand peaks where w = delta - Im(s)
    let w_peak = p.delta - s.im - p.omega_b;
    let bps = if w_peak > 0.0 { vec![w_peak.sqrt()] } else { vec![] };
    let q = Quadrature { abs_tol: 1e-12, rel_tol: 1e-10, max_intervals: 50_000 };
    band_integral(p, &q, &bps, |w| 1.0 / (s + C64::new(0.0, w - p.delta)))
}

/// `Sigma(E) = (1/pi) ∫ J(w) / (E - w) dw` for `E` off the band.
pub fn self_energy(p: &ModelParams, e: C64) -> Result<C64> {
    // at s = -i(E - delta) the transform integrand is i / (E - w)
    let s = C64::new(0.0, -1.0) * (e - p.delta);
    Ok(C64::new(0.0, -1.0) * laplace_integral(p, s)?)
}

/// `Sigma(omega_b) = -(1/pi) ∫ J(w) / (w - omega_b) dw`, finite at the edge.
pub fn band_edge_self_energy(p: &ModelParams) -> Result<f64> {
    let umax = p.omega_c.sqrt();
    let w0 = p.omega0;
    let v = Quadrature::default().integrate(|u: f64| (-u * u / w0).exp(), 0.0, umax)?.value;
    Ok(-2.0 * p.alpha / PI * v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales {
    pub omega_sq: f64,
    pub omega_s: f64,
    /// Polaron shift `(1/pi) ∫ J(w)/w dw` by quadrature.
    pub e_en: f64,
    /// `alpha sqrt(omega0/pi)`.
    pub e_en_approx: f64,
    pub delta_l: f64,
    pub delta_l_tilde: f64,
}

pub fn derived_scales(p: &ModelParams) -> Result<DerivedScales> {
    let e_en = if p.alpha == 0.0 {
        0.0
    } else {
        band_integral_real(p, &Quadrature::default(), |w| 1.0 / w)?
    };
    Ok(DerivedScales {
        omega_sq: p.omega_sq(),
        omega_s: p.omega_s(),
        e_en,
        e_en_approx: p.alpha * (p.omega0 / PI).sqrt(),
        delta_l: p.delta_l(),
        delta_l_tilde: p.delta_l_tilde(),
    })
}
