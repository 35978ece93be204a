//! Long-time asymptotics of the amplitude for `omega0` much larger than
//! every other scale, where `L[G](s) ~ -i omega_s + i alpha sqrt(-i s - delta_L)`.
//!
//! `A(t) = c1 exp(i (r1^2 + delta_L) t) + I(t)` with `r± = -alpha/2 ± sqrt(alpha^2/4 - delta_L_tilde)`
//! and the branch-cut integral
//! `I(t) = e^{i pi/4} (alpha/pi) ∫ sqrt(x) e^{(-x + i delta_L) t} / ((-x + i delta_L_tilde)^2 + i alpha^2 x) dx`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{AmplitudeSeries, Frame, Method};
use crate::error::Result;
use crate::quadrature::Quadrature;
use crate::spectral::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `0 < delta_L_tilde <= alpha^2/2`: no pole, full decay.
    GapDip,
    /// `delta_L_tilde > alpha^2/2`: decaying pole.
    AboveBand,
    /// `delta_L_tilde <= 0`: bound state.
    BelowBand,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeClassification {
    pub regime: Regime,
    pub r_plus: C64,
    pub r_minus: C64,
    pub r1: C64,
    pub c1: C64,
    pub delta_l_tilde: f64,
}

impl RegimeClassification {
    /// `lim |A(t)|^2`: `|c1|^2` for a bound state, zero otherwise.
    pub fn stationary_population(&self) -> f64 {
        match self.regime {
            Regime::BelowBand => self.c1.norm_sqr(),
            _ => 0.0,
        }
    }
}

pub fn classify_regime(p: &ModelParams) -> RegimeClassification {
    let a = p.alpha;
    let dt = p.delta_l_tilde();
    let root = C64::new(a * a / 4.0 - dt, 0.0).sqrt();
    let r_plus = -a / 2.0 + root;
    let r_minus = -a / 2.0 - root;
    let zero = C64::new(0.0, 0.0);
    let (regime, r1, c1) = if dt <= 0.0 {
        let c = if (r_plus - r_minus).norm() > 0.0 { 2.0 * r_plus / (r_plus - r_minus) } else { zero };
        (Regime::BelowBand, r_plus, c)
    } else if dt <= a * a / 2.0 {
        (Regime::GapDip, zero, zero)
    } else {
        (Regime::AboveBand, r_minus, 2.0 * r_minus / (r_minus - r_plus))
    };
    RegimeClassification { regime, r_plus, r_minus, r1, c1, delta_l_tilde: dt }
}

/// Branch-cut contribution, truncated at `x = 50/t`.
pub fn branch_integral(p: &ModelParams, t: f64) -> Result<C64> {
    let a = p.alpha;
    if a == 0.0 || t <= 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let dl = p.delta_l();
    let dtl = p.delta_l_tilde();
    let ymax = (50.0 / t).sqrt();
    // x = y^2: dx = 2y dy, sqrt(x) = y
    let f = |y: f64| {
        let x = y * y;
        let num = C64::new(-x * t, dl * t).exp() * (2.0 * y * y);
        let z = C64::new(-x, dtl);
        num / (z * z + C64::new(0.0, a * a * x))
    };
    let mut points = vec![0.0];
    // denominator is smallest near x = |delta_L_tilde|
    let yc = dtl.abs().sqrt();
    if yc > 0.0 && yc < ymax {
        points.push(yc);
    }
    points.push(ymax);
    let q = Quadrature { abs_tol: 1e-12, rel_tol: 1e-10, max_intervals: 50_000 };
    let v = q.integrate_points(f, &points)?.value;
    Ok(C64::from_polar(a / PI, FRAC_PI_4) * v)
}

fn outside_regime(p: &ModelParams, t: f64) -> bool {
    let big = 10.0 * p.alpha.powi(2).max(p.delta).max(p.omega_b);
    p.omega0 < big || t < 10.0 / p.omega0
}

/// Rotating-frame amplitude from the asymptotic form.
pub fn analytic_longtime(p: &ModelParams, t: f64) -> Result<C64> {
    if outside_regime(p, t) {
        log::warn!(
            "analytic_longtime outside its asymptotic regime (alpha={}, omega_b={}, omega0={}, delta={}, t={t})",
            p.alpha,
            p.omega_b,
            p.omega0,
            p.delta
        );
    }
    let cls = classify_regime(p);
    let pole = cls.c1 * (C64::i() * (cls.r1 * cls.r1 + p.delta_l()) * t).exp();
    Ok(pole + branch_integral(p, t)?)
}

pub fn analytic_series(p: &ModelParams, times: &[f64]) -> Result<AmplitudeSeries> {
    let values = times.iter().map(|&t| analytic_longtime(p, t)).collect::<Result<Vec<_>>>()?;
    Ok(AmplitudeSeries { times: times.to_vec(), values, method: Method::Analytic, frame: Frame::Rotating, params: *p })
}
