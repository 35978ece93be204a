//! Frequency, plateau and decay-rate estimators for sampled traces, and the
//! asymptotic pole positions of the RWA coherence.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{spectral_density, ModelParams};

/// A real-valued trace on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Trace {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Self {
        Self { times, values }
    }

    pub fn from_fn<F: Fn(f64) -> f64>(t_max: f64, dt: f64, f: F) -> Self {
        let n = (t_max / dt).round() as usize;
        let times: Vec<f64> = (0..=n).map(|j| j as f64 * dt).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        Self { times, values }
    }

    pub fn span(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    fn dt(&self) -> Result<f64> {
        if self.times.len() < 8 || self.values.len() != self.times.len() {
            return Err(Error::InvalidArgument(format!(
                "trace needs at least 8 matching samples, got {} times and {} values",
                self.times.len(),
                self.values.len()
            )));
        }
        Ok(self.span() / (self.times.len() - 1) as f64)
    }
}

/// Fraction of the window used for plateau estimates and detrending.
pub const TAIL_FRACTION: f64 = 0.1;
const PAD_FACTOR: usize = 8;
const PROMINENCE: f64 = 3.0;

fn tail_start(n: usize) -> usize {
    tail_start_with(n, TAIL_FRACTION)
}

fn tail_start_with(n: usize, fraction: f64) -> usize {
    let k = ((n as f64) * fraction).ceil() as usize;
    n - k.clamp(1, n)
}

fn tail_mean(values: &[f64]) -> f64 {
    let s = tail_start(values.len());
    let tail = &values[s..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Angular frequency of the dominant oscillation.
pub fn oscillation_frequency(tr: &Trace) -> Result<f64> {
    let dt = tr.dt()?;
    let n = tr.values.len();
    let mean = tail_mean(&tr.values);
    let swing = tr.values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if swing <= 1e-12 * (1.0 + mean.abs()) {
        return Err(Error::NoDominantPeak);
    }
    let nfft = n.next_power_of_two() * PAD_FACTOR;
    let mut buf: Vec<C64> = tr
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let w = 0.5 - 0.5 * (2.0 * PI * j as f64 / (n - 1) as f64).cos();
            C64::new((v - mean) * w, 0.0)
        })
        .collect();
    buf.resize(nfft, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    let mag: Vec<f64> = buf[..nfft / 2 + 1].iter().map(|c| c.norm()).collect();
    // the Hann main lobe around zero frequency spans two unpadded bins
    let kmin = (2 * nfft).div_ceil(n);
    if kmin + 2 >= mag.len() {
        return Err(Error::NoDominantPeak);
    }
    let mut best: Option<usize> = None;
    for k in kmin.max(1)..mag.len() - 1 {
        if mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && best.is_none_or(|b| mag[k] > mag[b]) {
            best = Some(k);
        }
    }
    let k = best.ok_or(Error::NoDominantPeak)?;
    let med = median(mag[kmin..].to_vec());
    if !(mag[k] > PROMINENCE * med) || mag[k] <= 1e-300 {
        return Err(Error::NoDominantPeak);
    }
    // Gaussian (log-parabolic) interpolation
    let (a, b, c) = (mag[k - 1].max(1e-300).ln(), mag[k].ln(), mag[k + 1].max(1e-300).ln());
    let denom = a - 2.0 * b + c;
    let shift = if denom.abs() > 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    let freq = (k as f64 + shift.clamp(-0.5, 0.5)) / (nfft as f64 * dt);
    let periods = freq * tr.span();
    if periods < 3.0 {
        return Err(Error::InsufficientPeriods { periods });
    }
    Ok(2.0 * PI * freq)
}

/// Cross-check estimator: mean spacing of detrended zero crossings.
pub fn zero_crossing_frequency(tr: &Trace) -> Result<f64> {
    tr.dt()?;
    let mean = tail_mean(&tr.values);
    let mut crossings = Vec::new();
    for j in 1..tr.values.len() {
        let (a, b) = (tr.values[j - 1] - mean, tr.values[j] - mean);
        if a == 0.0 || a * b < 0.0 {
            let frac = if a == b { 0.0 } else { a / (a - b) };
            crossings.push(tr.times[j - 1] + frac * (tr.times[j] - tr.times[j - 1]));
        }
    }
    if crossings.len() < 7 {
        return Err(Error::InsufficientPeriods { periods: crossings.len() as f64 / 2.0 });
    }
    let half_period = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
    Ok(PI / half_period)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryEstimate {
    pub value: f64,
    /// Least-squares slope over the averaging window.
    pub slope: f64,
    /// Length of the averaging window.
    pub window: f64,
    pub stationary: bool,
}

/// Largest tolerated `|slope| * window` for a plateau.
pub const DRIFT_TOL: f64 = 0.05;

/// Mean over the final 10% of the trace with a drift diagnostic.
pub fn stationary_value(tr: &Trace) -> Result<StationaryEstimate> {
    stationary_value_with(tr, TAIL_FRACTION)
}

/// Mean over the final `fraction` of the trace.
pub fn stationary_value_with(tr: &Trace, fraction: f64) -> Result<StationaryEstimate> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("tail fraction must lie in (0, 1], got {fraction}")));
    }
    tr.dt()?;
    if let Ok(w) = oscillation_frequency(tr) {
        let period = 2.0 * PI / w;
        if tr.span() < 10.0 * period {
            return Err(Error::WindowTooShort { window: tr.span(), period });
        }
    }
    let s = tail_start_with(tr.values.len(), fraction);
    let (ts, vs) = (&tr.times[s..], &tr.values[s..]);
    let n = vs.len() as f64;
    // offset by the first sample so a constant tail averages exactly
    let value = vs[0] + vs.iter().map(|v| v - vs[0]).sum::<f64>() / n;
    let tm = ts.iter().sum::<f64>() / n;
    let sxx: f64 = ts.iter().map(|t| (t - tm).powi(2)).sum();
    let sxy: f64 = ts.iter().zip(vs).map(|(t, v)| (t - tm) * (v - value)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let window = ts[ts.len() - 1] - ts[0];
    Ok(StationaryEstimate { value, slope, window, stationary: slope.abs() * window <= DRIFT_TOL })
}

/// Exponential decay rate of the oscillation envelope.
pub fn decay_rate(tr: &Trace) -> Result<f64> {
    tr.dt()?;
    let mean = tail_mean(&tr.values);
    let x: Vec<f64> = tr.values.iter().map(|v| (v - mean).abs()).collect();
    let dt = tr.times[1] - tr.times[0];
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for j in 1..x.len() - 1 {
        if x[j] >= x[j - 1] && x[j] > x[j + 1] {
            let (a, b, c) = (x[j - 1], x[j], x[j + 1]);
            let d = a - 2.0 * b + c;
            let sh = if d != 0.0 { (0.5 * (a - c) / d).clamp(-0.5, 0.5) } else { 0.0 };
            peaks.push((tr.times[j] + sh * dt, b - 0.25 * (a - c) * sh));
        }
    }
    let top = peaks.iter().map(|p| p.1).fold(0.0, f64::max);
    let last = peaks.iter().rev().map(|p| p.1).find(|v| *v > 0.0).unwrap_or(top);
    if peaks.len() < 3 || top <= 0.0 || top / last < std::f64::consts::E {
        let factor = if last > 0.0 { top / last } else { 1.0 };
        return Err(Error::InsufficientDecay { factor });
    }
    // drop peaks sunk into the plateau or numerical floor
    let used: Vec<(f64, f64)> = peaks.into_iter().filter(|p| p.1 > 1e-2 * top).collect();
    if used.len() < 3 {
        return Err(Error::InsufficientDecay { factor: top / last });
    }
    let n = used.len() as f64;
    let tm = used.iter().map(|p| p.0).sum::<f64>() / n;
    let lm = used.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxx: f64 = used.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - tm) * (p.1.ln() - lm)).sum();
    Ok(-sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoleRegime {
    DeltaToZero,
    SmallFinite,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleEstimate {
    pub regime: PoleRegime,
    pub s_plus: C64,
    pub s_minus: C64,
    /// Golden-rule rate `J(delta)`, reported for the large-delta regime.
    pub gamma: Option<f64>,
}

impl PoleEstimate {
    pub fn frequency(&self) -> f64 {
        self.s_plus.im.abs()
    }
}

/// Regime boundaries for [`rwa_pole_estimates_with`], as multiples of `omega_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleThresholds {
    pub zero_below: f64,
    pub large_above: f64,
}

impl Default for PoleThresholds {
    fn default() -> Self {
        Self { zero_below: 0.05, large_above: 3.0 }
    }
}

pub fn rwa_pole_estimates(p: &ModelParams) -> PoleEstimate {
    rwa_pole_estimates_with(p, &PoleThresholds::default())
}

pub fn rwa_pole_estimates_with(p: &ModelParams, th: &PoleThresholds) -> PoleEstimate {
    let a = p.alpha;
    let ws = a * (p.omega0 / PI).sqrt();
    let i = C64::i();
    if p.delta <= th.zero_below * p.omega_b {
        let w = a * ((p.omega0 / PI).sqrt() - a * p.omega_b.sqrt());
        PoleEstimate { regime: PoleRegime::DeltaToZero, s_plus: i * w, s_minus: -i * w, gamma: None }
    } else if p.delta < th.large_above * p.omega_b {
        let w = p.delta - ws + a * C64::new(p.delta - p.omega_b, 0.0).sqrt();
        PoleEstimate { regime: PoleRegime::SmallFinite, s_plus: i * w, s_minus: -i * w, gamma: None }
    } else {
        let re = a * p.delta.sqrt();
        PoleEstimate {
            regime: PoleRegime::Large,
            s_plus: C64::new(re, p.delta),
            s_minus: C64::new(re, -p.delta),
            gamma: Some(spectral_density(p, p.delta)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_frequency() {
        let tr = Trace::from_fn(20.0, 0.01, |t| (3.406 * t).cos());
        let w = oscillation_frequency(&tr).unwrap();
        assert!((w / 3.406 - 1.0).abs() < 0.005, "{w}");
        let z = zero_crossing_frequency(&tr).unwrap();
        assert!((z / 3.406 - 1.0).abs() < 0.01, "{z}");
    }

    #[test]
    fn constant_has_no_peak() {
        let tr = Trace::from_fn(20.0, 0.01, |_| 0.3);
        assert_eq!(oscillation_frequency(&tr), Err(Error::NoDominantPeak));
        let s = stationary_value(&tr).unwrap();
        assert_eq!(s.value, 0.3);
        assert!(s.stationary);
    }

    #[test]
    fn too_few_periods() {
        let tr = Trace::from_fn(20.0, 0.01, |t| (0.8 * t).cos());
        assert!(matches!(oscillation_frequency(&tr), Err(Error::InsufficientPeriods { .. })));
    }

    #[test]
    fn plateau_and_decay() {
        let tr = Trace::from_fn(60.0, 0.01, |t| (-t).exp() + 0.2);
        let s = stationary_value(&tr).unwrap();
        assert!((s.value - 0.2).abs() < 1e-3);
        let tr = Trace::from_fn(10.0, 0.01, |t| (-0.7 * t).exp() * (10.0 * t).cos());
        let g = decay_rate(&tr).unwrap();
        assert!((g / 0.7 - 1.0).abs() < 0.02, "{g}");
        let tr = Trace::from_fn(10.0, 0.01, |t| (10.0 * t).cos());
        assert!(matches!(decay_rate(&tr), Err(Error::InsufficientDecay { .. })));
    }

    #[test]
    fn drifting_tail_is_flagged() {
        let tr = Trace::from_fn(10.0, 0.01, |t| 0.5 * t);
        let s = stationary_value(&tr).unwrap();
        assert!(!s.stationary);
    }

    #[test]
    fn pole_formulas() {
        let p = ModelParams::standard(0.0);
        let e = rwa_pole_estimates(&p);
        assert_eq!(e.regime, PoleRegime::DeltaToZero);
        assert!((e.frequency() - 3.406).abs() < 1e-3);
        let e = rwa_pole_estimates(&p.with_delta(100.0));
        assert_eq!(e.regime, PoleRegime::Large);
        assert!((e.s_plus.im - 100.0).abs() < 1e-12 && (e.s_plus.re - 10.0).abs() < 1e-12);
        assert_eq!(e.s_minus, e.s_plus.conj());
    }
}
