//! Second-order TEBD: even bonds swept left to right, odd bonds right to
//! left, with the half steps of consecutive Strang steps fused between
//! samples.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use bandgap_core::chain::{light_cone_length, map_to_chain, ChainCoefficients};
use bandgap_core::spectral::ModelParams;

use crate::error::{Error, Result};
use crate::gates::{build_gates, Gates, Mode};
use crate::mps::{AtomState, MpsState, Sweep, Truncation};
use crate::ops::*;

/// Largest tolerated discarded weight in a single step.
pub const MAX_STEP_DISCARD: f64 = 1e-3;
/// Tail occupation that marks a light-cone violation.
pub const TAIL_TOL: f64 = 1e-6;
/// Highest-Fock occupation that marks an insufficient boson cutoff.
pub const TOP_FOCK_TOL: f64 = 1e-6;
/// Sup-norm change tolerated by each refinement of the convergence protocol.
pub const CONVERGENCE_TOL: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub d_b: usize,
    pub chi_max: usize,
    pub svd_threshold: f64,
    pub dt: f64,
    pub t_max: f64,
    pub sample_stride: usize,
    pub mode: Mode,
}

impl EvolutionConfig {
    /// `d_b = 6`, `chi_max = 64`, threshold `1e-10` and `dt = 0.05/(omega_b + omega_c)`
    /// rounded down to divide `t_max`, sampling about 200 times.
    pub fn defaults_for(p: &ModelParams, t_max: f64, mode: Mode) -> Self {
        let dt0 = 0.05 / (p.omega_b + p.omega_c);
        let steps = (t_max / dt0).ceil().max(1.0) as usize;
        let stride = (steps / 200).max(1);
        let steps = steps.div_ceil(stride) * stride;
        Self { d_b: 6, chi_max: 64, svd_threshold: 1e-10, dt: t_max / steps as f64, t_max, sample_stride: stride, mode }
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    pub fn truncation(&self) -> Truncation {
        Truncation { chi_max: self.chi_max, threshold: self.svd_threshold }
    }

    /// Every violated constraint, for the chain and detuning it will run with.
    pub fn violations(&self, c: &ChainCoefficients, delta: f64) -> Vec<String> {
        let mut v = Vec::new();
        let min_db = if self.mode == Mode::Rwa { 2 } else { 4 };
        if self.d_b < min_db {
            v.push(format!("d_b: must be >= {min_db} in {} mode, got {}", self.mode.name(), self.d_b));
        }
        if self.chi_max < 8 {
            v.push(format!("chi_max: must be >= 8, got {}", self.chi_max));
        }
        if !(self.svd_threshold >= 0.0 && self.svd_threshold < MAX_STEP_DISCARD) {
            v.push(format!("svd_threshold: must lie in [0, {MAX_STEP_DISCARD}), got {}", self.svd_threshold));
        }
        if !(self.t_max > 0.0) {
            v.push(format!("t_max: must be > 0, got {}", self.t_max));
        }
        if !(self.dt > 0.0) {
            v.push(format!("dt: must be > 0, got {}", self.dt));
        } else {
            let w = c.max_onsite().max(delta.abs());
            if self.dt * w > 0.5 {
                v.push(format!("dt: dt * max on-site frequency = {} exceeds 0.5", self.dt * w));
            }
            if self.t_max > 0.0 {
                let steps = self.t_max / self.dt;
                if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
                    v.push(format!("dt: t_max / dt = {steps} is not an integer"));
                }
            }
        }
        if self.sample_stride == 0 {
            v.push("sample_stride: must be >= 1".into());
        } else if self.dt > 0.0 && self.t_max > 0.0 && self.steps() % self.sample_stride != 0 {
            v.push(format!("sample_stride: {} does not divide the {} steps", self.sample_stride, self.steps()));
        }
        v
    }

    pub fn validate(&self, c: &ChainCoefficients, delta: f64) -> Result<()> {
        let v = self.violations(c, delta);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }
}

/// Chain long enough that nothing reaches its end by `t_max`.
pub fn chain_for_run(p: &ModelParams, t_max: f64) -> Result<ChainCoefficients> {
    let probe = map_to_chain(p, 60)?;
    // hoppings approach their limit from below within a few percent
    Ok(map_to_chain(p, light_cone_length(1.02 * probe.max_hopping(), t_max))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub mode: Mode,
    pub times: Vec<f64>,
    pub sigma_x: Vec<f64>,
    pub sigma_y: Vec<f64>,
    pub sigma_z: Vec<f64>,
    pub pop_excited: Vec<f64>,
    /// Largest per-step norm loss before renormalisation since the previous sample.
    pub norm_drift: Vec<f64>,
    pub max_bond: Vec<usize>,
    /// Cumulative discarded weight.
    pub discarded_weight: Vec<f64>,
    /// Excitation number (RWA) or parity `sigma_z (-1)^n` (full).
    pub conserved_charge: Vec<f64>,
    pub tail_occupation: Vec<f64>,
    pub energy: Vec<f64>,
    /// Largest occupation of the top Fock level over all sites.
    pub top_fock: Vec<f64>,
    pub chain_length: usize,
    /// First sample time at which the chain end was reached.
    pub light_cone_violation: Option<f64>,
}

impl TimeSeries {
    fn new(mode: Mode, chain_length: usize) -> Self {
        Self {
            mode,
            times: vec![],
            sigma_x: vec![],
            sigma_y: vec![],
            sigma_z: vec![],
            pop_excited: vec![],
            norm_drift: vec![],
            max_bond: vec![],
            discarded_weight: vec![],
            conserved_charge: vec![],
            tail_occupation: vec![],
            energy: vec![],
            top_fock: vec![],
            chain_length,
            light_cone_violation: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// True when the boson cutoff was ever saturated.
    pub fn d_b_insufficient(&self) -> bool {
        self.top_fock.iter().any(|x| *x >= TOP_FOCK_TOL)
    }

    pub fn is_valid(&self) -> bool {
        self.light_cone_violation.is_none()
    }

    pub fn charge_drift(&self) -> f64 {
        let c0 = self.conserved_charge.first().copied().unwrap_or(0.0);
        self.conserved_charge.iter().map(|c| (c - c0).abs()).fold(0.0, f64::max)
    }
}

/// Observables of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_z: f64,
    pub norm: f64,
    pub occupation: f64,
    pub energy: f64,
    pub tail: f64,
    pub top_fock: f64,
}

/// Sweeps the centre from the front down to the atom, collecting local
/// observables and bond energies. Leaves the centre on site 0.
pub fn snapshot(state: &mut MpsState, gates: &Gates) -> Result<Snapshot> {
    let n = state.len();
    let top = (state.front + 1).min(n - 1);
    state.move_center(top)?;
    let mut occupation = 0.0;
    let mut energy = 0.0;
    let mut top_fock: f64 = 0.0;
    let mut tail = 0.0;
    let mut i = top;
    loop {
        if i > 0 {
            let d = gates.dims[i];
            let occ = state.local_at_center(&number(d))?.re;
            occupation += occ;
            top_fock = top_fock.max(state.local_at_center(&top_level(d))?.re);
            if i == n - 1 {
                tail = occ;
            }
            energy += state.bond_at_center(&gates.hamiltonians[i - 1])?.re;
            state.move_center(i - 1)?;
            i -= 1;
        } else {
            break;
        }
    }
    Ok(Snapshot {
        sigma_x: state.local_at_center(&sigma_x())?.re,
        sigma_y: state.local_at_center(&sigma_y())?.re,
        sigma_z: state.local_at_center(&sigma_z())?.re,
        norm: state.norm_sqr(),
        occupation,
        energy,
        tail,
        top_fock,
    })
}

/// Per-step accounting while the layers run.
#[derive(Debug, Default, Clone, Copy)]
struct StepLog {
    discarded: f64,
    norm_loss: f64,
}

fn even_layer(state: &mut MpsState, gates: &[Array2<C64>], trunc: &Truncation, log: &mut StepLog) -> Result<()> {
    let mut i = 0;
    while i < gates.len() && i <= state.front {
        state.move_center(i)?;
        let r = state.apply_gate(i, &gates[i], Sweep::Right, trunc)?;
        log.discarded += r.discarded;
        log.norm_loss += r.norm_loss.abs();
        i += 2;
    }
    Ok(())
}

fn odd_layer(state: &mut MpsState, gates: &[Array2<C64>], trunc: &Truncation, log: &mut StepLog) -> Result<()> {
    let last = state.front.min(gates.len() - 1);
    let mut i = if last % 2 == 1 { last } else { last.saturating_sub(1) };
    while i >= 1 {
        state.move_center(i + 1)?;
        let r = state.apply_gate(i, &gates[i], Sweep::Left, trunc)?;
        log.discarded += r.discarded;
        log.norm_loss += r.norm_loss.abs();
        if i < 2 {
            break;
        }
        i -= 2;
    }
    Ok(())
}

/// One unfused Strang step: even/2, odd, even/2.
pub fn tebd_step(state: &mut MpsState, gates: &Gates, trunc: &Truncation) -> Result<f64> {
    let mut log = StepLog::default();
    even_layer(state, &gates.half, trunc, &mut log)?;
    odd_layer(state, &gates.full, trunc, &mut log)?;
    even_layer(state, &gates.half, trunc, &mut log)?;
    state.move_center(0)?;
    Ok(log.discarded)
}

/// `steps` Strang steps with the inner even half steps fused.
fn block(state: &mut MpsState, gates: &Gates, trunc: &Truncation, steps: usize, first_step: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let mut log = StepLog::default();
    state.move_center(0)?;
    even_layer(state, &gates.half, trunc, &mut log)?;
    for k in 0..steps {
        odd_layer(state, &gates.full, trunc, &mut log)?;
        let last = k + 1 == steps;
        state.move_center(0)?;
        even_layer(state, if last { &gates.half } else { &gates.full }, trunc, &mut log)?;
        if log.discarded > MAX_STEP_DISCARD {
            return Err(Error::TruncationExplosion { step: first_step + k, discarded: log.discarded });
        }
        worst = worst.max(log.norm_loss);
        log = StepLog::default();
    }
    Ok(worst)
}

fn conserved(state: &MpsState, snap: &Snapshot, mode: Mode) -> Result<f64> {
    match mode {
        Mode::Rwa => Ok((1.0 + snap.sigma_z) / 2.0 + snap.occupation),
        Mode::Full => {
            let ops: Vec<Array2<C64>> = state
                .dims()
                .iter()
                .enumerate()
                .map(|(j, d)| if j == 0 { sigma_z() } else { boson_parity(*d) })
                .collect();
            Ok(state.expect_product(&ops)?.re)
        }
    }
}

/// Runs the evolution from `atom` and the vacuum chain.
pub fn evolve(c: &ChainCoefficients, delta: f64, cfg: &EvolutionConfig, atom: AtomState) -> Result<TimeSeries> {
    cfg.validate(c, delta)?;
    let gates = build_gates(c, delta, cfg.d_b, cfg.dt, cfg.mode)?;
    let mut state = MpsState::product(&gates.dims, atom);
    let trunc = cfg.truncation();
    let mut ts = TimeSeries::new(cfg.mode, c.n);
    let steps = cfg.steps();
    let mut drift = 0.0;
    let mut k = 0;
    loop {
        let snap = snapshot(&mut state, &gates)?;
        let t = k as f64 * cfg.dt;
        ts.times.push(t);
        ts.sigma_x.push(snap.sigma_x);
        ts.sigma_y.push(snap.sigma_y);
        ts.sigma_z.push(snap.sigma_z);
        ts.pop_excited.push((1.0 + snap.sigma_z) / 2.0);
        ts.norm_drift.push(drift);
        ts.max_bond.push(state.max_bond());
        ts.discarded_weight.push(state.cumulative_discarded);
        ts.conserved_charge.push(conserved(&state, &snap, cfg.mode)?);
        ts.tail_occupation.push(snap.tail);
        ts.energy.push(snap.energy);
        ts.top_fock.push(snap.top_fock);
        if snap.tail >= TAIL_TOL && ts.light_cone_violation.is_none() {
            log::warn!("excitation reached the end of the {}-site chain at t = {t}", c.n);
            ts.light_cone_violation = Some(t);
        }
        if (snap.norm - 1.0).abs() > 1e-6 {
            log::debug!("renormalising state with norm {} at t = {t}", snap.norm);
            let f = C64::new(1.0 / snap.norm.sqrt(), 0.0);
            state.tensors[state.center].mapv_inplace(|z| z * f);
        }
        if k >= steps {
            break;
        }
        drift = block(&mut state, &gates, &trunc, cfg.sample_stride, k)?;
        k += cfg.sample_stride;
    }
    Ok(ts)
}

/// Sup-norm change in `pop_excited` and `sigma_x` between two runs on the same sample times.
pub fn series_deviation(a: &TimeSeries, b: &TimeSeries) -> f64 {
    let sup = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    sup(&a.pop_excited, &b.pop_excited).max(sup(&a.sigma_x, &b.sigma_x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub base: TimeSeries,
    pub chi_deviation: f64,
    pub d_b_deviation: f64,
    pub dt_deviation: f64,
    pub converged: bool,
}

/// Repeats the run with doubled `chi_max`, doubled `d_b` and halved `dt`.
pub fn convergence_protocol(
    c: &ChainCoefficients,
    delta: f64,
    cfg: &EvolutionConfig,
    atom: AtomState,
) -> Result<ConvergenceReport> {
    let base = evolve(c, delta, cfg, atom)?;
    let chi = evolve(c, delta, &EvolutionConfig { chi_max: 2 * cfg.chi_max, ..*cfg }, atom)?;
    let db = evolve(c, delta, &EvolutionConfig { d_b: 2 * cfg.d_b, ..*cfg }, atom)?;
    let fine = EvolutionConfig { dt: 0.5 * cfg.dt, sample_stride: 2 * cfg.sample_stride, ..*cfg };
    let dt = evolve(c, delta, &fine, atom)?;
    let chi_deviation = series_deviation(&base, &chi);
    let d_b_deviation = series_deviation(&base, &db);
    let dt_deviation = series_deviation(&base, &dt);
    let converged = chi_deviation < CONVERGENCE_TOL
        && d_b_deviation < CONVERGENCE_TOL
        && dt_deviation < CONVERGENCE_TOL
        && base.is_valid();
    Ok(ConvergenceReport { base, chi_deviation, d_b_deviation, dt_deviation, converged })
}
