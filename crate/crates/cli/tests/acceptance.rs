//! Acceptance criteria. Every test prints exactly one `criterion N: PASS|FAIL` line.
//! Criteria 6, 9 and 10 are long runs and are ignored by default:
//! `cargo test -p bandgap --test acceptance -- --ignored --nocapture`.

use std::time::Instant;

use bandgap_core::analysis::{oscillation_frequency, rwa_pole_estimates, stationary_value, Trace};
use bandgap_core::chain::{discretize_fn, map_to_chain, stieltjes_recurrence, ChainCoefficients};
use bandgap_core::polaron::{adiabatic_renorm, silbey_harris_solve};
use bandgap_core::rwa::chain_evolve::chain_evolve_unchecked;
use bandgap_core::rwa::{chain_evolve, laplace_invert, rwa_coherence, volterra_solve, Frame};
use bandgap_core::spectral::ModelParams;
use bandgap_core::Error as CoreError;
use bandgap_tebd::evolve::chain_for_run;
use bandgap_tebd::gates::bond_charge;
use bandgap_tebd::{build_gates, convergence_protocol, evolve, AtomState, EvolutionConfig, Mode, TimeSeries};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const POLARON_TARGET: f64 = 0.026;
const POLARON_TOL: f64 = 0.010;
const LEGENDRE_TOL: f64 = 1e-10;
const ASYMPTOTIC_REL_TOL: f64 = 1e-3;
const SOLVER_AGREEMENT_TOL: f64 = 0.02;
const TEBD_CHAIN_TOL: f64 = 0.02;
/// Accepted range of `deviation(dt) / deviation(dt / 2)` for a second-order splitting.
const TROTTER_RATIO: (f64, f64) = (3.5, 4.5);
const SIGMA_X_TOL: f64 = 1e-3;
const RWA_CHARGE_TOL: f64 = 1e-4;
const PARITY_TOL: f64 = 1e-3;
const NORM_STEP_TOL: f64 = 1e-8;
const COMMUTATOR_TOL: f64 = 1e-12;
const TEBD_VOLTERRA_TOL: f64 = 0.02;
/// Recurrence onsets in the two methods may differ by this many samples.
const RECURRENCE_SAMPLES: usize = 2;
const ZERO_LIMIT_TOL: f64 = 0.05;
const ADIABATIC_TOL: f64 = 0.15;
/// Interior minimum must sit this far below both ends of the scan.
const MINIMUM_CONTRAST: f64 = 1.2;
const LOW_POPULATION: f64 = 0.05;
/// "Order one" residual population.
const HIGH_POPULATION: f64 = 0.1;

fn report(n: u32, what: &str, pass: bool, detail: &str) {
    println!("criterion {n}: {} {what} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {what} ({detail})");
}

fn sup(a: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter().fold(0.0, f64::max)
}

fn rwa_cfg(dt: f64, t_max: f64, samples: usize) -> EvolutionConfig {
    let steps = (t_max / dt).round() as usize;
    EvolutionConfig { d_b: 2, chi_max: 8, svd_threshold: 1e-14, dt, t_max, sample_stride: steps / samples, mode: Mode::Rwa }
}

fn full_cfg(dt: f64, t_max: f64, samples: usize, d_b: usize) -> EvolutionConfig {
    let steps = (t_max / dt).round() as usize;
    EvolutionConfig { d_b, chi_max: 64, svd_threshold: 1e-10, dt, t_max, sample_stride: steps / samples, mode: Mode::Full }
}

/// `sup |P_tebd - |A|^2|` on a shared grid.
fn pop_deviation(ts: &TimeSeries, exact: &[f64]) -> f64 {
    assert_eq!(ts.len(), exact.len());
    sup(ts.pop_excited.iter().zip(exact).map(|(a, b)| (a - b).abs()))
}

#[test]
fn criterion_1_polaron_number() {
    let start = Instant::now();
    let sol = silbey_harris_solve(&ModelParams::standard(30.0)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = (sol.p_up_relaxed - POLARON_TARGET).abs() <= POLARON_TOL && secs < 1.0;
    report(1, "polaron P_up at delta=30", pass, &format!("P_up = {:.5}, target {POLARON_TARGET} +- {POLARON_TOL}, {secs:.3} s", sol.p_up_relaxed));
}

#[test]
fn criterion_2_legendre_oracle() {
    let start = Instant::now();
    let w = discretize_fn(|_| 1.0, 2000).unwrap();
    let rec = stieltjes_recurrence(&w, 51).unwrap();
    let mut worst: f64 = 0.0;
    for n in 0..=50 {
        worst = worst.max((rec.alpha[n] - 0.5).abs());
        if n >= 1 {
            let nf = n as f64;
            worst = worst.max((rec.beta[n] - nf * nf / (4.0 * (4.0 * nf * nf - 1.0))).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(2, "shifted Legendre recurrence, n <= 50", worst <= LEGENDRE_TOL && secs < 1.0, &format!("max error {worst:.2e}, {secs:.3} s"));
}

#[test]
fn criterion_3_chain_asymptotics() {
    let p = ModelParams::standard(0.0);
    let c = map_to_chain(&p, 300).unwrap();
    let (e_inf, t_inf) = (p.omega_b + p.omega_c / 2.0, p.omega_c / 4.0);
    let de = sup((200..300).map(|n| (c.eps[n] / e_inf - 1.0).abs()));
    let dt = sup((200..299).map(|n| (c.t[n] / t_inf - 1.0).abs()));
    let pass = de < ASYMPTOTIC_REL_TOL && dt < ASYMPTOTIC_REL_TOL;
    report(3, "eps_n and t_n limits for n >= 200", pass, &format!("eps rel {de:.2e}, t rel {dt:.2e}"));
}

#[test]
fn criterion_4_three_solver_agreement() {
    let t_max = 1.5;
    let mut worst: f64 = 0.0;
    let mut flagged = 0;
    for delta in [1.0, 2.0, 4.0] {
        let p = ModelParams::reduced(delta);
        let vol = volterra_solve(&p, t_max, 0.005).unwrap();
        let times: Vec<f64> = vol.times.iter().copied().step_by(10).skip(1).collect();
        let lap = laplace_invert(&p, &times).unwrap();
        flagged += lap.flagged_count();
        let c = chain_for_run(&p, t_max).unwrap();
        let ch = chain_evolve(&c, delta, t_max, times.len()).unwrap().in_frame(Frame::Rotating);
        for (k, _) in times.iter().enumerate() {
            let pv = vol.values[10 * (k + 1)].norm_sqr();
            let pl = lap.series.values[k].norm_sqr();
            let pc = ch.values[k + 1].norm_sqr();
            worst = worst.max((pv - pl).abs()).max((pv - pc).abs()).max((pl - pc).abs());
        }
    }
    report(
        4,
        "Volterra, Laplace and chain populations, reduced parameters, delta in {1,2,4}",
        worst <= SOLVER_AGREEMENT_TOL,
        &format!("max pairwise deviation {worst:.2e}, {flagged} Laplace points flagged"),
    );
}

#[test]
fn criterion_5_tebd_rwa_vs_exact_chain() {
    let (t_max, samples, dt) = (1.5, 100, 0.005);
    let mut detail = Vec::new();
    let mut pass = true;
    for delta in [1.0, 2.0, 4.0] {
        let p = ModelParams::reduced(delta);
        let c = chain_for_run(&p, t_max).unwrap();
        let exact: Vec<f64> = chain_evolve(&c, delta, t_max, samples).unwrap().population();
        let cfg = rwa_cfg(dt, t_max, samples);
        let conv = convergence_protocol(&c, delta, &cfg, AtomState::Excited).unwrap();
        let d1 = pop_deviation(&conv.base, &exact);
        let fine = evolve(&c, delta, &rwa_cfg(dt / 2.0, t_max, samples), AtomState::Excited).unwrap();
        let d2 = pop_deviation(&fine, &exact);
        let ratio = d1 / d2;
        let ok = conv.converged && d1 <= TEBD_CHAIN_TOL && (TROTTER_RATIO.0..=TROTTER_RATIO.1).contains(&ratio);
        pass &= ok;
        detail.push(format!("delta={delta}: converged={} dev {d1:.2e}, ratio {ratio:.2}", conv.converged));
    }
    report(5, "TEBD-RWA (d_b=2) against exact chain", pass, &detail.join("; "));
}

/// First sample where `a` leaves `reference` by more than `tol`.
fn departure(a: &[f64], reference: &[f64], tol: f64) -> Option<usize> {
    a.iter().zip(reference).position(|(x, y)| (x - y).abs() > tol)
}

#[test]
#[ignore = "extended: full-scale TEBD"]
fn criterion_6_volterra_and_recurrence() {
    let p = ModelParams::standard(1.0);
    let (t_max, samples, dt) = (1.5, 100, 2.5e-4);
    let vol = volterra_solve(&p, t_max, 0.001).unwrap();
    let every = (t_max / samples as f64 / 0.001).round() as usize;
    let reference: Vec<f64> = (0..=samples).map(|k| vol.values[k * every].norm_sqr()).collect();

    let long = chain_for_run(&p, t_max).unwrap();
    let ts = evolve(&long, p.delta, &rwa_cfg(dt, t_max, samples), AtomState::Excited).unwrap();
    let long_dev = pop_deviation(&ts, &reference);

    // short chain: both methods see the reflection from the far end
    let short = map_to_chain(&p, 100).unwrap();
    let tebd_short = evolve(&short, p.delta, &rwa_cfg(dt, t_max, samples), AtomState::Excited).unwrap();
    let exact_short = chain_evolve_unchecked(&short, p.delta, t_max, samples).unwrap().series.population();
    let short_dev = pop_deviation(&tebd_short, &exact_short);
    let rec_tebd = departure(&tebd_short.pop_excited, &reference, TEBD_VOLTERRA_TOL);
    let rec_exact = departure(&exact_short, &reference, TEBD_VOLTERRA_TOL);
    let matching = match (rec_tebd, rec_exact) {
        (Some(a), Some(b)) => a.abs_diff(b) <= RECURRENCE_SAMPLES,
        _ => false,
    };
    let h = t_max / samples as f64;
    let pass = long_dev <= TEBD_VOLTERRA_TOL && ts.is_valid() && matching && short_dev <= TEBD_VOLTERRA_TOL;
    report(
        6,
        "TEBD-RWA vs Volterra at standard parameters, and short-chain recurrence",
        pass,
        &format!(
            "long chain N={} dev {long_dev:.2e}; N=100 recurrence at t={:?} (TEBD) vs {:?} (exact), TEBD-exact dev {short_dev:.2e}",
            long.n,
            rec_tebd.map(|k| k as f64 * h),
            rec_exact.map(|k| k as f64 * h)
        ),
    );
}

#[test]
fn criterion_7_independent_boson_symmetry() {
    let p = ModelParams::reduced(0.0);
    let t_max = 2.0;
    let c = chain_for_run(&p, t_max).unwrap();
    let ts = evolve(&c, 0.0, &full_cfg(0.005, t_max, 100, 6), AtomState::PlusSuperposition).unwrap();
    let dev = sup(ts.sigma_x.iter().map(|x| (x - 1.0).abs()));
    let pass = dev < SIGMA_X_TOL && ts.is_valid();
    report(7, "FULL mode, delta=0, plus state keeps <sigma_x> = 1", pass, &format!("max |<sigma_x> - 1| = {dev:.2e} over t <= {t_max}"));
}

fn gate_commutators(c: &ChainCoefficients) -> f64 {
    let mut worst: f64 = 0.0;
    for (mode, d_b) in [(Mode::Rwa, 2), (Mode::Rwa, 4), (Mode::Full, 4), (Mode::Full, 6)] {
        let gates = build_gates(c, 3.0, d_b, 0.01, mode).unwrap();
        for i in 0..gates.bonds() {
            let q = bond_charge(i, d_b, mode);
            for u in [&gates.half[i], &gates.full[i]] {
                let comm = u.dot(&q) - q.dot(u);
                worst = worst.max(comm.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
            }
        }
    }
    worst
}

#[test]
fn criterion_8_conservation_suite() {
    let comm = gate_commutators(&map_to_chain(&ModelParams::reduced(3.0), 12).unwrap());
    let mut runner = TestRunner::new(Config { cases: 16, failure_persistence: None, ..Config::default() });
    let strategy = (0.2f64..1.5, 0.0f64..8.0, 0usize..3, any::<bool>());
    let result = runner.run(&strategy, |(alpha, delta, atom, full)| {
        let atom = [AtomState::Excited, AtomState::PlusSuperposition, AtomState::Ground][atom];
        let p = ModelParams::reduced(delta).with_alpha(alpha);
        let c = chain_for_run(&p, 0.3).unwrap();
        let mode = if full { Mode::Full } else { Mode::Rwa };
        let cfg = EvolutionConfig { d_b: 4, chi_max: 32, svd_threshold: 1e-12, dt: 0.005, t_max: 0.3, sample_stride: 6, mode };
        let ts = evolve(&c, delta, &cfg, atom).unwrap();
        let tol = if full { PARITY_TOL } else { RWA_CHARGE_TOL };
        prop_assert!(ts.charge_drift() < tol, "{mode:?} charge drift {}", ts.charge_drift());
        let norm = sup(ts.norm_drift.iter().copied());
        prop_assert!(norm < NORM_STEP_TOL, "per-step norm drift {norm}");
        Ok(())
    });
    let pass = result.is_ok() && comm < COMMUTATOR_TOL;
    let detail = match &result {
        Ok(()) => format!("16 random runs within drift bounds; worst gate commutator {comm:.2e}"),
        Err(e) => format!("{e}; worst gate commutator {comm:.2e}"),
    };
    report(8, "excitation number, parity, norm and gate symmetries", pass, &detail);
}

/// Frequency estimate, or the resolution limit when the window holds too few periods.
fn frequency_or_floor(tr: &Trace) -> Result<f64, CoreError> {
    match oscillation_frequency(tr) {
        Err(CoreError::InsufficientPeriods { .. }) => Ok(3.0 * std::f64::consts::TAU / tr.span()),
        other => other,
    }
}

#[test]
#[ignore = "extended: long TEBD runs"]
fn criterion_9_rwa_coherence_pathology() {
    // RWA scan from the exact chain
    let t_rwa = 40.0;
    let base = ModelParams::reduced(0.0);
    let c = chain_for_run(&base, t_rwa).unwrap();
    let deltas: Vec<f64> = (0..=12).map(|k| 0.5 * k as f64).collect();
    let mut rwa = Vec::new();
    for &d in &deltas {
        let s = chain_evolve(&c, d, t_rwa, 8000).unwrap();
        rwa.push(frequency_or_floor(&rwa_coherence(&s)).unwrap_or(f64::NAN));
    }
    let finite: Vec<(f64, f64)> = deltas.iter().copied().zip(rwa.iter().copied()).filter(|(_, w)| w.is_finite()).collect();
    let (imin, wmin) = finite.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, (_, w))| if *w < acc.1 { (i, *w) } else { acc });
    let interior = imin > 0
        && imin + 1 < finite.len()
        && finite[0].1 > MINIMUM_CONTRAST * wmin
        && finite[finite.len() - 1].1 > MINIMUM_CONTRAST * wmin;

    // delta -> 0 limit at standard parameters
    let p0 = ModelParams::standard(0.0);
    let w0 = oscillation_frequency(&rwa_coherence(&volterra_solve(&p0, 12.0, 0.001).unwrap())).unwrap();
    let w0_formula = rwa_pole_estimates(&p0).frequency();
    let zero_ok = (w0 / w0_formula - 1.0).abs() <= ZERO_LIMIT_TOL;

    // FULL scan from TEBD
    let t_full = 40.0;
    let full_deltas = [1.0, 1.5, 2.0, 3.0];
    let cf = chain_for_run(&base, t_full).unwrap();
    let mut full = Vec::new();
    let mut full_valid = true;
    for &d in &full_deltas {
        let ts = evolve(&cf, d, &full_cfg(0.005, t_full, 800, 6), AtomState::PlusSuperposition).unwrap();
        full_valid &= ts.is_valid();
        full.push(oscillation_frequency(&Trace::new(ts.times.clone(), ts.sigma_x.clone())).unwrap_or(f64::NAN));
    }
    let monotone = full.windows(2).all(|w| w[1] > w[0]);
    let small: Vec<(f64, f64, f64)> = full_deltas
        .iter()
        .zip(&full)
        .filter(|(d, _)| **d < base.omega_b)
        .map(|(d, w)| (*d, *w, adiabatic_renorm(&base.with_delta(*d))))
        .collect();
    let adiabatic_ok = small.iter().all(|(_, w, a)| (w / a - 1.0).abs() <= ADIABATIC_TOL);

    let pass = interior && zero_ok && monotone && adiabatic_ok && full_valid;
    let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(",");
    report(
        9,
        "RWA coherence frequency has an interior minimum; FULL frequency is monotone and adiabatic",
        pass,
        &format!(
            "RWA w(delta=0..6) = [{}], min at delta={}; delta->0 standard {w0:.3} vs {w0_formula:.3}; FULL w({:?}) = [{}] vs adiabatic [{}]",
            fmt(&rwa),
            finite.get(imin).map_or(f64::NAN, |x| x.0),
            full_deltas,
            fmt(&full),
            fmt(&small.iter().map(|x| x.2).collect::<Vec<_>>())
        ),
    );
}

/// Plateau value, or the plain tail mean when the window is too short to certify one.
fn residual(tr: &Trace) -> f64 {
    match stationary_value(tr) {
        Ok(e) => e.value,
        Err(_) => {
            let n = tr.values.len();
            let tail = &tr.values[n - n / 10..];
            tail.iter().sum::<f64>() / tail.len() as f64
        }
    }
}

#[test]
#[ignore = "extended: long TEBD runs"]
fn criterion_10_crossover() {
    let base = ModelParams::reduced(0.0);
    let line = base.omega_b + base.omega_s() + base.alpha * base.alpha / 2.0;
    let t_rwa = 40.0;
    let c = chain_for_run(&base, t_rwa).unwrap();
    let deltas: Vec<f64> = (1..=8).map(|k| k as f64).collect();
    let rwa: Vec<f64> = deltas
        .iter()
        .map(|&d| {
            let s = chain_evolve(&c, d, t_rwa, 8000).unwrap();
            residual(&Trace::new(s.times.clone(), s.population()))
        })
        .collect();
    let below_ok = deltas.iter().zip(&rwa).filter(|(d, _)| **d < line - 1.0).all(|(_, p)| *p >= HIGH_POPULATION);
    let above_ok = deltas.iter().zip(&rwa).filter(|(d, _)| **d > line + 0.5).all(|(_, p)| *p < LOW_POPULATION);

    let t_full = 5.0;
    let cf = chain_for_run(&base, t_full).unwrap();
    let mut full = Vec::new();
    let mut valid = true;
    for d in [6.0, 7.0] {
        let ts = evolve(&cf, d, &full_cfg(0.005, t_full, 500, 6), AtomState::Excited).unwrap();
        valid &= ts.is_valid();
        let i = deltas.iter().position(|x| *x == d).unwrap();
        full.push((d, residual(&Trace::new(ts.times.clone(), ts.pop_excited.clone())), rwa[i]));
    }
    let full_ok = full.iter().all(|(_, f, r)| f > r);
    let pass = below_ok && above_ok && full_ok && valid;
    let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(",");
    report(
        10,
        "RWA residual crosses over at omega_b + omega_s + alpha^2/2; FULL residual above RWA past it",
        pass,
        &format!(
            "line at delta={line:.3}; RWA P(delta=1..8) = [{}]; FULL vs RWA {}",
            fmt(&rwa),
            full.iter().map(|(d, f, r)| format!("delta={d}: {f:.4} vs {r:.4}")).collect::<Vec<_>>().join(", ")
        ),
    );
}
