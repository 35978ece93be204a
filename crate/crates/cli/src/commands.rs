use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use bandgap_core::analysis::{
    decay_rate, oscillation_frequency, rwa_pole_estimates_with, stationary_value_with, zero_crossing_frequency,
    PoleThresholds, Trace,
};
use bandgap_core::chain::{default_nodes, light_cone_length, map_to_chain, map_to_chain_with, ChainCoefficients};
use bandgap_core::polaron::{residual_population, silbey_harris_solve};
use bandgap_core::rwa::analytic::analytic_series;
use bandgap_core::rwa::{
    chain_evolve, laplace_invert, population_deviation, rwa_coherence, uniform_grid, volterra_solve, AmplitudeSeries,
    Frame, Method,
};
use bandgap_core::spectral::ModelParams;
use bandgap_tebd::{convergence_protocol, evolve, AtomState, EvolutionConfig, Mode, TimeSeries};

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_f64, CsvTable, OutputDir};
use crate::plot::{render, PlotSpec, Series};

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesArg {
    pub path: PathBuf,
    pub column: String,
    pub label: String,
    pub filled: bool,
}

impl std::str::FromStr for SeriesArg {
    type Err = String;
    /// `path:column[:label[:open]]`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() < 2 || parts.len() > 4 || parts[0].is_empty() || parts[1].is_empty() {
            return Err(format!("expected path:column[:label[:open]], got '{s}'"));
        }
        let filled = match parts.get(3) {
            None | Some(&"filled") => true,
            Some(&"open") => false,
            Some(other) => return Err(format!("marker style must be 'filled' or 'open', got '{other}'")),
        };
        Ok(Self {
            path: parts[0].into(),
            column: parts[1].into(),
            label: parts.get(2).map_or_else(|| parts[1].to_string(), |l| l.to_string()),
            filled,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    ChainCoeffs,
    Rwa,
    Evolve,
    Polaron,
    Sweep { jobs: usize },
    Analyze { input: PathBuf, column: Option<String> },
    Plot { series: Vec<SeriesArg>, x: String, alpha_time: bool, log_y: bool, title: String, name: String },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ChainCoeffs => "chain-coeffs",
            Command::Rwa => "rwa",
            Command::Evolve => "evolve",
            Command::Polaron => "polaron",
            Command::Sweep { .. } => "sweep",
            Command::Analyze { .. } => "analyze",
            Command::Plot { .. } => "plot",
        }
    }

    pub fn needs_model(&self) -> bool {
        !matches!(self, Command::Analyze { .. } | Command::Plot { .. })
    }
}

/// What a command reports back for the manifest.
#[derive(Debug, Default)]
pub struct Outcome {
    pub details: BTreeMap<String, Value>,
    /// Nonzero when the run completed but failed a numerical check.
    pub exit: i32,
    pub status: Option<String>,
}

impl Outcome {
    fn with(mut self, key: &str, v: impl Serialize) -> Self {
        self.details.insert(key.into(), serde_json::to_value(v).expect("serialisable"));
        self
    }
}

pub fn dispatch(cmd: &Command, cfg: &RunConfig, out: &OutputDir) -> Result<Outcome, CliError> {
    match cmd {
        Command::ChainCoeffs => chain_coeffs(cfg, out),
        Command::Rwa => rwa(cfg, out),
        Command::Evolve => run_evolve(cfg, out),
        Command::Polaron => polaron(cfg, out),
        Command::Sweep { jobs } => sweep(cfg, out, *jobs),
        Command::Analyze { input, column } => analyze(cfg, out, input, column.as_deref()),
        Command::Plot { series, x, alpha_time, log_y, title, name } => {
            let scale = if *alpha_time { cfg.model.alpha * cfg.model.alpha } else { 1.0 };
            plot(out, series, x, scale, *log_y, title, name)
        }
    }
}

fn params_meta(t: CsvTable, p: &ModelParams) -> CsvTable {
    t.meta("alpha", fmt_f64(p.alpha))
        .meta("omega_b", fmt_f64(p.omega_b))
        .meta("omega0", fmt_f64(p.omega0))
        .meta("omega_c", fmt_f64(p.omega_c))
        .meta("delta", fmt_f64(p.delta))
}

/// The configured chain, or one long enough for `t_max`.
fn chain_for(cfg: &RunConfig, t_max: f64) -> Result<ChainCoefficients, CliError> {
    let p = &cfg.model;
    let n = match cfg.chain.n {
        Some(n) => n,
        None => {
            let probe = map_to_chain(p, 60)?;
            light_cone_length(1.02 * probe.max_hopping(), t_max)
        }
    };
    Ok(map_to_chain_with(p, n, cfg.chain.m.unwrap_or(default_nodes(n)))?)
}

fn chain_coeffs(cfg: &RunConfig, out: &OutputDir) -> Result<Outcome, CliError> {
    let n = cfg.chain.n.unwrap_or(300);
    let c = map_to_chain_with(&cfg.model, n, cfg.chain.m.unwrap_or(default_nodes(n)))?;
    let mut t = CsvTable::new(["n", "eps_abs", "t_n"])
        .meta("g", fmt_f64(c.g))
        .meta("eta0", fmt_f64(c.weight_norm))
        .meta("M", c.m)
        .meta("N", c.n);
    t = params_meta(t, &cfg.model);
    for i in 0..c.n {
        t.push(vec![i as f64, c.eps[i], c.t.get(i).copied().unwrap_or(f64::NAN)]);
    }
    out.write_csv("chain_coeffs.csv", &t)?;
    Ok(Outcome::default().with("g", c.g).with("n", c.n).with("m", c.m))
}

fn free_atom(p: &ModelParams, times: &[f64]) -> AmplitudeSeries {
    AmplitudeSeries {
        times: times.to_vec(),
        values: times.iter().map(|t| C64::new(0.0, -p.delta * t).exp()).collect(),
        method: Method::Chain,
        frame: Frame::Lab,
        params: *p,
    }
}

/// Lab-frame amplitude on `samples + 1` uniform points, plus a note for the summary.
fn rwa_series(cfg: &RunConfig, method: Method) -> Result<(AmplitudeSeries, Value), CliError> {
    let p = &cfg.model;
    let (t_max, samples) = (cfg.rwa.t_max, cfg.rwa.samples);
    let grid = uniform_grid(t_max, samples);
    let (s, note) = match method {
        Method::Volterra => {
            let h = t_max / samples as f64;
            let k = (h / (0.1 / p.omega0) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let fine = volterra_solve(p, t_max, h / k as f64)?;
            let values = (0..=samples).map(|j| fine.values[(j * k).min(fine.len() - 1)]).collect();
            let s = AmplitudeSeries { times: grid, values, ..fine };
            (s, json!({ "dt": h / k as f64 }))
        }
        Method::Laplace => {
            let inv = laplace_invert(p, &grid[1..])?;
            let mut s = inv.series.clone();
            s.times.insert(0, 0.0);
            s.values.insert(0, C64::new(1.0, 0.0));
            (s, json!({ "flagged": inv.flagged_count() }))
        }
        Method::Chain if p.alpha == 0.0 => (free_atom(p, &grid), json!({ "chain_length": 0 })),
        Method::Chain => {
            let c = chain_for(cfg, t_max)?;
            (chain_evolve(&c, p.delta, t_max, samples)?, json!({ "chain_length": c.n }))
        }
        Method::Analytic => (analytic_series(p, &grid)?, Value::Null),
    };
    Ok((s.in_frame(Frame::Lab), note))
}

fn amplitude_table(s: &AmplitudeSeries) -> CsvTable {
    let mut t = params_meta(CsvTable::new(["t", "re_A", "im_A", "pop"]), &s.params)
        .meta("method", s.method.name())
        .meta("frame", "lab");
    for (time, a) in s.times.iter().zip(&s.values) {
        t.push(vec![*time, a.re, a.im, a.norm_sqr()]);
    }
    t
}

fn rwa(cfg: &RunConfig, out: &OutputDir) -> Result<Outcome, CliError> {
    let mut runs = Vec::new();
    let mut notes = BTreeMap::new();
    for m in &cfg.rwa.methods {
        let (s, note) = rwa_series(cfg, *m)?;
        out.write_csv(&format!("rwa_{}.csv", m.name()), &amplitude_table(&s))?;
        notes.insert(m.name().to_string(), note);
        runs.push(s);
    }
    let mut pairs = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            pairs.push(json!({
                "a": runs[i].method.name(),
                "b": runs[j].method.name(),
                "sup_pop_deviation": population_deviation(&runs[i], &runs[j], cfg.rwa.t_max),
            }));
        }
    }
    let summary = json!({
        "t_max": cfg.rwa.t_max,
        "samples": cfg.rwa.samples,
        "methods": notes,
        "pairwise": pairs,
    });
    if cfg.wants(Format::Json) {
        out.write_json("rwa_summary.json", &summary)?;
    }
    Ok(Outcome::default().with("comparison", summary))
}

fn evolution_config(cfg: &RunConfig, t_max: f64, mode: Mode) -> EvolutionConfig {
    let e = &cfg.evolution;
    let mut c = EvolutionConfig::defaults_for(&cfg.model, t_max, mode);
    c.d_b = e.d_b;
    c.chi_max = e.chi_max;
    c.svd_threshold = e.svd_threshold;
    if let Some(dt) = e.dt {
        c.dt = dt;
        let steps = c.steps().max(1);
        c.sample_stride = e
            .sample_stride
            .unwrap_or_else(|| (1..=steps).find(|d| steps % d == 0 && steps / d <= 200).unwrap_or(1));
    } else if let Some(s) = e.sample_stride {
        c.sample_stride = s;
    }
    c
}

fn evolution_table(ts: &TimeSeries, p: &ModelParams, cfg: &EvolutionConfig, atom: AtomState) -> CsvTable {
    let cols = [
        "t", "pop", "sx", "sy", "sz", "norm_drift", "max_bond", "discarded", "conserved_charge", "tail_occ", "energy",
        "top_fock",
    ];
    let mut t = params_meta(CsvTable::new(cols), p)
        .meta("mode", ts.mode.name())
        .meta("atom", serde_json::to_value(atom).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default())
        .meta("d_b", cfg.d_b)
        .meta("chi_max", cfg.chi_max)
        .meta("dt", fmt_f64(cfg.dt))
        .meta("chain_length", ts.chain_length);
    for i in 0..ts.len() {
        t.push(vec![
            ts.times[i],
            ts.pop_excited[i],
            ts.sigma_x[i],
            ts.sigma_y[i],
            ts.sigma_z[i],
            ts.norm_drift[i],
            ts.max_bond[i] as f64,
            ts.discarded_weight[i],
            ts.conserved_charge[i],
            ts.tail_occupation[i],
            ts.energy[i],
            ts.top_fock[i],
        ]);
    }
    t
}

fn run_evolve(cfg: &RunConfig, out: &OutputDir) -> Result<Outcome, CliError> {
    let e = &cfg.evolution;
    let c = chain_for(cfg, e.t_max)?;
    let ec = evolution_config(cfg, e.t_max, e.mode);
    ec.validate(&c, cfg.model.delta)?;
    let mut outcome = Outcome::default();
    let ts = if e.converge {
        let r = convergence_protocol(&c, cfg.model.delta, &ec, e.atom)?;
        outcome = outcome.with(
            "convergence",
            json!({
                "chi_deviation": r.chi_deviation,
                "d_b_deviation": r.d_b_deviation,
                "dt_deviation": r.dt_deviation,
                "converged": r.converged,
            }),
        );
        if !r.converged {
            outcome.exit = 1;
            outcome.status = Some("unconverged".into());
        }
        r.base
    } else {
        evolve(&c, cfg.model.delta, &ec, e.atom)?
    };
    out.write_csv("evolve.csv", &evolution_table(&ts, &cfg.model, &ec, e.atom))?;
    if !ts.is_valid() {
        outcome.exit = 1;
        outcome.status.get_or_insert_with(|| "invalid".into());
    }
    Ok(outcome
        .with("chain_length", ts.chain_length)
        .with("light_cone_violation", ts.light_cone_violation)
        .with("d_b_insufficient", ts.d_b_insufficient())
        .with("charge_drift", ts.charge_drift())
        .with("dt", ec.dt)
        .with("sample_stride", ec.sample_stride))
}

fn polaron(cfg: &RunConfig, out: &OutputDir) -> Result<Outcome, CliError> {
    let p = &cfg.model;
    let sol = silbey_harris_solve(p)?;
    let res = json!({
        "delta_tilde": sol.delta_tilde,
        "phi": sol.phi,
        "p_up_relaxed": sol.p_up_relaxed,
        "p_up_dressed": sol.p_up_dressed,
        "iterations": sol.iterations,
        "residual": sol.residual,
        "bisected": sol.bisected,
        "residual_population": residual_population(&sol, p),
    });
    out.write_json("polaron.json", &res)?;
    println!("{}", serde_json::to_string_pretty(&res)?);
    if !cfg.sweep.deltas.is_empty() {
        let mut t = params_meta(
            CsvTable::new(["delta", "delta_tilde", "phi", "p_up_relaxed", "p_up_dressed", "residual_population"]),
            p,
        );
        for &d in &cfg.sweep.deltas {
            let q = p.with_delta(d);
            let s = silbey_harris_solve(&q)?;
            t.push(vec![d, s.delta_tilde, s.phi, s.p_up_relaxed, s.p_up_dressed, residual_population(&s, &q).value()]);
        }
        out.write_csv("polaron_sweep.csv", &t)?;
    }
    Ok(Outcome::default().with("solution", res))
}

fn attempt<T: Serialize, E: ToString>(r: Result<T, E>) -> Value {
    match r {
        Ok(v) => json!(v),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn analyze(cfg: &RunConfig, out: &OutputDir, input: &std::path::Path, column: Option<&str>) -> Result<Outcome, CliError> {
    let table = CsvTable::read(input)?;
    if table.rows.is_empty() {
        return Err(CliError::Plot(format!("{}: no data rows", input.display())));
    }
    let name = match column {
        Some(c) => c.to_string(),
        None if table.columns.iter().any(|c| c == "pop") => "pop".into(),
        None => table.columns.get(1).cloned().ok_or_else(|| CliError::Plot("need at least two columns".into()))?,
    };
    let times = table.column("t").ok_or_else(|| CliError::Plot(format!("{}: no column 't'", input.display())))?;
    let values = table.column(&name).ok_or_else(|| CliError::Plot(format!("{}: no column '{name}'", input.display())))?;
    let tr = Trace::new(times, values);
    let th = PoleThresholds { zero_below: cfg.analysis.zero_below, large_above: cfg.analysis.large_above };
    let res = json!({
        "input": input.display().to_string(),
        "column": name,
        "frequency": attempt(oscillation_frequency(&tr)),
        "zero_crossing_frequency": attempt(zero_crossing_frequency(&tr)),
        "stationary": attempt(stationary_value_with(&tr, cfg.analysis.tail_fraction)),
        "decay_rate": attempt(decay_rate(&tr)),
        "pole_estimate": rwa_pole_estimates_with(&cfg.model, &th),
        "params": cfg.model,
    });
    out.write_json("analysis.json", &res)?;
    println!("{}", serde_json::to_string_pretty(&res)?);
    Ok(Outcome::default().with("analysis", res))
}

fn plot(
    out: &OutputDir,
    series: &[SeriesArg],
    x: &str,
    x_scale: f64,
    log_y: bool,
    title: &str,
    name: &str,
) -> Result<Outcome, CliError> {
    let mut spec = PlotSpec {
        title: title.into(),
        x_label: if x_scale != 1.0 { format!("{x} (alpha^2 units)") } else { x.into() },
        y_label: series.iter().map(|s| s.column.as_str()).collect::<Vec<_>>().join(", "),
        log_y,
        series: Vec::new(),
    };
    for s in series {
        let t = CsvTable::read(&s.path)?;
        if t.rows.is_empty() {
            return Err(CliError::Plot(format!("{}: empty CSV", s.path.display())));
        }
        let missing = |c: &str| CliError::Plot(format!("{}: no column '{c}'", s.path.display()));
        let xs = t.column(x).ok_or_else(|| missing(x))?;
        let ys = t.column(&s.column).ok_or_else(|| missing(&s.column))?;
        spec.series.push(Series {
            label: s.label.clone(),
            x: xs.iter().map(|v| v * x_scale).collect(),
            y: ys,
            filled: s.filled,
        });
    }
    out.write_bytes(name, render(&spec)?.as_bytes())?;
    Ok(Outcome::default())
}

/// One sweep point as persisted in `points/<delta>/point.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub delta: f64,
    /// Everything besides `delta` that the point depends on.
    pub key: Value,
    pub stat_pop_rwa: Option<f64>,
    pub stat_pop_full: Option<f64>,
    pub freq_rwa: Option<f64>,
    pub freq_full: Option<f64>,
    pub decay_rwa: Option<f64>,
    pub notes: Vec<String>,
}

fn point_dir(delta: f64) -> String {
    format!("points/delta_{}", fmt_f64(delta))
}

fn sweep_key(cfg: &RunConfig) -> Value {
    let mut model = serde_json::to_value(cfg.model).expect("serialisable");
    model.as_object_mut().unwrap().remove("delta");
    json!({
        "model": model,
        "chain": cfg.chain,
        "evolution": cfg.evolution,
        "analysis": { "tail_fraction": cfg.analysis.tail_fraction },
        "sweep": {
            "methods": cfg.sweep.methods,
            "t_max_rwa": cfg.sweep.t_max_rwa,
            "samples_rwa": cfg.sweep.samples_rwa,
            "t_max_full": cfg.sweep.t_max_full,
        },
    })
}

fn keep<T, E: ToString>(r: Result<T, E>, what: &str, notes: &mut Vec<String>) -> Option<T> {
    r.map_err(|e| notes.push(format!("{what}: {}", e.to_string()))).ok()
}

struct Chains {
    rwa: Option<ChainCoefficients>,
    full: Option<ChainCoefficients>,
}

fn sweep_point(cfg: &RunConfig, chains: &Chains, delta: f64, out: &OutputDir) -> Result<PointResult, CliError> {
    let p = cfg.model.with_delta(delta);
    let dir = point_dir(delta);
    let frac = cfg.analysis.tail_fraction;
    let mut r = PointResult {
        delta,
        key: sweep_key(cfg),
        stat_pop_rwa: None,
        stat_pop_full: None,
        freq_rwa: None,
        freq_full: None,
        decay_rwa: None,
        notes: Vec::new(),
    };
    if cfg.sweep.methods.iter().any(|m| m == "rwa") {
        let (t_max, samples) = (cfg.sweep.t_max_rwa, cfg.sweep.samples_rwa);
        let s = match &chains.rwa {
            Some(c) => chain_evolve(c, delta, t_max, samples)?,
            None => free_atom(&p, &uniform_grid(t_max, samples)),
        };
        out.write_csv(&format!("{dir}/rwa.csv"), &amplitude_table(&s))?;
        let pop = Trace::new(s.times.clone(), s.population());
        let coh = rwa_coherence(&s);
        r.stat_pop_rwa = keep(stationary_value_with(&pop, frac), "stat_pop_rwa", &mut r.notes).map(|e| e.value);
        r.freq_rwa = keep(oscillation_frequency(&coh), "freq_rwa", &mut r.notes);
        r.decay_rwa = keep(decay_rate(&coh), "decay_rwa", &mut r.notes);
    }
    if cfg.sweep.methods.iter().any(|m| m == "full") {
        let c = chains.full.as_ref().expect("full chain built");
        let ec = evolution_config(cfg, cfg.sweep.t_max_full, Mode::Full);
        ec.validate(c, delta)?;
        let excited = evolve(c, delta, &ec, AtomState::Excited)?;
        out.write_csv(&format!("{dir}/full_excited.csv"), &evolution_table(&excited, &p, &ec, AtomState::Excited))?;
        let plus = evolve(c, delta, &ec, AtomState::PlusSuperposition)?;
        out.write_csv(&format!("{dir}/full_plus.csv"), &evolution_table(&plus, &p, &ec, AtomState::PlusSuperposition))?;
        for (name, ts) in [("excited", &excited), ("plus", &plus)] {
            if !ts.is_valid() {
                r.notes.push(format!("full_{name}: run failed its validity checks"));
            }
        }
        let pop = Trace::new(excited.times.clone(), excited.pop_excited.clone());
        let sx = Trace::new(plus.times.clone(), plus.sigma_x.clone());
        r.stat_pop_full = keep(stationary_value_with(&pop, frac), "stat_pop_full", &mut r.notes).map(|e| e.value);
        r.freq_full = keep(oscillation_frequency(&sx), "freq_full", &mut r.notes);
    }
    out.write_json(&format!("{dir}/point.json"), &r)?;
    Ok(r)
}

fn sweep(cfg: &RunConfig, out: &OutputDir, jobs: usize) -> Result<Outcome, CliError> {
    use rayon::prelude::*;

    let mut deltas = cfg.sweep.deltas.clone();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    if deltas.is_empty() {
        return Err(CliError::Config(vec!["sweep.deltas: at least one detuning is required".into()]));
    }
    let key = sweep_key(cfg);
    let mut done = BTreeMap::new();
    let mut todo = Vec::new();
    for &d in &deltas {
        let prev = out
            .read_to_string(&format!("{}/point.json", point_dir(d)))
            .ok()
            .and_then(|s| serde_json::from_str::<PointResult>(&s).ok())
            .filter(|r| r.key == key && r.delta == d);
        match prev {
            Some(r) => {
                done.insert(fmt_f64(d), r);
            }
            None => todo.push(d),
        }
    }
    let reused: Vec<f64> = deltas.iter().copied().filter(|d| done.contains_key(&fmt_f64(*d))).collect();
    let has = |m: &str| cfg.sweep.methods.iter().any(|x| x == m);
    let chains = Chains {
        rwa: if has("rwa") && cfg.model.alpha != 0.0 && !todo.is_empty() {
            Some(chain_for(cfg, cfg.sweep.t_max_rwa)?)
        } else {
            None
        },
        full: if has("full") && !todo.is_empty() { Some(chain_for(cfg, cfg.sweep.t_max_full)?) } else { None },
    };
    if let Some(c) = &chains.full {
        let ec = evolution_config(cfg, cfg.sweep.t_max_full, Mode::Full);
        for &d in &todo {
            ec.validate(c, d)?;
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::io("thread pool", std::io::Error::other(e)))?;
    let fresh: Vec<Result<PointResult, CliError>> =
        pool.install(|| todo.par_iter().map(|&d| sweep_point(cfg, &chains, d, out)).collect());
    for r in fresh {
        let r = r?;
        done.insert(fmt_f64(r.delta), r);
    }
    let mut points: Vec<&PointResult> = done.values().collect();
    points.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    let opt = |x: Option<f64>| x.unwrap_or(f64::NAN);
    let mut summary = params_meta(
        CsvTable::new(["delta", "stat_pop_rwa", "stat_pop_full", "freq_rwa", "freq_full", "decay_rwa"]),
        &cfg.model,
    );
    summary.meta.retain(|(k, _)| k != "delta");
    for r in &points {
        summary.push(vec![
            r.delta,
            opt(r.stat_pop_rwa),
            opt(r.stat_pop_full),
            opt(r.freq_rwa),
            opt(r.freq_full),
            opt(r.decay_rwa),
        ]);
    }
    out.write_csv("summary.csv", &summary)?;
    if cfg.wants(Format::Svg) {
        sweep_plots(cfg, out, &points, &summary)?;
    }
    Ok(Outcome::default()
        .with("computed", &todo)
        .with("reused", &reused)
        .with("points", points.iter().map(|r| point_dir(r.delta)).collect::<Vec<_>>()))
}

fn sweep_plots(cfg: &RunConfig, out: &OutputDir, points: &[&PointResult], summary: &CsvTable) -> Result<(), CliError> {
    let a2 = cfg.model.alpha * cfg.model.alpha;
    let scale = if a2 > 0.0 { a2 } else { 1.0 };
    let mut pop = PlotSpec {
        title: "Excited-state population".into(),
        x_label: "t (alpha^2 units)".into(),
        y_label: "P_e".into(),
        ..Default::default()
    };
    for r in points {
        let dir = point_dir(r.delta);
        for (file, col, tag, filled) in [("rwa.csv", "pop", "RWA", true), ("full_excited.csv", "pop", "full", false)] {
            let rel = format!("{dir}/{file}");
            if out.exists(&rel) {
                let t = CsvTable::parse(&out.read_to_string(&rel)?)?;
                pop.series.push(Series {
                    label: format!("{tag} delta={}", fmt_f64(r.delta)),
                    x: t.column("t").unwrap_or_default().iter().map(|x| x * scale).collect(),
                    y: t.column(col).unwrap_or_default(),
                    filled,
                });
            }
        }
    }
    if !pop.series.is_empty() {
        out.write_bytes("population.svg", render(&pop)?.as_bytes())?;
    }
    let delta = summary.column("delta").unwrap_or_default();
    let pick = |col: &str, label: &str, filled: bool| Series {
        label: label.into(),
        x: delta.clone(),
        y: summary.column(col).unwrap_or_default(),
        filled,
    };
    let freq = PlotSpec {
        title: "Coherence frequency".into(),
        x_label: "delta".into(),
        y_label: "frequency".into(),
        log_y: false,
        series: vec![pick("freq_rwa", "RWA", true), pick("freq_full", "full", false)],
    };
    let stat = PlotSpec {
        title: "Stationary population".into(),
        x_label: "delta".into(),
        y_label: "P_e".into(),
        log_y: true,
        series: vec![pick("stat_pop_rwa", "RWA", true), pick("stat_pop_full", "full", false)],
    };
    for (name, spec) in [("frequency.svg", freq), ("stationary.svg", stat)] {
        match render(&spec) {
            Ok(svg) => out.write_bytes(name, svg.as_bytes())?,
            Err(e) => log::warn!("{name} skipped: {e}"),
        }
    }
    Ok(())
}
