//! Run configuration: a sectioned TOML (or JSON) file, with command-line
//! overrides applied on the parsed tree before validation.

use std::collections::BTreeSet;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use bandgap_core::rwa::Method;
use bandgap_core::spectral::ModelParams;
use bandgap_tebd::{AtomState, Mode};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RwaSection {
    pub methods: Vec<Method>,
    pub t_max: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSection {
    pub mode: Mode,
    pub atom: AtomState,
    pub d_b: usize,
    pub chi_max: usize,
    pub svd_threshold: f64,
    pub t_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<usize>,
    pub converge: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSection {
    pub tail_fraction: f64,
    /// Detunings excluded from pole-formula comparison, in units of `omega_b`.
    pub exclusion: [f64; 2],
    pub zero_below: f64,
    pub large_above: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    pub deltas: Vec<f64>,
    pub methods: Vec<String>,
    pub t_max_rwa: f64,
    pub samples_rwa: usize,
    pub t_max_full: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            _ => Err(format!("unknown format '{s}' (expected csv, json or svg)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSection {
    pub directory: String,
    pub formats: Vec<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelParams,
    pub chain: ChainSection,
    pub rwa: RwaSection,
    pub evolution: EvolutionSection,
    pub analysis: AnalysisSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

/// Parses a file into a generic tree. `.json` files are read as JSON,
/// anything else as TOML.
pub fn load_tree(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| {
            CliError::Config(vec![format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column())])
        })
    } else {
        parse_toml(&text).map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))
    }
}

pub fn parse_toml(text: &str) -> Result<Value, String> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
    serde_json::to_value(table).map_err(|e| e.to_string())
}

/// Sets the dotted `key` to `raw`, read as a TOML value when it parses as
/// one and as a bare string otherwise.
pub fn apply_override(tree: &mut Value, key: &str, raw: &str) -> Result<(), String> {
    let value = match parse_toml(&format!("v = {raw}")) {
        Ok(Value::Object(mut m)) => m.remove("v").unwrap_or(Value::String(raw.into())),
        _ => Value::String(raw.into()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("malformed key '{key}'"));
    }
    if !tree.is_object() {
        *tree = Value::Object(Map::new());
    }
    let mut node = tree;
    for p in &parts[..parts.len() - 1] {
        let map = node.as_object_mut().ok_or_else(|| format!("'{key}': '{p}' is not a section"))?;
        node = map.entry(p.to_string()).or_insert_with(|| Value::Object(Map::new()));
        if !node.is_object() {
            return Err(format!("'{key}': '{p}' is not a section"));
        }
    }
    node.as_object_mut().unwrap().insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Walks the tree, collecting every problem instead of stopping at the first.
struct Reader<'a> {
    root: &'a Value,
    errors: Vec<String>,
    seen: BTreeSet<String>,
}

impl<'a> Reader<'a> {
    fn lookup(&mut self, key: &str) -> Option<&'a Value> {
        self.seen.insert(key.to_string());
        let mut node = self.root;
        for p in key.split('.') {
            node = node.as_object()?.get(p)?;
        }
        Some(node)
    }

    fn f64_opt(&mut self, key: &str) -> Option<f64> {
        match self.lookup(key)? {
            Value::Number(n) => n.as_f64(),
            other => {
                self.errors.push(format!("{key}: expected a number, got {other}"));
                None
            }
        }
    }

    fn f64_req(&mut self, key: &str) -> f64 {
        match self.lookup(key) {
            None => {
                self.errors.push(format!("{key}: missing required key"));
                f64::NAN
            }
            Some(_) => self.f64_opt(key).unwrap_or(f64::NAN),
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        self.f64_opt(key).unwrap_or(default)
    }

    fn usize_opt(&mut self, key: &str) -> Option<usize> {
        let v = self.lookup(key)?;
        match v.as_u64() {
            Some(n) => Some(n as usize),
            None => {
                self.errors.push(format!("{key}: expected a non-negative integer, got {v}"));
                None
            }
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> usize {
        self.usize_opt(key).unwrap_or(default)
    }

    fn bool_or(&mut self, key: &str, default: bool) -> bool {
        match self.lookup(key) {
            None => default,
            Some(Value::Bool(b)) => *b,
            Some(other) => {
                self.errors.push(format!("{key}: expected true or false, got {other}"));
                default
            }
        }
    }

    fn parsed_or<T: FromStr<Err = String>>(&mut self, key: &str, default: T) -> T {
        match self.lookup(key) {
            None => default,
            Some(Value::String(s)) => s.parse().unwrap_or_else(|e| {
                self.errors.push(format!("{key}: {e}"));
                default
            }),
            Some(other) => {
                self.errors.push(format!("{key}: expected a string, got {other}"));
                default
            }
        }
    }

    fn list<T>(&mut self, key: &str, default: Vec<T>, item: impl Fn(&Value) -> Result<T, String>) -> Vec<T> {
        match self.lookup(key) {
            None => default,
            Some(Value::Array(xs)) => {
                let mut out = Vec::with_capacity(xs.len());
                for (i, x) in xs.iter().enumerate() {
                    match item(x) {
                        Ok(v) => out.push(v),
                        Err(e) => self.errors.push(format!("{key}[{i}]: {e}")),
                    }
                }
                out
            }
            Some(other) => {
                self.errors.push(format!("{key}: expected a list, got {other}"));
                default
            }
        }
    }

    /// Keys present in the tree but never read.
    fn unknown_keys(&self) -> Vec<String> {
        let mut out = Vec::new();
        fn walk(prefix: &str, v: &Value, seen: &BTreeSet<String>, out: &mut Vec<String>) {
            if let Value::Object(m) = v {
                for (k, child) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    if seen.contains(&key) {
                        continue;
                    }
                    if child.is_object() && seen.iter().any(|s| s.starts_with(&format!("{key}."))) {
                        walk(&key, child, seen, out);
                    } else {
                        out.push(format!("{key}: unknown key"));
                    }
                }
            }
        }
        walk("", self.root, &self.seen, &mut out);
        out
    }
}

fn number(v: &Value) -> Result<f64, String> {
    v.as_f64().ok_or_else(|| format!("expected a number, got {v}"))
}

fn string_item(v: &Value) -> Result<String, String> {
    v.as_str().map(str::to_string).ok_or_else(|| format!("expected a string, got {v}"))
}

/// Builds and validates a configuration. `need_model` controls whether the
/// model section is mandatory.
pub fn from_tree(tree: &Value, need_model: bool) -> Result<RunConfig, CliError> {
    let mut r = Reader { root: tree, errors: Vec::new(), seen: BTreeSet::new() };
    let model = if need_model {
        ModelParams {
            alpha: r.f64_req("model.alpha"),
            omega_b: r.f64_req("model.omega_b"),
            omega0: r.f64_req("model.omega0"),
            omega_c: r.f64_req("model.omega_c"),
            delta: r.f64_req("model.delta"),
        }
    } else {
        let d = ModelParams::standard(0.0);
        ModelParams {
            alpha: r.f64_or("model.alpha", d.alpha),
            omega_b: r.f64_or("model.omega_b", d.omega_b),
            omega0: r.f64_or("model.omega0", d.omega0),
            omega_c: r.f64_or("model.omega_c", d.omega_c),
            delta: r.f64_or("model.delta", d.delta),
        }
    };
    if [model.alpha, model.omega_b, model.omega0, model.omega_c, model.delta].iter().all(|x| !x.is_nan()) {
        r.errors.extend(model.violations().into_iter().map(|v| format!("model.{v}")));
    }
    let chain = ChainSection { n: r.usize_opt("chain.n"), m: r.usize_opt("chain.m") };
    if chain.n.is_some_and(|n| n < 2) {
        r.errors.push("chain.n: must be >= 2".into());
    }
    if let (Some(n), Some(m)) = (chain.n, chain.m) {
        if m < 10 * n {
            r.errors.push(format!("chain.m: needs at least 10 * chain.n = {} nodes, got {m}", 10 * n));
        }
    }
    let rwa = RwaSection {
        methods: r.list("rwa.methods", vec![Method::Chain], |v| {
            v.as_str().ok_or_else(|| format!("expected a string, got {v}"))?.parse()
        }),
        t_max: r.f64_or("rwa.t_max", 1.5),
        samples: r.usize_or("rwa.samples", 300),
    };
    if !(rwa.t_max > 0.0) {
        r.errors.push(format!("rwa.t_max: must be > 0, got {}", rwa.t_max));
    }
    if rwa.methods.is_empty() {
        r.errors.push("rwa.methods: at least one method is required".into());
    }
    if rwa.samples < 1 {
        r.errors.push("rwa.samples: must be >= 1".into());
    }
    let evolution = EvolutionSection {
        mode: r.parsed_or("evolution.mode", Mode::Full),
        atom: r.parsed_or("evolution.atom", AtomState::Excited),
        d_b: r.usize_or("evolution.d_b", 6),
        chi_max: r.usize_or("evolution.chi_max", 64),
        svd_threshold: r.f64_or("evolution.svd_threshold", 1e-10),
        t_max: r.f64_or("evolution.t_max", 1.5),
        dt: r.f64_opt("evolution.dt"),
        sample_stride: r.usize_opt("evolution.sample_stride"),
        converge: r.bool_or("evolution.converge", false),
    };
    if !(evolution.t_max > 0.0) {
        r.errors.push(format!("evolution.t_max: must be > 0, got {}", evolution.t_max));
    }
    let exclusion = r.list("analysis.exclusion", vec![0.5, 1.5], number);
    let analysis = AnalysisSection {
        tail_fraction: r.f64_or("analysis.tail_fraction", 0.1),
        exclusion: if exclusion.len() == 2 {
            [exclusion[0], exclusion[1]]
        } else {
            r.errors.push(format!("analysis.exclusion: expected two bounds, got {}", exclusion.len()));
            [0.5, 1.5]
        },
        zero_below: r.f64_or("analysis.zero_below", 0.05),
        large_above: r.f64_or("analysis.large_above", 3.0),
    };
    if !(analysis.tail_fraction > 0.0 && analysis.tail_fraction <= 1.0) {
        r.errors.push(format!("analysis.tail_fraction: must lie in (0, 1], got {}", analysis.tail_fraction));
    }
    if analysis.exclusion[0] > analysis.exclusion[1] {
        r.errors.push("analysis.exclusion: lower bound exceeds upper bound".into());
    }
    let sweep = SweepSection {
        deltas: r.list("sweep.deltas", vec![], number),
        methods: r.list("sweep.methods", vec!["rwa".into()], string_item),
        t_max_rwa: r.f64_or("sweep.t_max_rwa", 20.0),
        samples_rwa: r.usize_or("sweep.samples_rwa", 2000),
        t_max_full: r.f64_or("sweep.t_max_full", 5.0),
    };
    for (i, m) in sweep.methods.iter().enumerate() {
        if m != "rwa" && m != "full" {
            r.errors.push(format!("sweep.methods[{i}]: unknown method '{m}' (expected rwa or full)"));
        }
    }
    for (i, d) in sweep.deltas.iter().enumerate() {
        if !(*d >= 0.0) {
            r.errors.push(format!("sweep.deltas[{i}]: must be >= 0, got {d}"));
        }
    }
    let directory = match r.lookup("output.directory") {
        None => "out".to_string(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => {
            r.errors.push(format!("output.directory: expected a string, got {other}"));
            "out".into()
        }
    };
    let formats = r.list("output.formats", vec![Format::Csv, Format::Json], |v| {
        v.as_str().ok_or_else(|| format!("expected a string, got {v}"))?.parse()
    });
    let output = OutputSection { directory, formats };
    let mut errors = r.errors.clone();
    errors.extend(r.unknown_keys());
    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }
    Ok(RunConfig { model, chain, rwa, evolution, analysis, sweep, output })
}

/// Parses serialised TOML back into a validated configuration.
pub fn from_toml_str(text: &str) -> Result<RunConfig, CliError> {
    let tree = parse_toml(text).map_err(|e| CliError::Config(vec![e]))?;
    from_tree(&tree, true)
}
