use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use bandgap::commands::{Command, SeriesArg};
use bandgap::config::{apply_override, from_tree, load_tree};
use bandgap::error::CliError;

#[derive(Parser)]
#[command(name = "bandgap", version, about = "Two-level emitter in a photonic band gap")]
struct Cli {
    /// TOML or JSON run configuration.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    omega_b: Option<f64>,
    #[arg(long, global = true)]
    omega0: Option<f64>,
    #[arg(long, global = true)]
    omega_c: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Output directory, overriding `output.directory`.
    #[arg(long, short, global = true)]
    output: Option<String>,
    /// Arbitrary override, e.g. `--set evolution.d_b=8`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Chain energies and hoppings.
    ChainCoeffs,
    /// Exact single-excitation dynamics.
    Rwa {
        /// volterra, laplace, chain or analytic; repeatable.
        #[arg(long = "method")]
        methods: Vec<String>,
    },
    /// TEBD evolution.
    Evolve {
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        atom: Option<String>,
        /// Run the convergence protocol.
        #[arg(long)]
        converge: bool,
    },
    /// Variational polaron residual population.
    Polaron,
    /// Detuning sweep; resumes from completed points.
    Sweep {
        /// Comma-separated detunings.
        #[arg(long, value_delimiter = ',')]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
    },
    /// Frequency, plateau and decay of a time series.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: Option<String>,
    },
    /// SVG line plot from CSV columns.
    Plot(PlotArgs),
}

#[derive(Args)]
struct PlotArgs {
    /// `path:column[:label[:open]]`; repeatable.
    #[arg(long = "series", required = true)]
    series: Vec<SeriesArg>,
    #[arg(long, default_value = "t")]
    x: String,
    /// Multiply the x column by alpha^2.
    #[arg(long)]
    alpha_time: bool,
    #[arg(long)]
    log_y: bool,
    #[arg(long, default_value = "")]
    title: String,
    #[arg(long, default_value = "plot.svg")]
    name: String,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn set(tree: &mut Value, errors: &mut Vec<String>, key: &str, value: String) {
    if let Err(e) = apply_override(tree, key, &value) {
        errors.push(e);
    }
}

fn build(cli: Cli) -> Result<(Command, bandgap::config::RunConfig), CliError> {
    let mut tree = match &cli.config {
        Some(p) => load_tree(p)?,
        None => Value::Object(Map::new()),
    };
    let mut errors = Vec::new();
    for (k, v) in [
        ("model.alpha", cli.alpha),
        ("model.omega_b", cli.omega_b),
        ("model.omega0", cli.omega0),
        ("model.omega_c", cli.omega_c),
        ("model.delta", cli.delta),
    ] {
        if let Some(v) = v {
            set(&mut tree, &mut errors, k, format!("{v:?}"));
        }
    }
    for s in &cli.sets {
        match s.split_once('=') {
            Some((k, v)) => set(&mut tree, &mut errors, k.trim(), v.trim().to_string()),
            None => errors.push(format!("--set '{s}': expected KEY=VALUE")),
        }
    }
    if let Some(o) = &cli.output {
        tree.as_object_mut().unwrap().entry("output").or_insert_with(|| Value::Object(Map::new()));
        tree["output"]["directory"] = Value::String(o.clone());
    }
    let quoted = |s: &str| Value::String(s.to_string()).to_string();
    let cmd = match cli.command {
        Sub::ChainCoeffs => Command::ChainCoeffs,
        Sub::Rwa { methods } => {
            if !methods.is_empty() {
                let list: Vec<String> = methods.iter().map(|m| quoted(m)).collect();
                set(&mut tree, &mut errors, "rwa.methods", format!("[{}]", list.join(", ")));
            }
            Command::Rwa
        }
        Sub::Evolve { mode, atom, converge } => {
            if let Some(m) = mode {
                set(&mut tree, &mut errors, "evolution.mode", quoted(&m));
            }
            if let Some(a) = atom {
                set(&mut tree, &mut errors, "evolution.atom", quoted(&a));
            }
            if converge {
                set(&mut tree, &mut errors, "evolution.converge", "true".into());
            }
            Command::Evolve
        }
        Sub::Polaron => Command::Polaron,
        Sub::Sweep { deltas, jobs } => {
            if !deltas.is_empty() {
                let list: Vec<String> = deltas.iter().map(|d| format!("{d:?}")).collect();
                set(&mut tree, &mut errors, "sweep.deltas", format!("[{}]", list.join(", ")));
            }
            Command::Sweep { jobs: jobs.max(1) }
        }
        Sub::Analyze { input, column } => Command::Analyze { input, column },
        Sub::Plot(a) => Command::Plot {
            series: a.series,
            x: a.x,
            alpha_time: a.alpha_time,
            log_y: a.log_y,
            title: a.title,
            name: a.name,
        },
    };
    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }
    let cfg = from_tree(&tree, cmd.needs_model())?;
    Ok((cmd, cfg))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = build(cli).and_then(|(cmd, cfg)| bandgap::execute(&cmd, &cfg)).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
