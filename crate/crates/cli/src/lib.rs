//! Command-line driver: configuration, output handling, plotting and the
//! subcommands that tie the solvers together.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;

use std::time::Instant;

use commands::{dispatch, Command};
use config::RunConfig;
use error::CliError;
use output::{Manifest, OutputDir};

/// Runs one command, writes `config.toml` and `manifest.json`, and returns
/// the process exit code.
pub fn execute(cmd: &Command, cfg: &RunConfig) -> Result<i32, CliError> {
    let start = Instant::now();
    let out = OutputDir::create(&cfg.output.directory)?;
    let echo = cfg.to_toml();
    out.write_bytes("config.toml", echo.as_bytes())?;
    let result = dispatch(cmd, cfg, &out);
    let (status, details, error, code) = match result {
        Ok(o) => (o.status.unwrap_or_else(|| "ok".into()), o.details, None, o.exit),
        Err(e) => {
            eprintln!("error: {e}");
            ("failed".to_string(), Default::default(), Some(e.to_string()), e.exit_code())
        }
    };
    let manifest = Manifest {
        command: cmd.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        status,
        wall_time_s: start.elapsed().as_secs_f64(),
        config: echo,
        outputs: out.written(),
        details,
        error,
    };
    out.write_json("manifest.json", &manifest)?;
    Ok(code)
}
