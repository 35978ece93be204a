use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error(transparent)]
    Core(#[from] bandgap_core::Error),
    #[error(transparent)]
    Tebd(#[from] bandgap_tebd::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("plot: {0}")]
    Plot(String),
    #[error("refusing to write outside the output directory: {0}")]
    OutsideOutput(String),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(bandgap_core::Error::InvalidParams(_)) => 2,
            CliError::Tebd(bandgap_tebd::Error::InvalidConfig(_)) => 2,
            _ => 1,
        }
    }
}
