use gsb_core::GsbError;
use thiserror::Error;

/// Failures of a run, each tied to one process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Schema, validation or guard failure before or during model construction.
    #[error("config error: {0}")]
    Config(String),
    /// Eigen or resolvent solver failure.
    #[error("solver error: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<GsbError> for CliError {
    fn from(e: GsbError) -> Self {
        match e {
            GsbError::NonConverged { .. }
            | GsbError::GroundStateResidual { .. }
            | GsbError::BatchItem { .. }
            | GsbError::NonPositiveShift(_) => CliError::Solver(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
