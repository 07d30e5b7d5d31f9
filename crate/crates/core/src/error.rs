use thiserror::Error;

#[derive(Debug, Error)]
pub enum GsbError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator `{name}` is not hermitian (deviation {deviation:.3e})")]
    NotHermitian { name: String, deviation: f64 },

    #[error("Fock basis of dimension {dim} exceeds the configured maximum {max}")]
    BasisTooLarge { dim: u128, max: usize },

    #[error("{what} did not converge after {iterations} iterations (best residual {residual:.3e})")]
    NonConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("resolvent shift must be positive, got {0}")]
    NonPositiveShift(f64),

    #[error("resolvent solve failed for batch item {index}: {source}")]
    BatchItem {
        index: usize,
        #[source]
        source: Box<GsbError>,
    },

    #[error("cost guard exceeded: {0}")]
    CostGuard(String),

    #[error("ground state residual {residual:.3e} exceeds the required {required:.3e}")]
    GroundStateResidual { residual: f64, required: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, GsbError>;
