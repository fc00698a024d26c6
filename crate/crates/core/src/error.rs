use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("query point at signed distance {distance:.3e} lies outside the tube of half-width {half_width:.3e}")]
    OutOfTube { distance: f64, half_width: f64 },

    #[error("interface too close to the boundary: distance {distance:.4} must exceed {required:.4}")]
    MarginViolation { distance: f64, required: f64 },

    #[error("quadrature did not converge (estimated error {estimate:.3e})")]
    Quadrature { estimate: f64 },

    #[error("linear solver failed after {iterations} iterations (relative residual {residual:.3e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("CFL violation: max|v| dt / h = {courant:.3} exceeds 1")]
    Cfl { courant: f64 },

    #[error("state corruption: {0}")]
    StateCorruption(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported scenario: {0}")]
    UnsupportedScenario(String),

    #[error("rate fit refused: {0}")]
    Fit(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json { path: path.into(), source }
    }

    /// Errors caused by bad user input rather than by a failing computation.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidGrid(_)
                | Error::MarginViolation { .. }
                | Error::UnsupportedScenario(_)
                | Error::Json { .. }
        )
    }
}
