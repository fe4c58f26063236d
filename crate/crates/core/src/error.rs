use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix of dimension {0} exceeds the supported maximum of 512")]
    TooLarge(usize),

    /// QR iteration stalled; carries the unreduced active block `[lo, hi]`.
    #[error("eigenvalue iteration did not converge on block [{lo}, {hi}] after {iterations} iterations")]
    EigenNoConvergence { lo: usize, hi: usize, iterations: usize },

    #[error("Jacobi SVD did not converge after {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },

    #[error("singular linear system")]
    Singular,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("transition {index} has no behavior next-action, required by the SARSA rule")]
    MissingBehaviorAction { index: usize },

    #[error("non-finite state at time {time}")]
    NonFiniteState { time: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {source}")]
    Parse {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    /// Configuration-class errors map to exit status 2 in the CLI.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            LabError::Config(_)
                | LabError::Dimension(_)
                | LabError::Io { .. }
                | LabError::Parse { .. }
                | LabError::Json(_)
                | LabError::MissingBehaviorAction { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
