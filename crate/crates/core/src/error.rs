use thiserror::Error;

use crate::linalg::CMatrix;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Spectrum too close to degenerate for eigenvector-based quantities.
    #[error("degenerate spectrum: min eigenvalue gap {min_gap:.3e}{}", .time.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    Degenerate {
        min_gap: f64,
        time: Option<f64>,
        /// Offending matrix, row-major, when known.
        matrix: Option<Box<CMatrix>>,
    },

    #[error("eigenvalue iteration failed to converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn degenerate(min_gap: f64) -> Self {
        Error::Degenerate {
            min_gap,
            time: None,
            matrix: None,
        }
    }

    /// Attaches a simulation time to a degeneracy error; other variants pass through.
    pub fn at_time(self, t: f64) -> Self {
        match self {
            Error::Degenerate { min_gap, matrix, .. } => Error::Degenerate {
                min_gap,
                time: Some(t),
                matrix,
            },
            other => other,
        }
    }

    /// Attaches the offending matrix to a degeneracy error.
    pub fn with_matrix(self, j: &CMatrix) -> Self {
        match self {
            Error::Degenerate { min_gap, time, .. } => Error::Degenerate {
                min_gap,
                time,
                matrix: Some(Box::new(j.clone())),
            },
            other => other,
        }
    }
}
