use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed case file: {0}")]
    Parse(String),

    #[error("invalid case: {0}")]
    Validation(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error(
        "power flow did not converge after {iterations} iterations \
         (worst mismatch {mismatch:.3e} pu at bus {bus})"
    )]
    NonConvergence {
        iterations: usize,
        mismatch: f64,
        bus: u32,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("simulation diverged at t = {time:.4} s: {detail}")]
    Divergence { time: f64, detail: String },

    #[error("PLL of the GFL at bus {bus} lost lock at t = {time:.4} s (|v_q|/|v| = {ratio:.3})")]
    LossOfLock { bus: u32, time: f64, ratio: f64 },

    #[error("series too short: {0}")]
    TooShort(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
