use std::path::PathBuf;

use crate::trajectory::TrajectoryState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("outside the model domain: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("closed form unavailable ({0}); use the numeric integrator")]
    Degenerate(String),

    #[error("trajectory blew up at t* = {t_star} s: {reason}")]
    BlowUp {
        t_star: f64,
        reason: String,
        last_valid: TrajectoryState,
    },

    #[error("CFL number {cfl:.4} exceeds cap {cap} at step {step}")]
    Cfl { cfl: f64, cap: f64, step: usize },

    #[error("nonpositive density {value:e} at cell ({i}, {j}), step {step}")]
    NegativeDensity {
        i: usize,
        j: usize,
        value: f64,
        step: usize,
    },

    #[error("vortex tracking lost: {0}")]
    TrackingLost(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
