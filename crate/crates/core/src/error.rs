use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Every amplitude is exactly zero, so there is nothing to renormalize.
    #[error("degenerate state: all amplitudes are zero")]
    DegenerateState,

    #[error("capacity exceeded: {what} is {requested}, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    /// Subsystem rosters or indices do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// The jump factor has (numerically) no overlap with the wavefunction.
    #[error("degenerate hit at x = {center}: renormalization factor vanishes")]
    DegenerateHit { center: f64 },

    #[error("state is not normalized (total mass {mass})")]
    NotNormalized { mass: f64 },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("could not parse config: {0}")]
    Parse(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
