use std::io;

use thiserror::Error;

/// Errors raised while configuring or running a simulation.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cell {cell}: {what} is singular")]
    Singular { cell: usize, what: &'static str },

    #[error("cell {cell}: degenerate {what} (zero normalization)")]
    Degenerate { cell: usize, what: &'static str },

    #[error("trial {trial}: {source}")]
    Trial {
        trial: u64,
        #[source]
        source: Box<SimError>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] toml::ser::Error),
}

impl SimError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        SimError::Config(msg.into())
    }

    pub(crate) fn in_trial(self, trial: u64) -> Self {
        SimError::Trial {
            trial,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
