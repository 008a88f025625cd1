//! Experiment driver for the interference-channel simulator: run
//! configuration, the Monte-Carlo PER sweep, EXIT-chart runs and result
//! files.

pub mod config;
pub mod emit;
pub mod exit_run;
pub mod per;
pub mod selftest;

pub use config::RunConfig;
pub use per::{run_per, PerPoint};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error in {field}: {message}")]
    Config { field: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Sim(#[from] iasim_core::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl HarnessError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => 2,
            _ => 3,
        }
    }
}
