//! Experiment drivers behind the `favard` binary.
//!
//! The library half exists so integration tests can call the runners
//! directly; the binary only parses flags, loads a config, and dispatches.

// Validation guards are written `!(x > 0.0)` on purpose: the negation is
// what rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod run;

pub use config::ExperimentConfig;
pub use run::{run, ExperimentKind, RunOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] favard_core::error::Error),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Exit code contract: 2 for invalid configs or inputs, 1 for everything
    /// else (resource limits, I/O, internal inconsistencies).
    pub fn exit_code(&self) -> i32 {
        use favard_core::error::Error as CoreError;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(CoreError::InvalidInput(_)) => 2,
            CliError::Core(CoreError::MapUndefined(_)) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        use favard_core::error::Error as CoreError;
        match self {
            CliError::Config(_) => "config",
            CliError::Core(CoreError::InvalidInput(_)) => "invalid-input",
            CliError::Core(CoreError::MapUndefined(_)) => "map-undefined",
            CliError::Core(CoreError::ResourceLimit(_)) => "resource-limit",
            CliError::Core(CoreError::Inconsistency(_)) => "inconsistency",
            CliError::Io(_) => "io",
            CliError::Csv(_) => "csv",
            CliError::Json(_) => "json",
        }
    }

    /// Machine-readable rendering for stderr.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({"error": {"kind": self.kind(), "message": self.to_string()}})
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
