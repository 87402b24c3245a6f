// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Experiment harness for the dynloc configuration-space laboratory:
//! TOML experiment configs, deterministic JSON/CSV/SVG artifacts, the
//! verification registry, and the `dynloc` command-line binary.

use std::fmt;

pub mod checks;
pub mod config;
pub mod registry;
pub mod report;
pub mod svg;

/// Harness-level errors, split so the CLI can map them to exit codes:
/// parse/config problems exit 2, numerical failures exit 1.
#[derive(Debug)]
pub enum LabError {
    /// Configuration file could not be parsed (carries line/column from
    /// the TOML parser).
    Parse(String),
    /// Configuration is well-formed but invalid.
    Config(String),
    Core(dynloc_core::Error),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Parse(m) => write!(f, "parse error: {m}"),
            LabError::Config(m) => write!(f, "config error: {m}"),
            LabError::Core(e) => write!(f, "{e}"),
            LabError::Io(e) => write!(f, "io error: {e}"),
            LabError::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<dynloc_core::Error> for LabError {
    fn from(e: dynloc_core::Error) -> Self {
        LabError::Core(e)
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e)
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Json(e)
    }
}

impl LabError {
    /// Exit code the CLI should use for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Parse(_) | LabError::Config(_) => 2,
            _ => 1,
        }
    }
}
