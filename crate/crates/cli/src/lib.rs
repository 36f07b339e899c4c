//! Library side of the command-line front end: configuration parsing, the
//! analyze/sweep drivers, and result documents. The binary in `main.rs` is a
//! thin argument-handling shell over these functions.

pub mod config;
pub mod document;
pub mod run;

use std::fmt;

pub use config::RunConfig;
pub use document::{sweep_to_csv, Document};
pub use run::{run_analyze, run_sweep, scenario_catalogue, scenario_listing_text};

/// Process-level error classes; the binary maps them onto exit codes
/// (2 configuration/schema, 3 numerical).
#[derive(Debug, Clone)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl std::error::Error for CliError {}

/// Parses a configuration file with strict schema checking.
pub fn load_config(text: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("schema: {e}")))
}

/// Renders a document deterministically (sorted maps, fixed field order).
pub fn document_to_json(doc: &Document) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("document serializes");
    out.push('\n');
    out
}
