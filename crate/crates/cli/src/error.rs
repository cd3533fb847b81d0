//! CLI error type with stable machine-readable kinds and exit codes.

use std::fmt;

/// Everything that can go wrong in the CLI, split by how the caller should
/// react: configuration mistakes exit with code 2, runtime failures with 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The configuration file (or an argument derived from it) is invalid.
    #[error("{0}")]
    Config(String),
    /// A plot input lacks a column the figure needs.
    #[error("column '{column}' missing from {file}")]
    MissingColumn { column: String, file: String },
    /// Malformed input data (unparseable table cell, empty input, ...).
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] cattrans_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Stable identifier for the machine-readable error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::MissingColumn { .. } => "missing_column",
            CliError::Data(_) => "data",
            CliError::Core(_) => "core",
            CliError::Io(_) => "io",
            CliError::Json(_) => "json",
        }
    }

    /// Process exit code: 2 for configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    /// One-line JSON object (`{"error":{"kind":...,"message":...}}`)
    /// printed to stdout on failure.
    pub fn to_json(&self) -> String {
        let body = serde_json::json!({
            "error": { "kind": self.kind(), "message": self.to_string() }
        });
        body.to_string()
    }
}

impl fmt::Display for Kind<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0.kind())
    }
}

/// Display adapter used in log lines.
pub struct Kind<'a>(pub &'a CliError);

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_and_kinds_are_stable() {
        let cfg = CliError::Config("missing seed".into());
        assert_eq!(cfg.exit_code(), 2);
        assert_eq!(cfg.kind(), "config");

        let col = CliError::MissingColumn { column: "rate".into(), file: "x.csv".into() };
        assert_eq!(col.exit_code(), 1);
        assert_eq!(col.kind(), "missing_column");

        let core = CliError::Core(cattrans_core::Error::InsufficientData("n=1".into()));
        assert_eq!(core.exit_code(), 1);
    }

    #[test]
    fn error_json_round_trips() {
        let err = CliError::Config("grids must be non-empty".into());
        let v: serde_json::Value = serde_json::from_str(&err.to_json()).unwrap();
        assert_eq!(v["error"]["kind"], "config");
        assert_eq!(v["error"]["message"], "grids must be non-empty");
    }
}
