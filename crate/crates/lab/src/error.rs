use std::path::PathBuf;

use arms_race_core::ModelError;
use thiserror::Error;

/// Problems with the scenario document itself.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },

    #[error("line {line}: unknown key `{key}`{}", suggestion.as_ref().map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default())]
    UnknownKey {
        key: String,
        line: usize,
        suggestion: Option<String>,
    },

    #[error("key `{key}` is set twice, on lines {first} and {second}")]
    DuplicateKey { key: String, first: usize, second: usize },

    #[error("line {line}: `{key}` = `{value}` is not {expected}")]
    BadValue {
        key: String,
        line: usize,
        value: String,
        expected: &'static str,
    },

    #[error("`{key}` = {value} is outside the admissible range {range}")]
    Range { key: String, value: f64, range: String },

    #[error("subcommand `{subcommand}` needs the `{section}` section")]
    MissingSection {
        section: &'static str,
        subcommand: &'static str,
    },

    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// Everything the lab can fail with.
#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("figure checks failed: {0}")]
    FigureChecks(String),
}

impl LabError {
    /// Process exit code: 1 for invalid input, 2 for failures while computing
    /// or writing results.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Scenario(_) => 1,
            LabError::Model(_) | LabError::Io { .. } | LabError::Csv { .. } | LabError::FigureChecks(_) => 2,
        }
    }
}
