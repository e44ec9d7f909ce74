//! Error type shared by every module.

use std::fmt;

/// One problem found while reading a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    /// 1-based line number, or 0 when the issue is not tied to a line.
    pub line: usize,
    /// Fully qualified key (`section.key`), empty when unknown.
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.key.is_empty()) {
            (0, true) => write!(f, "{}", self.message),
            (0, false) => write!(f, "{}: {}", self.key, self.message),
            (l, true) => write!(f, "line {l}: {}", self.message),
            (l, false) => write!(f, "line {l}: {}: {}", self.key, self.message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    /// The mapping or body configuration is not admissible (folded grid,
    /// body leaving the domain, degenerate surface).
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("linear solve failed: {0}")]
    Solver(String),
    /// A computation produced NaN or infinite values.
    #[error("non-finite values: {0}")]
    NonFinite(String),
    #[error("root finding failed: {0}")]
    RootFind(String),
    #[error("configuration error:\n{}", join_issues(.0))]
    Config(Vec<ConfigIssue>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
