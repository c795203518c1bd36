use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid argument `{field}`: {reason}")]
    Argument { field: String, reason: String },

    #[error("schema error in {path}: {reason}")]
    Schema { path: PathBuf, reason: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("malformed config {path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl CliError {
    pub fn arg(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Argument {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn schema(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        CliError::Schema {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for argument, schema and config errors, 3 for numeric failures,
    /// 1 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Argument { .. }
            | CliError::Schema { .. }
            | CliError::Csv { .. }
            | CliError::Config { .. } => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<pareto_welfare::Error> for CliError {
    fn from(e: pareto_welfare::Error) -> Self {
        match e {
            pareto_welfare::Error::InvalidArgument { field, reason } => {
                CliError::Argument { field, reason }
            }
            pareto_welfare::Error::Numeric(msg) => CliError::Numeric(msg),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
