use std::path::PathBuf;

use serde_json::json;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}:{column}: {message}")]
    Config {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}:{line}: {message}")]
    Format { path: String, line: usize, message: String },

    #[error(transparent)]
    Core(#[from] gear_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config { .. } => "config",
            Error::Format { .. } => "format",
            Error::Core(_) => "computation",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Usage(_) => "usage",
        }
    }

    /// One-line JSON description for stderr.
    pub fn to_json_line(&self) -> String {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        match self {
            Error::Config { line, column, .. } => {
                v["line"] = json!(line);
                v["column"] = json!(column);
            }
            Error::Format { line, .. } => v["line"] = json!(line),
            _ => {}
        }
        v.to_string()
    }
}
