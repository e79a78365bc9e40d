//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by dataset construction, training, voting and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A feature vector does not match the expected dimensionality.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        actual: usize,
    },

    /// No training sample has a non-empty out-of-bag sub-forest, so the
    /// out-of-bag accuracy is undefined.
    #[error("out-of-bag accuracy undefined: no sample has an out-of-bag sub-forest")]
    UndefinedOobAccuracy,

    /// A delimited table or manifest could not be ingested.
    #[error("ingestion error{}{}: {message}", fmt_coord(" at line ", .line), fmt_col(.column))]
    Ingestion {
        line: Option<usize>,
        column: Option<String>,
        message: String,
    },

    /// A model container is malformed or truncated.
    #[error("corrupt model container: {0}")]
    ModelFormat(String),

    /// A model container was written by an incompatible major version.
    #[error("unsupported model container version: file has major version {found}, this build supports {supported}")]
    VersionMismatch { found: u32, supported: u32 },

    /// A file could not be opened, read, or written.
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn fmt_coord(prefix: &str, line: &Option<usize>) -> String {
    match line {
        Some(n) => format!("{prefix}{n}"),
        None => String::new(),
    }
}

fn fmt_col(column: &Option<String>) -> String {
    match column {
        Some(c) => format!(", column '{c}'"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn dimension(context: impl Into<String>, expected: usize, actual: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            actual,
        }
    }

    pub(crate) fn ingestion(
        line: Option<usize>,
        column: Option<&str>,
        msg: impl Into<String>,
    ) -> Self {
        Error::Ingestion {
            line,
            column: column.map(str::to_owned),
            message: msg.into(),
        }
    }

    pub(crate) fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::File {
            path: path.display().to_string(),
            source,
        }
    }
}
