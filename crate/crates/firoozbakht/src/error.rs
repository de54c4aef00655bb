use std::path::PathBuf;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("sieve limit {requested} exceeds the configured budget {budget}; raise the budget to at least {requested}")]
    SieveBudget { requested: u64, budget: u64 },

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("catalog file {path}: {message}")]
    CatalogIo { path: PathBuf, message: String },

    #[error("catalog parse error at line {line}, column {column}: {message}")]
    CatalogParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("catalog validation failed:\n{}", .0.join("\n"))]
    CatalogInvalid(Vec<String>),

    #[error("catalog coverage limit {coverage} is below the requested limit {requested}")]
    CoverageShortfall { coverage: u64, requested: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }
}
