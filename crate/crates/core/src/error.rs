use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The variants are grouped so the CLI can map them onto its exit codes:
/// configuration problems, numerical-integrity failures and oracle
/// mismatches each get their own code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate fermion mode at k = {momentum} (ε(k) = 0); perturb λ")]
    DegenerateMode { momentum: f64 },

    #[error("numerical integrity violation: {0}")]
    Numerical(String),

    #[error("system too large for dense diagonalization: N = {0} (limit {limit})", limit = crate::ed::MAX_ED_SITES)]
    SizeGuard(usize),

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_) | Error::Config(_) | Error::SizeGuard(_) | Error::Io { .. } => 2,
            Error::DegenerateMode { .. } | Error::Numerical(_) => 3,
            Error::OracleMismatch(_) => 4,
        }
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
