use thiserror::Error;

/// Errors produced by the solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The (possibly shifted) projected tridiagonal system is singular.
    #[error("singular tridiagonal system: {0}")]
    SingularSystem(String),

    /// The bidiagonalization broke down and cannot be advanced further.
    #[error("bidiagonalization breakdown at index {0}; state usable up to m = {1}")]
    Breakdown(usize, usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {detail}")]
    Format { path: String, detail: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
