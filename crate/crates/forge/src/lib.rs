//! Dataset handling, training loops, benchmarks and file formats around
//! the `slate-core` algorithms.

pub mod bench;
pub mod data;
pub mod formats;
pub mod pool;
pub mod svd;
pub mod train;

use std::path::PathBuf;

/// Errors from IO, parsing and orchestration.
#[derive(Debug, thiserror::Error)]
pub enum ForgeError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("invalid data: {0}")]
    Validation(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] slate_core::Error),
}

pub type Result<T> = std::result::Result<T, ForgeError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> ForgeError {
    let path = path.into();
    move |source| ForgeError::Io { path, source }
}
