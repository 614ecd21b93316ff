use std::path::PathBuf;

/// Failures while reading or writing dataset files.
#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}{}: {msg}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Format { path: PathBuf, line: Option<usize>, msg: String },

    #[error("{}: {msg}", path.display())]
    Integrity { path: PathBuf, msg: String },

    #[error(transparent)]
    Core(#[from] qwk_core::Error),
}

impl DataError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DataError::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: Option<usize>, msg: impl Into<String>) -> Self {
        DataError::Format { path: path.into(), line, msg: msg.into() }
    }

    pub(crate) fn integrity(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        DataError::Integrity { path: path.into(), msg: msg.into() }
    }
}

pub type Result<T, E = DataError> = std::result::Result<T, E>;
