use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}: row {row} (line {line}): {msg}", path.display())]
    Row { path: PathBuf, row: u64, line: u64, msg: String },

    #[error("{}: {msg}", path.display())]
    Data { path: PathBuf, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error("cell {coords}: {source}")]
    Cell { coords: String, source: rvr_core::Error },

    #[error(transparent)]
    Core(#[from] rvr_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
