use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    /// A record that could not be decoded. `line` is 1-based.
    #[error("{source_name}:{line}: parse error: {message}")]
    Parse { source_name: String, line: usize, message: String },
    /// A well-formed record that breaks a data invariant.
    #[error("{source_name}:{line}: invalid record: {message}")]
    Validation { source_name: String, line: usize, message: String },
    #[error("checkpoint format error: {0}")]
    Format(String),
    #[error("unsupported checkpoint version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("checkpoint does not match its configuration: {0}")]
    Shape(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] listingqa_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}
