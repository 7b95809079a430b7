use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Shapes of operands disagree, or an index falls outside a table.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// A precondition of an operation was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),
    /// NaN or infinity reached a layer boundary.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Invalid model or training configuration.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
