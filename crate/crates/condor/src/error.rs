use thiserror::Error;

/// Errors surfaced by the ordinal toolkit.
#[derive(Debug, Error)]
pub enum CondorError {
    /// Input violates an operation precondition (bad index, length mismatch, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A value that must be rank consistent (monotone non-increasing) is not.
    /// Usually indicates a bug in an upstream head rather than bad user input.
    #[error("rank consistency violated: {0}")]
    Consistency(String),

    /// Non-finite values where finite ones are required.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Invalid network architecture or training configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed binary file (IDX, checkpoint).
    #[error("format error at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CondorError>;
