use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum FocaError {
    /// A caller broke a documented precondition (dimensions, ranges, counts).
    #[error("contract violation: {0}")]
    Contract(String),
    /// A NaN or infinity appeared where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),
    /// A numerical routine could not produce a result (singular system, no convergence).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Malformed input file.
    #[error("format error: {0}")]
    Format(String),
    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FocaError>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(FocaError::Contract(msg.into()))
}

impl FocaError {
    /// Process exit status: 2 for configuration or usage problems, 3 for
    /// numerical failures, 1 for I/O and file-format problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            FocaError::Config(_) | FocaError::Contract(_) => 2,
            FocaError::NonFinite(_) | FocaError::Numerical(_) => 3,
            FocaError::Io(_) | FocaError::Format(_) => 1,
        }
    }
}
