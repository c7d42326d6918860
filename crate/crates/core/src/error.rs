use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid, config document, or preset parameters.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("ground-state iteration did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported mode: {0}")]
    Unsupported(String),

    #[error("weight construction failed: {0}")]
    Construction(String),

    #[error("bad snapshot magic {0:?}")]
    BadMagic([u8; 4]),

    #[error("snapshot version mismatch: {0}")]
    VersionMismatch(String),

    #[error("truncated or malformed snapshot payload: {0}")]
    Payload(String),

    #[error("serialization error: {0}")]
    Serialize(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by bad user input rather than by a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Argument(_))
    }
}
