use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rejection cap of {cap} attempts exceeded while sampling {what}")]
    RejectionCapExceeded { what: String, cap: u64 },

    #[error("instance too large: {what} has size {size}, cap is {cap}")]
    TooLarge { what: String, size: String, cap: String },

    #[error("vertex count mismatch: {0} vs {1}")]
    VertexCountMismatch(usize, usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("key space mismatch: {0}")]
    KeySpaceMismatch(String),

    #[error("empty support: {0}")]
    EmptySupport(String),

    #[error("unknown name: {0}")]
    Unknown(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
