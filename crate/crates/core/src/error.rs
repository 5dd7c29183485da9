use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("requested {requested} digits exceeds the configured maximum of {max}")]
    ResourceLimit { requested: u64, max: u64 },

    #[error("precision failure: {0}")]
    Precision(String),

    #[error("unsupported base {0}")]
    InvalidBase(u32),

    #[error("digit value {digit} is not valid in base {base}")]
    DigitOutOfRange { digit: u8, base: u8 },

    #[error("invalid digit byte 0x{byte:02x} at offset {offset}")]
    InvalidDigit { offset: u64, byte: u8 },

    #[error("malformed packed header: {0}")]
    MalformedHeader(String),

    #[error("base mismatch: expected {expected}, found {found}")]
    BaseMismatch { expected: u8, found: u8 },

    #[error("truncated payload: header declares {declared} digits, only {available} present")]
    Truncated { declared: u64, available: u64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("tally overflow")]
    Overflow,

    #[error("table has no windows")]
    EmptyTable,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("refusing to resume: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
