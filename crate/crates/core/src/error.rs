use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unsupported field order {0}")]
    UnsupportedField(u32),

    #[error("division by zero")]
    DivideByZero,

    #[error("operands belong to different fields")]
    FieldMismatch,

    #[error("symbol value {value} is not an element of GF({order})")]
    InvalidSymbol { value: u32, order: u32 },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("field of order {order} is too small for a length-{length} MDS code")]
    FieldTooSmall { order: u32, length: usize },

    #[error("need {needed} distinct evaluation points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("supplied points are not consistent with a single codeword")]
    InconsistentPoints,

    #[error("exhaustive check is capped at {cap}, got {got}")]
    TooLarge { cap: usize, got: usize },

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("operation requires the {expected} regime")]
    WrongRegime { expected: &'static str },

    #[error("malformed transcript: {0}")]
    MalformedTranscript(String),

    #[error("enumeration of {size} realizations exceeds the cap of {cap}")]
    EnumerationTooLarge { size: u128, cap: u128 },

    #[error("malformed frame: {0}")]
    MalformedFrame(String),

    #[error("database {db} returned an error frame (code {code}): {message}")]
    RemoteError { db: usize, code: u8, message: String },

    #[error("node {db} unreachable: {reason}")]
    NodeUnreachable { db: usize, reason: String },

    #[error("reconstructed message {k_star} does not match the stored message")]
    ReconstructionMismatch { k_star: usize },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
