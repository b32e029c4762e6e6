use thiserror::Error;

/// Errors raised by key generation, evaluation, decryption and the tooling
/// built on top of them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HimError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("no prime found among {attempts} candidates of {delta} bits")]
    PrimeSearchExhausted { delta: u32, attempts: usize },

    #[error("fixed key rejected: {0}")]
    FixedKeyInvalid(String),

    #[error("message {value} outside the plaintext range [0, {d_max})")]
    MessageOutOfRange { value: String, d_max: String },

    #[error("negative plaintext constant {0}")]
    NegativeConstant(String),

    #[error("key mismatch: ciphertext belongs to {found}, expected {expected}")]
    KeyMismatch { expected: String, found: String },

    #[error("operands use different evaluation modes")]
    ModeMismatch,

    #[error("noise budget exceeded: bound {required} reaches modulus {a0}")]
    NoiseBudgetExceeded { required: String, a0: String },

    #[error("scalar must be at least 1, got {0}")]
    NonPositiveScalar(String),

    #[error("strict mode cannot evaluate on a bootstrapped ciphertext")]
    BootstrappedOperand,

    #[error("decryption produced a non-integer value {0}")]
    NonIntegerDecryption(String),

    #[error("integrity failure: decryption produced {0}")]
    IntegrityFailure(String),

    #[error("malformed transformation log: {0}")]
    MalformedLog(String),

    #[error("the last log record is not a bootstrap")]
    NoBootstrapRecord,

    #[error("invalid rational sequence: {0}")]
    InvalidSequence(String),

    #[error("shape mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    ShapeMismatch { left_rows: usize, left_cols: usize, right_rows: usize, right_cols: usize },

    #[error("entry ({row}, {col}): {source}")]
    AtEntry {
        row: usize,
        col: usize,
        #[source]
        source: Box<HimError>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("verification failed in {phase} at index {index}")]
    VerificationFailed { phase: String, index: usize },

    #[error("invalid benchmark configuration: {0}")]
    ConfigError(String),

    #[error("invalid dataset bounds [{min}, {max}]")]
    InvalidBounds { min: i64, max: i64 },

    #[error("scaling probe needs at least {needed} points spanning 3 octaves, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("io error: {0}")]
    Io(String),
}

impl HimError {
    /// Strips any [`HimError::AtEntry`] wrappers.
    pub fn root(&self) -> &HimError {
        match self {
            HimError::AtEntry { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn at(row: usize, col: usize, source: HimError) -> HimError {
        HimError::AtEntry { row, col, source: Box::new(source) }
    }

    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> HimError {
        HimError::InvalidParams { field, reason: reason.into() }
    }
}

impl From<std::io::Error> for HimError {
    fn from(e: std::io::Error) -> Self {
        HimError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HimError {
    fn from(e: serde_json::Error) -> Self {
        HimError::Parse(e.to_string())
    }
}

pub type Result<T, E = HimError> = std::result::Result<T, E>;
