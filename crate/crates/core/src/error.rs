use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown element {name:?} in universe {universe:?}")]
    UnknownElement { universe: String, name: String },
    #[error("universe {universe:?} would exceed 64 elements")]
    UniverseOverflow { universe: String },
    #[error("invalid universe: {0}")]
    InvalidUniverse(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("table and view configuration disagree: {0}")]
    UniverseMismatch(String),
    #[error("cardinality cap must be at least 1, got {0}")]
    InvalidCap(usize),
    #[error("invalid cell key: {0}")]
    InvalidKey(String),
    #[error("invalid detail selection: {0}")]
    InvalidSelection(String),
    #[error("brush references an unknown element, cell or item: {0}")]
    InvalidReference(String),
    #[error("invalid probability {value} for {what}")]
    InvalidProbability { what: String, value: f64 },
    #[error("parse error at line {line}, column {column}: {cause}")]
    Parse { line: usize, column: usize, cause: String },
    #[error("invalid format or render spec: {0}")]
    Spec(String),
}

impl Error {
    /// Stable machine-readable code, used by the service and CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownElement { .. } => "UnknownElement",
            Error::UniverseOverflow { .. } => "UniverseOverflow",
            Error::InvalidUniverse(_) => "InvalidUniverse",
            Error::InvalidPermutation(_) => "InvalidPermutation",
            Error::UniverseMismatch(_) => "UniverseMismatch",
            Error::InvalidCap(_) => "InvalidCap",
            Error::InvalidKey(_) => "InvalidKey",
            Error::InvalidSelection(_) => "InvalidSelection",
            Error::InvalidReference(_) => "InvalidReference",
            Error::InvalidProbability { .. } => "InvalidProbability",
            Error::Parse { .. } => "ParseError",
            Error::Spec(_) => "SpecError",
        }
    }

    pub(crate) fn parse(line: usize, column: usize, cause: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            cause: cause.into(),
        }
    }
}
