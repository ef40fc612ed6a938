use thiserror::Error;

use crate::formula::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),

    #[error("arity mismatch for `{symbol}`: expected {expected}, found {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("missing assignment for variable `{0}`")]
    MissingVariable(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid template: {}", .0.join("; "))]
    InvalidTemplate(Vec<String>),

    #[error("unknown preset `{0}` (expected one of qlt, ord3, gamma1, gamma2, gamma3)")]
    UnknownPreset(String),

    #[error("{what} exceeds cap: {value} > {cap}")]
    CapExceeded {
        what: &'static str,
        value: u128,
        cap: u128,
    },

    #[error("point has {got} coordinates but the formula needs {needed}")]
    PointTooShort { needed: usize, got: usize },

    #[error("operation does not fit the structure: {0}")]
    DomainMismatch(String),

    #[error("equality formula is not an equivalence: {0}")]
    EqualityNotEquivalence(String),

    #[error("equality formula is not a congruence for `{relation}`: {detail}")]
    EqualityNotCongruence { relation: String, detail: String },

    #[error("witness verification failed: {0}")]
    VerificationFailed(String),

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn cap(what: &'static str, value: impl Into<u128>, cap: impl Into<u128>) -> Self {
        Error::CapExceeded {
            what,
            value: value.into(),
            cap: cap.into(),
        }
    }

    /// True for errors raised because a configured size or budget cap was hit.
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}
