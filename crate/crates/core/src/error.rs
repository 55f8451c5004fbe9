use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid plan (n={n}, c={c}): {reason}")]
    InvalidPlan {
        n: u64,
        c: u64,
        reason: &'static str,
    },

    #[error("no admissible plan with sample size up to {cap}")]
    NoPlanWithinCap { cap: u64 },

    #[error("lot size {lot} exceeds the brute-force limit of {limit}")]
    CostGuard { lot: u64, limit: u64 },

    #[error("scheme line {line}: {message}")]
    SchemeParse { line: usize, message: String },

    #[error("scheme coverage: {0}")]
    SchemeCoverage(String),

    #[error("scheme row {row} yields an invalid plan at N={lot}: {reason}")]
    SchemeRule {
        row: usize,
        lot: u64,
        reason: String,
    },

    #[error("N={lot} is not covered by the scheme")]
    SchemeLookup { lot: u64 },

    #[error("unsupported for this lot model: {0}")]
    Unsupported(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
