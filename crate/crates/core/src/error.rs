use thiserror::Error;

/// Error type shared by every engine in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Parameter validation failed (bad model parameters, malformed input).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Exact integer arithmetic overflowed its 128-bit budget.
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    /// A configurable budget gate was exceeded. Exceeding a gate is an
    /// error, never silent truncation.
    #[error("resource gate exceeded: {what} = {requested} (limit {limit})")]
    ResourceLimit {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    /// Numerical failure: non-finite value, degenerate series, or an
    /// internal solver contract that should be unreachable.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A closed form was requested outside its validity region
    /// (non-positive variance denominator).
    #[error("outside valid regime: {0}")]
    Regime(String),

    /// An estimate exists but fails its quality gate (e.g. effective
    /// sample size below threshold).
    #[error("estimate quality: {0}")]
    Quality(String),
}

pub type Result<T> = std::result::Result<T, Error>;
