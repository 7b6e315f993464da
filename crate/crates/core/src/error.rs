use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An index set or buffer would exceed its configured size limit.
    #[error("capacity exceeded: {what} needs {requested} entries, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    /// A caller broke a documented precondition (length mismatch, missing table, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The forward simulation produced a non-finite or out-of-range state.
    #[error("simulation failed at step {step}: {detail}")]
    Simulation { step: usize, detail: String },

    /// A coefficient or response came out non-finite.
    #[error("numerical failure at step {step}, index {index}: {detail}")]
    Numerical {
        step: usize,
        index: usize,
        detail: String,
    },

    #[error("artifact error: {0}")]
    Artifact(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
