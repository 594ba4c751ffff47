use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("count table has zero total")]
    ZeroTotal,
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(String),
    #[error("cells of treatment {treatment} sum to {sum}, not 1")]
    SumNotOne { treatment: String, sum: String },
    #[error("missing treatment block {0:?}")]
    MissingTreatment(String),
    #[error("bad cell {cell:?} in treatment {treatment}: {reason}")]
    BadCell {
        treatment: String,
        cell: String,
        reason: String,
    },
    #[error("probabilities and counts disagree for treatment {0}")]
    ConflictingData(String),
    #[error("sign pattern {0} has an even number of + signs")]
    InvalidPattern(String),
    #[error("statistical test needs counts for all four treatments")]
    MissingCounts,
    #[error("significance level {0} is not in (0, 1)")]
    InvalidSignificance(f64),
    #[error("cannot parse {0:?} as a rational number")]
    BadNumber(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("sample size must be at least 1")]
    EmptySample,
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
