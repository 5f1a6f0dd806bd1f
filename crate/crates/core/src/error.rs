use thiserror::Error;

use crate::model::expr::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures surfaced by the library.
///
/// Variants fall into three families that the CLI maps onto exit codes:
/// assumption violations (bad parameters, regime mismatches), numerical
/// failures (domain errors, divergence, estimator breakdown) and plumbing
/// (parsing, I/O, serialization).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: String,
    },

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("regime violation: {0}")]
    Regime(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid problem: {0}")]
    Problem(String),

    #[error("domain error in `{op}`: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("coefficient evaluation failed at particle {particle}, step {step}, state {state:?}: {source}")]
    PathEvaluation {
        particle: usize,
        step: usize,
        state: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite driver value at particle {particle}, step {step}, state {state:?}, z {z:?}")]
    NonFiniteDriver {
        particle: usize,
        step: usize,
        state: Vec<f64>,
        z: Vec<f64>,
    },

    #[error("estimator failure at step {step}: {detail}")]
    Estimator { step: usize, detail: String },

    #[error("non-finite response at row {row}")]
    NonFiniteResponse { row: usize },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("grid incompatibility: {0}")]
    Grid(String),

    #[error("study aborted at n = {n}, seed = {seed}: {source}")]
    Study {
        n: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            value,
            constraint: constraint.into(),
        }
    }

    /// True for violations of declared assumptions or regime preconditions.
    pub fn is_assumption_violation(&self) -> bool {
        match self {
            Error::InvalidParameter { .. } | Error::Assumption(_) | Error::Regime(_) => true,
            Error::Study { source, .. } => source.is_assumption_violation(),
            _ => false,
        }
    }

    /// True for numerical breakdowns (domain errors, overflow, estimator failure).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Domain { .. }
            | Error::PathEvaluation { .. }
            | Error::NonFiniteDriver { .. }
            | Error::Estimator { .. }
            | Error::NonFiniteResponse { .. }
            | Error::Overflow(_) => true,
            Error::Study { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
