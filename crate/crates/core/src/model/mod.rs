//! Problem description: coefficients, declared constants and truncation.

pub mod catalog;
pub mod expr;
pub mod params;
pub mod problem;
pub mod truncation;

pub use catalog::CatalogProblem;
pub use expr::{parse_coefficient, CoefficientExpr, Env, ParseError, Slot};
pub use params::{Regime, RegularityParams};
pub use problem::{truncate_problem, AppliedTruncation, ProblemSpec, TruncationVariant};
pub use truncation::{smooth_truncation, TruncationSpec};
