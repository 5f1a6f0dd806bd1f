//! Error metrics, truncation schedules, studies, Feynman-Kac grids and
//! report output.

pub mod error;
pub mod pde;
pub mod report;
pub mod schedule;
pub mod stats;
pub mod study;

pub use error::{error_against, ErrorReport};
pub use pde::{feynman_kac_grid, FkConfig, FkField, FkStrategy};
pub use report::{
    emit_report, reports_from_csv, reports_to_csv, reports_to_json, reports_to_plot, ReportFormat, ReportProvenance,
};
pub use schedule::{select_m, MSchedule, ScheduleRule};
pub use stats::{ols, LineFit};
pub use study::{
    convergence_study, truncation_study, ReferenceStrategy, StudyConfig, StudyOutcome, StudyOutputs,
    TruncationStudyConfig,
};

use crate::error::Result;
use crate::model::{CatalogProblem, ProblemSpec};

/// Loads `catalog:NAME` or a problem JSON file.
pub fn load_problem(source: &str) -> Result<ProblemSpec> {
    match source.strip_prefix("catalog:") {
        Some(name) => CatalogProblem::by_name(name)?.spec(),
        None => ProblemSpec::from_path(source),
    }
}
