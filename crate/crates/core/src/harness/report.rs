//! CSV, JSON and gnuplot output for error reports.

use std::path::Path;

use serde::Serialize;

use super::error::ErrorReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    /// Whitespace-separated columns for gnuplot.
    Gnuplot,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "gnuplot" | "dat" => Ok(ReportFormat::Gnuplot),
            _ => Err(Error::Problem(format!("unknown report format `{s}`"))),
        }
    }
}

/// Run-independent description of what produced a report.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReportProvenance {
    pub tool: String,
    pub version: String,
    pub problem: String,
    pub reference_note: String,
    pub schedule: serde_json::Value,
}

impl ReportProvenance {
    pub fn new(problem: impl Into<String>) -> Self {
        ReportProvenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            problem: problem.into(),
            ..ReportProvenance::default()
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn reports_to_csv(reports: &[ErrorReport]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(HEADER).map_err(csv_err)?;
    for r in reports {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Column order of the CSV output.
pub const HEADER: [&str; 15] = [
    "n",
    "h",
    "P",
    "M",
    "estimator",
    "seed",
    "y_error",
    "z_error",
    "total",
    "slope",
    "intercept",
    "r2",
    "variant",
    "reference",
    "reference_stderr",
];

pub fn reports_from_csv(text: &str) -> Result<Vec<ErrorReport>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    provenance: &'a ReportProvenance,
    reports: &'a [ErrorReport],
}

pub fn reports_to_json(reports: &[ErrorReport], provenance: &ReportProvenance) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&JsonDoc { provenance, reports })?;
    s.push('\n');
    Ok(s)
}

pub fn reports_to_plot(reports: &[ErrorReport]) -> String {
    let mut s = String::from("# n h M log_h M2 log_total\n");
    for r in reports {
        let m = r.m.unwrap_or(f64::NAN);
        s.push_str(&format!(
            "{} {} {} {} {} {}\n",
            r.n,
            r.h,
            m,
            r.h.ln(),
            m * m,
            r.total.ln()
        ));
    }
    s
}

/// Writes `reports` to `path` in the given format.
pub fn emit_report(
    reports: &[ErrorReport],
    format: ReportFormat,
    provenance: &ReportProvenance,
    path: impl AsRef<Path>,
) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => reports_to_csv(reports)?,
        ReportFormat::Json => reports_to_json(reports, provenance)?,
        ReportFormat::Gnuplot => reports_to_plot(reports),
    };
    if let Some(dir) = path.as_ref().parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}
