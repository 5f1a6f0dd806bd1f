//! Convergence and truncation studies.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::error::{error_against, ErrorReport};
use super::report::{emit_report, ReportFormat, ReportProvenance};
use super::schedule::MSchedule;
use super::stats::{ols, LineFit};
use super::load_problem;
use crate::condexp::EstimatorSpec;
use crate::error::{Error, Result};
use crate::model::{truncate_problem, ProblemSpec, TruncationVariant};
use crate::oracle::{cole_hopf_reference, fine_grid_reference, ReferenceSolution};
use crate::scheme::solve_backward;
use crate::simulate::euler_paths;

/// Where the "true" solution of a study comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReferenceStrategy {
    ClosedForm,
    ColeHopf {
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
    FineGrid {
        n_ref: usize,
        p_ref: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        estimator: Option<EstimatorSpec>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StudyOutputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

impl StudyOutputs {
    pub fn write(&self, reports: &[ErrorReport], provenance: &ReportProvenance) -> Result<()> {
        if let Some(p) = &self.csv {
            emit_report(reports, ReportFormat::Csv, provenance, p)?;
        }
        if let Some(p) = &self.json {
            emit_report(reports, ReportFormat::Json, provenance, p)?;
        }
        if let Some(p) = &self.plot {
            emit_report(reports, ReportFormat::Gnuplot, provenance, p)?;
        }
        Ok(())
    }
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

fn default_variant() -> TruncationVariant {
    TruncationVariant::DeterministicSigma
}

impl Default for MSchedule {
    fn default() -> Self {
        MSchedule::None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    /// Problem file path, or `catalog:NAME`.
    pub problem: String,
    pub n_values: Vec<usize>,
    #[serde(rename = "P")]
    pub particles: usize,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub schedule: MSchedule,
    #[serde(default = "default_variant")]
    pub variant: TruncationVariant,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub reference: ReferenceStrategy,
    #[serde(default)]
    pub outputs: StudyOutputs,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.len() < 3 {
            return Err(Error::Problem("a slope fit needs at least three n values".into()));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) || self.n_values[0] == 0 {
            return Err(Error::Problem("n values must be positive and strictly increasing".into()));
        }
        if self.particles == 0 {
            return Err(Error::param("P", 0.0, "need at least one particle"));
        }
        if self.seeds.is_empty() {
            return Err(Error::Problem("need at least one seed".into()));
        }
        self.estimator.validate()?;
        if let ReferenceStrategy::FineGrid { n_ref, p_ref, .. } = &self.reference {
            let n_max = *self.n_values.last().expect("checked above");
            if *n_ref < 4 * n_max || self.n_values.iter().any(|n| n_ref % n != 0) {
                return Err(Error::param(
                    "n_ref",
                    *n_ref as f64,
                    format!("need a common multiple of every n and at least 4 x {n_max}"),
                ));
            }
            if *p_ref < 4 * self.particles {
                return Err(Error::param(
                    "p_ref",
                    *p_ref as f64,
                    format!("need at least 4 x P = {}", 4 * self.particles),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyOutcome {
    pub reports: Vec<ErrorReport>,
    pub fit: Option<LineFit>,
    pub provenance: ReportProvenance,
}

fn truncated(spec: &ProblemSpec, m: Option<f64>, variant: TruncationVariant) -> Result<ProblemSpec> {
    match m {
        Some(m) => truncate_problem(spec, m, variant),
        None => Ok(spec.clone()),
    }
}

fn attach_fit(reports: &mut [ErrorReport], x: impl Fn(&ErrorReport) -> f64) -> Option<LineFit> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.total > 0.0 && r.total.is_finite())
        .map(|r| (x(r), r.total.ln()))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let fit = ols(&xs, &ys)?;
    for r in reports.iter_mut() {
        r.slope = Some(fit.slope);
        r.intercept = Some(fit.intercept);
        r.r2 = Some(fit.r2);
    }
    Some(fit)
}

/// Runs the scheme for every `(n, seed)` and fits `log(total)` against
/// `log(h)`. Runs are sequential; each one is parallel inside. On failure
/// the reports gathered so far are written before the error is returned.
pub fn convergence_study(cfg: &StudyConfig) -> Result<StudyOutcome> {
    cfg.validate()?;
    let spec = load_problem(&cfg.problem)?;
    let params = spec.params().clone();
    let reference = match &cfg.reference {
        ReferenceStrategy::ClosedForm => ReferenceSolution::closed_form(&spec)
            .ok_or_else(|| Error::Problem(format!("`{}` has no closed form", cfg.problem)))?,
        ReferenceStrategy::ColeHopf { samples, seed } => cole_hopf_reference(&spec, *samples, *seed)?,
        ReferenceStrategy::FineGrid {
            n_ref,
            p_ref,
            seed,
            estimator,
        } => {
            let m = cfg.schedule.m_for(*n_ref, &params)?;
            let est = estimator.clone().unwrap_or_else(|| cfg.estimator.clone());
            fine_grid_reference(&truncated(&spec, m, cfg.variant)?, *n_ref, *p_ref, &est, *seed)?
        }
    };
    let mut provenance = ReportProvenance::new(&cfg.problem);
    provenance.reference_note = reference.provenance.note.clone();
    provenance.schedule = serde_json::to_value(&cfg.schedule)?;

    let mut reports = Vec::new();
    for &n in &cfg.n_values {
        for &seed in &cfg.seeds {
            let run = || -> Result<ErrorReport> {
                let m = cfg.schedule.m_for(n, &params)?;
                let tspec = truncated(&spec, m, cfg.variant)?;
                let ens = euler_paths(&spec, n, cfg.particles, seed)?;
                let sol = solve_backward(&tspec, ens, &cfg.estimator)?;
                error_against(&sol, &reference)
            };
            match run() {
                Ok(r) => reports.push(r),
                Err(e) => {
                    cfg.outputs.write(&reports, &provenance)?;
                    return Err(Error::Study {
                        n,
                        seed,
                        source: Box::new(e),
                    });
                }
            }
        }
    }
    let fit = attach_fit(&mut reports, |r| r.h.ln());
    cfg.outputs.write(&reports, &provenance)?;
    Ok(StudyOutcome {
        reports,
        fit,
        provenance,
    })
}

/// Truncation-only study: one ensemble, one step count, several radii,
/// all measured against the run at `m_ref`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationStudyConfig {
    pub problem: String,
    pub n: usize,
    #[serde(rename = "P")]
    pub particles: usize,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    pub m_values: Vec<f64>,
    pub m_ref: f64,
    #[serde(default = "default_variant")]
    pub variant: TruncationVariant,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: StudyOutputs,
}

/// Fits `log(total)` against `M^2`.
pub fn truncation_study(cfg: &TruncationStudyConfig) -> Result<StudyOutcome> {
    if cfg.m_values.len() < 3 {
        return Err(Error::Problem("a slope fit needs at least three radii".into()));
    }
    if cfg.m_values.iter().any(|m| *m >= cfg.m_ref) {
        return Err(Error::Problem("every radius must be below the reference radius".into()));
    }
    let spec = load_problem(&cfg.problem)?;
    let ens = Arc::new(euler_paths(&spec, cfg.n, cfg.particles, cfg.seed)?);
    let ref_sol = solve_backward(
        &truncate_problem(&spec, cfg.m_ref, cfg.variant)?,
        Arc::clone(&ens),
        &cfg.estimator,
    )?;
    let reference = ReferenceSolution::from_solution(ref_sol, format!("same ensemble truncated at M = {}", cfg.m_ref));
    let mut provenance = ReportProvenance::new(&cfg.problem);
    provenance.reference_note = reference.provenance.note.clone();
    provenance.schedule = serde_json::json!({ "kind": "fixed-list", "m_values": cfg.m_values, "m_ref": cfg.m_ref });
    let mut reports = Vec::new();
    for &m in &cfg.m_values {
        let run = || -> Result<ErrorReport> {
            let sol = solve_backward(&truncate_problem(&spec, m, cfg.variant)?, Arc::clone(&ens), &cfg.estimator)?;
            error_against(&sol, &reference)
        };
        match run() {
            Ok(r) => reports.push(r),
            Err(e) => {
                cfg.outputs.write(&reports, &provenance)?;
                return Err(Error::Study {
                    n: cfg.n,
                    seed: cfg.seed,
                    source: Box::new(e),
                });
            }
        }
    }
    let fit = attach_fit(&mut reports, |r| r.m.map(|m| m * m).unwrap_or(f64::NAN));
    cfg.outputs.write(&reports, &provenance)?;
    Ok(StudyOutcome {
        reports,
        fit,
        provenance,
    })
}
