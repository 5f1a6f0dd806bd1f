//! Empirical conditional expectations `E[R | X_k]` over a particle cloud.
//!
//! Two estimators are offered: a global polynomial least-squares projection
//! and a local partitioning (bin-average) estimator. A [`Design`] holds the
//! per-step work that does not depend on the response (standardization and
//! basis layout, or cell assignment), so several responses at the same step
//! reuse it.

mod global;
mod partition;

use serde::{Deserialize, Serialize};

pub use global::GlobalFit;
pub use partition::PartitionFit;

use crate::error::{Error, Result};

/// Bin range for the partitioning estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum RangePolicy {
    /// Empirical min and max of each coordinate.
    MinMax,
    /// Explicit bounds per coordinate.
    Fixed { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EstimatorSpec {
    GlobalLeastSquares { degree: usize },
    Partitioning { bins: usize, range: RangePolicy },
}

impl Default for EstimatorSpec {
    fn default() -> Self {
        EstimatorSpec::GlobalLeastSquares { degree: 3 }
    }
}

impl EstimatorSpec {
    pub fn global(degree: usize) -> Self {
        EstimatorSpec::GlobalLeastSquares { degree }
    }

    pub fn partitioning(bins: usize) -> Self {
        EstimatorSpec::Partitioning {
            bins,
            range: RangePolicy::MinMax,
        }
    }

    /// Short label used in reports, e.g. `global-q3` or `partition-b64`.
    pub fn label(&self) -> String {
        match self {
            EstimatorSpec::GlobalLeastSquares { degree } => format!("global-q{degree}"),
            EstimatorSpec::Partitioning { bins, .. } => format!("partition-b{bins}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let EstimatorSpec::Partitioning { bins, range } = self {
            if *bins == 0 {
                return Err(Error::param("bins", 0.0, "need at least one bin"));
            }
            if let RangePolicy::Fixed { lo, hi } = range {
                if lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
                    return Err(Error::Problem("fixed range needs finite lo <= hi per coordinate".into()));
                }
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for EstimatorSpec {
    type Err = Error;

    /// Parses `global:Q` or `partition:B` (also `global`, `partition`).
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let num = |default: usize| -> Result<usize> {
            if arg.is_empty() {
                Ok(default)
            } else {
                arg.parse()
                    .map_err(|_| Error::Problem(format!("bad estimator argument `{arg}`")))
            }
        };
        let est = match kind {
            "global" | "global-least-squares" => EstimatorSpec::global(num(3)?),
            "partition" | "partitioning" => EstimatorSpec::partitioning(num(64)?),
            _ => return Err(Error::Problem(format!("unknown estimator `{s}`"))),
        };
        est.validate()?;
        Ok(est)
    }
}

/// A fitted conditional-expectation function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FittedRegression {
    Global(GlobalFit),
    Partition(PartitionFit),
}

impl FittedRegression {
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self {
            FittedRegression::Global(g) => g.predict(x),
            FittedRegression::Partition(p) => p.predict(x),
        }
    }

    /// True when the least-squares design was rank deficient and only an
    /// identified column subset was fitted.
    pub fn rank_deficient(&self) -> bool {
        matches!(self, FittedRegression::Global(g) if g.rank_deficient)
    }
}

enum DesignKind {
    Global(global::GlobalDesign),
    Partition(partition::PartitionDesign),
}

/// Response-independent fitting state for one feature matrix.
pub struct Design<'a> {
    features: &'a [f64],
    d: usize,
    kind: DesignKind,
}

impl<'a> Design<'a> {
    /// `features` is `P x d`, row-major.
    pub fn new(features: &'a [f64], d: usize, est: &EstimatorSpec) -> Result<Self> {
        est.validate()?;
        if d == 0 || features.len() % d != 0 {
            return Err(Error::Problem(format!(
                "feature matrix of length {} is not a multiple of d = {d}",
                features.len()
            )));
        }
        let rows = features.len() / d;
        if rows == 0 {
            return Err(Error::Estimator {
                step: 0,
                detail: "no rows to fit".into(),
            });
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Estimator {
                step: 0,
                detail: format!("non-finite feature at row {}", i / d),
            });
        }
        let kind = match est {
            EstimatorSpec::GlobalLeastSquares { degree } => {
                DesignKind::Global(global::GlobalDesign::new(features, d, *degree)?)
            }
            EstimatorSpec::Partitioning { bins, range } => {
                DesignKind::Partition(partition::PartitionDesign::new(features, d, *bins, range)?)
            }
        };
        Ok(Design { features, d, kind })
    }

    pub fn rows(&self) -> usize {
        self.features.len() / self.d
    }

    pub fn fit(&self, responses: &[f64]) -> Result<FittedRegression> {
        if responses.len() != self.rows() {
            return Err(Error::Problem(format!(
                "{} responses for {} rows",
                responses.len(),
                self.rows()
            )));
        }
        if let Some(row) = responses.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteResponse { row });
        }
        Ok(match &self.kind {
            DesignKind::Global(g) => FittedRegression::Global(g.fit(self.features, self.d, responses)?),
            DesignKind::Partition(p) => FittedRegression::Partition(p.fit(responses)),
        })
    }

    /// Predictions at every design row, bit-identical to calling
    /// [`FittedRegression::predict`] on each row.
    pub fn predict_rows(&self, fit: &FittedRegression) -> Vec<f64> {
        match (&self.kind, fit) {
            (DesignKind::Partition(pd), FittedRegression::Partition(pf)) if pd.matches(pf) => pd.predict_rows(pf),
            _ => {
                let d = self.d;
                let rows = self.rows();
                let parts = crate::par::map_chunks(rows, |r| {
                    r.map(|i| fit.predict(&self.features[i * d..(i + 1) * d])).collect::<Vec<_>>()
                });
                parts.concat()
            }
        }
    }
}

/// One-shot fit.
pub fn fit(features: &[f64], d: usize, responses: &[f64], est: &EstimatorSpec) -> Result<FittedRegression> {
    Design::new(features, d, est)?.fit(responses)
}
