//! Truncation radius as a function of the number of time steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RegularityParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleRule {
    /// `M = (log n)^(p/2)`, `1 < p < 1/(r l)`; deterministic sigma, subcritical growth.
    #[serde(rename = "thm5_6_subcritical")]
    Thm56Subcritical,
    /// `M = c sqrt(log n)`, `c = 1/(C1 + C2)`; deterministic sigma, critical growth.
    #[serde(rename = "thm5_6_critical")]
    Thm56Critical,
    /// `M = (log n)^(p/2)`, `0 < p < 1`; random sigma with `2 kappa < 1 - r`.
    #[serde(rename = "thm5_7_strict")]
    Thm57Strict,
    /// `M = c sqrt(log n)`; random sigma with `2 kappa = 1 - r`.
    #[serde(rename = "thm5_7_boundary")]
    Thm57Boundary,
}

impl ScheduleRule {
    pub fn name(self) -> &'static str {
        match self {
            ScheduleRule::Thm56Subcritical => "thm5_6_subcritical",
            ScheduleRule::Thm56Critical => "thm5_6_critical",
            ScheduleRule::Thm57Strict => "thm5_7_strict",
            ScheduleRule::Thm57Boundary => "thm5_7_boundary",
        }
    }
}

impl std::str::FromStr for ScheduleRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "thm5_6_subcritical" | "subcritical" => ScheduleRule::Thm56Subcritical,
            "thm5_6_critical" | "critical" => ScheduleRule::Thm56Critical,
            "thm5_7_strict" | "strict" => ScheduleRule::Thm57Strict,
            "thm5_7_boundary" | "boundary" => ScheduleRule::Thm57Boundary,
            _ => return Err(Error::Problem(format!("unknown schedule rule `{s}`"))),
        })
    }
}

/// Tolerance on `2 kappa = 1 - r` for the boundary rule.
const BOUNDARY_TOL: f64 = 1e-12;

/// Truncation radius for `n` steps (`n >= 1`, real so that `n = e^4` works).
pub fn select_m(n: f64, params: &RegularityParams, rule: ScheduleRule, p_exp: f64, c_ratio: f64) -> Result<f64> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::param("n", n, "need n >= 1"));
    }
    let log_n = n.ln();
    let (r, l, kappa) = (params.r, params.l, params.kappa);
    let ratio = || -> Result<f64> {
        if c_ratio > 0.0 && c_ratio.is_finite() {
            Ok(c_ratio)
        } else {
            Err(Error::param("c_ratio", c_ratio, "need a positive finite 1/(C1 + C2)"))
        }
    };
    match rule {
        ScheduleRule::Thm56Subcritical => {
            let rl = r * l;
            if !(rl < 1.0) {
                return Err(Error::Regime(format!(
                    "subcritical schedule needs r l < 1, got r l = {rl}"
                )));
            }
            let upper = if rl > 0.0 { 1.0 / rl } else { f64::INFINITY };
            if !(p_exp > 1.0 && p_exp < upper) {
                return Err(Error::param(
                    "p",
                    p_exp,
                    format!("subcritical schedule needs 1 < p < 1/(r l) = {upper}"),
                ));
            }
            Ok(log_n.powf(p_exp / 2.0))
        }
        ScheduleRule::Thm56Critical => Ok(ratio()? * log_n.sqrt()),
        ScheduleRule::Thm57Strict => {
            check_kappa(r, kappa, false)?;
            if !(p_exp > 0.0 && p_exp < 1.0) {
                return Err(Error::param(
                    "p",
                    p_exp,
                    "strict random-sigma schedule needs 0 < p < 1 (M = (log n)^(p/2))",
                ));
            }
            Ok(log_n.powf(p_exp / 2.0))
        }
        ScheduleRule::Thm57Boundary => {
            check_kappa(r, kappa, true)?;
            Ok(ratio()? * log_n.sqrt())
        }
    }
}

fn check_kappa(r: f64, kappa: f64, boundary: bool) -> Result<()> {
    let lhs = 2.0 * kappa;
    let rhs = 1.0 - r;
    if lhs > rhs + BOUNDARY_TOL {
        return Err(Error::Regime(format!(
            "2 kappa = {lhs} > 1 - r = {rhs}: only a logarithmic rate C/(log n)^k is available, no power schedule applies"
        )));
    }
    let on_boundary = (lhs - rhs).abs() <= BOUNDARY_TOL;
    if boundary && !on_boundary {
        return Err(Error::Regime(format!(
            "boundary schedule needs 2 kappa = 1 - r, got {lhs} < {rhs}; use the strict rule"
        )));
    }
    if !boundary && on_boundary {
        return Err(Error::Regime(format!(
            "strict schedule needs 2 kappa < 1 - r, got equality at {rhs}; use the boundary rule"
        )));
    }
    Ok(())
}

/// How a study picks `M` for each `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MSchedule {
    /// No truncation.
    None,
    Fixed { m: f64 },
    Rule {
        rule: ScheduleRule,
        #[serde(default = "default_p")]
        p_exp: f64,
        #[serde(default = "default_c")]
        c_ratio: f64,
    },
}

fn default_p() -> f64 {
    2.0
}
fn default_c() -> f64 {
    1.0
}

impl MSchedule {
    /// `None` means untruncated.
    pub fn m_for(&self, n: usize, params: &RegularityParams) -> Result<Option<f64>> {
        match self {
            MSchedule::None => Ok(None),
            MSchedule::Fixed { m } => Ok(Some(*m)),
            MSchedule::Rule { rule, p_exp, c_ratio } => select_m(n as f64, params, *rule, *p_exp, *c_ratio).map(Some),
        }
    }
}
