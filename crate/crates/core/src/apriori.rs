//! Explicit admissibility thresholds, Z-bounds and the fixed-point
//! recursions behind the gradient envelopes.
//!
//! Constants the theory leaves generic are taken from
//! [`RegularityParams::envelope_c`] and echoed in every report.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CoefficientExpr, Env, Regime, RegularityParams};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
const GROWTH_PATIENCE: usize = 50;
const RADIUS_CAP: f64 = 1e9;
const RADIUS_SCAN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeKind {
    LipschitzBound,
    B2Envelope,
    B1Envelope,
    B3Envelope,
}

/// Which rate guarantee applies to a bounded-terminal problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateRegime {
    /// `2 kappa < 1 - r`: polynomial rate for a `(log n)^p` schedule.
    Strict,
    /// `2 kappa = 1 - r`: polynomial rate for a `sqrt(log n)` schedule.
    Boundary,
    /// `kappa = 1` or `2 kappa > 1 - r`: only logarithmic rates are known.
    LogarithmicOnly,
}

/// Pointwise bound `|Z_t| <= a + b |X_t|^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub kind: EnvelopeKind,
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub exponent: f64,
    pub iterations: usize,
    pub converged: bool,
    pub envelope_c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_regime: Option<RateRegime>,
}

impl EnvelopeReport {
    pub fn bound(&self, x_norm: f64) -> f64 {
        if self.exponent == 0.0 {
            self.a + self.b
        } else {
            self.a + self.b * x_norm.powf(self.exponent)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub threshold: f64,
    pub lhs: f64,
    pub satisfied: bool,
    pub margin: f64,
}

/// Smallness condition on `alpha + T beta` for the critical regime.
pub fn check_b1_threshold(p: &RegularityParams) -> Result<ThresholdReport> {
    if !(p.gamma > 0.0) {
        return Err(Error::param("gamma", p.gamma, "must be positive"));
    }
    if !(p.sigma_sup > 0.0) {
        return Err(Error::param("sigma_sup", p.sigma_sup, "must be positive"));
    }
    if !(p.horizon > 0.0) {
        return Err(Error::param("T", p.horizon, "must be positive"));
    }
    if !(p.l >= 1.0) {
        return Err(Error::param("l", p.l, "must be >= 1"));
    }
    let il = 1.0 / p.l;
    let t = p.horizon;
    let denom = il.exp()
        * 2f64.powf(1.0 - il)
        * p.gamma.powf(il)
        * (((1.0 + il) * p.k_b + p.k_fy) * t).exp()
        * p.sigma_sup.powf(1.0 + il)
        * t.powf(il);
    let threshold = 1.0 / denom;
    let lhs = p.alpha + t * p.beta;
    Ok(ThresholdReport {
        threshold,
        lhs,
        satisfied: lhs < threshold,
        margin: threshold - lhs,
    })
}

/// Bound on `|Z|` for Lipschitz data.
pub fn lipschitz_z_bound(p: &RegularityParams) -> f64 {
    ((2.0 * p.k_b + p.k_fy) * p.horizon).exp() * p.sigma_sup * (p.k_g + p.horizon * p.k_fx)
}

/// The Lipschitz bound wrapped as a constant envelope.
pub fn lipschitz_envelope(p: &RegularityParams) -> EnvelopeReport {
    EnvelopeReport {
        kind: EnvelopeKind::LipschitzBound,
        t: 0.0,
        a: lipschitz_z_bound(p),
        b: 0.0,
        exponent: 0.0,
        iterations: 0,
        converged: true,
        envelope_c: p.envelope_c,
        c1: None,
        c2: None,
        rate_regime: None,
    }
}

/// `C1(t)` and `C2` of the critical-regime recursion.
pub fn b1_constants(p: &RegularityParams, t: f64) -> (f64, f64) {
    let il = 1.0 / p.l;
    let c1 = p.sigma_sup
        * (p.alpha + p.beta * p.horizon)
        * ((p.k_b * (1.0 + il) + p.k_fy) * (p.horizon - t)).exp();
    let c2 = 2f64.powf(p.l - 1.0) * p.sigma_sup * p.gamma * p.horizon;
    (c1, c2)
}

/// Closed-form coefficient envelope `envelope_C + C1(t) e^{1/l} |x|^{1/l}`.
pub fn b1_closed_form(p: &RegularityParams, t: f64) -> EnvelopeReport {
    let (c1, c2) = b1_constants(p, t);
    EnvelopeReport {
        kind: EnvelopeKind::B1Envelope,
        t,
        a: p.envelope_c,
        b: c1 * (1.0 / p.l).exp(),
        exponent: 1.0 / p.l,
        iterations: 0,
        converged: true,
        envelope_c: p.envelope_c,
        c1: Some(c1),
        c2: Some(c2),
        rate_regime: None,
    }
}

/// Iterates `B <- C1 exp(C2 B^l / l)` from zero with explicit constants.
/// Returns `(B, iterations, converged)`.
pub fn b1_fixed_point(c1: f64, c2: f64, l: f64, tol: f64, max_iter: usize) -> (f64, usize, bool) {
    let blowup = if c2 > 0.0 {
        10.0 * (std::f64::consts::E * c2).powf(-1.0 / l)
    } else {
        f64::INFINITY
    };
    let mut b = 0.0f64;
    let mut last_step = f64::INFINITY;
    let mut growing = 0usize;
    for it in 1..=max_iter {
        let next = c1 * (c2 * b.powf(l) / l).exp();
        if !next.is_finite() || next > blowup {
            return (next, it, false);
        }
        let step = (next - b).abs();
        b = next;
        if step < tol {
            return (b, it, true);
        }
        if step > last_step {
            growing += 1;
            if growing >= GROWTH_PATIENCE {
                return (b, it, false);
            }
        } else {
            growing = 0;
        }
        last_step = step;
    }
    (b, max_iter, false)
}

/// Critical-regime envelope at time `t`. Divergence is reported through
/// `converged = false`, not as an error.
pub fn b1_envelope(p: &RegularityParams, t: f64, tol: f64, max_iter: usize) -> Result<EnvelopeReport> {
    if !(p.l >= 1.0) {
        return Err(Error::param("l", p.l, "must be >= 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", tol, "must be positive"));
    }
    let (c1, c2) = b1_constants(p, t);
    let (b, iterations, mut converged) = b1_fixed_point(c1, c2, p.l, tol, max_iter);
    let mut a = f64::INFINITY;
    if converged {
        let denom = 1.0 - b * c2.powf(1.0 / p.l);
        if denom > 0.0 {
            a = p.envelope_c * b / denom;
        } else {
            converged = false;
        }
    }
    Ok(EnvelopeReport {
        kind: EnvelopeKind::B1Envelope,
        t,
        a,
        b,
        exponent: 1.0 / p.l,
        iterations,
        converged,
        envelope_c: p.envelope_c,
        c1: Some(c1),
        c2: Some(c2),
        rate_regime: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct B2Limit {
    pub a_inf: f64,
    pub iterations: usize,
}

/// Limit of `A <- C (1 + A^{rl})`, a contraction when `rl < 1`.
pub fn b2_recursion_limit(p: &RegularityParams, a0: f64, tol: f64) -> Result<B2Limit> {
    let e = p.r * p.l;
    if e >= 1.0 {
        return Err(Error::Regime(format!(
            "recursion needs r l < 1, got r l = {e}"
        )));
    }
    if !(a0 >= 0.0 && a0.is_finite()) {
        return Err(Error::param("A0", a0, "must be finite and nonnegative"));
    }
    let c = p.envelope_c;
    let mut a = a0;
    for it in 1..=DEFAULT_MAX_ITER {
        let next = c * (1.0 + a.powf(e));
        if (next - a).abs() < tol {
            return Ok(B2Limit { a_inf: next, iterations: it });
        }
        a = next;
    }
    Err(Error::Overflow(format!("recursion did not settle within {DEFAULT_MAX_ITER} steps")))
}

/// Subcritical envelope `A_inf + C |x|^r`.
pub fn b2_envelope(p: &RegularityParams) -> Result<EnvelopeReport> {
    let lim = b2_recursion_limit(p, 0.0, DEFAULT_TOL)?;
    Ok(EnvelopeReport {
        kind: EnvelopeKind::B2Envelope,
        t: 0.0,
        a: lim.a_inf,
        b: p.envelope_c,
        exponent: p.r,
        iterations: lim.iterations,
        converged: true,
        envelope_c: p.envelope_c,
        c1: None,
        c2: None,
        rate_regime: None,
    })
}

/// Lowest positive fixed point of the small-horizon radius map, or `None`
/// when the scan up to the cap finds no crossing.
pub fn small_time_radius(p: &RegularityParams, phi: &CoefficientExpr, c_const: f64) -> Result<Option<f64>> {
    let t = p.horizon;
    let lead = c_const * (p.k_fy * t).exp() * p.m_sigma * (p.k_g + p.k_fx * t);
    let map = |x: f64| -> Result<f64> {
        let ph = phi.eval(&Env::state(0.0, &[x]))?;
        let inner = p.k_b + p.k_sigma * (p.k_fz + 2.0 * ph);
        Ok(1.0 + lead * (p.k_sigma * p.k_sigma * t + inner * inner * t * t).exp())
    };
    let gap = |x: f64| -> Result<f64> { Ok(x - map(x)?) };

    let ratio = RADIUS_CAP.powf(1.0 / (RADIUS_SCAN - 1) as f64);
    let mut lo = 1.0;
    let g_lo = gap(lo)?;
    if g_lo >= 0.0 {
        return Ok(Some(lo));
    }
    let mut hi = f64::NAN;
    for i in 1..RADIUS_SCAN {
        let x = ratio.powi(i as i32);
        let g = gap(x)?;
        if g.is_nan() {
            return Ok(None);
        }
        if g >= 0.0 {
            hi = x;
            break;
        }
        lo = x;
    }
    if hi.is_nan() {
        return Ok(None);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Classifies the rate regime of a bounded-terminal problem.
pub fn rate_regime(r: f64, kappa: f64) -> RateRegime {
    let lhs = 2.0 * kappa;
    let rhs = 1.0 - r;
    if kappa >= 1.0 || lhs > rhs {
        RateRegime::LogarithmicOnly
    } else if lhs == rhs {
        RateRegime::Boundary
    } else {
        RateRegime::Strict
    }
}

/// Envelope `C (1 + |x|^{r+kappa})` for the bounded-terminal regime.
pub fn b3_envelope(p: &RegularityParams, regime: Regime) -> Result<EnvelopeReport> {
    if regime != Regime::B3Bounded {
        return Err(Error::Regime(format!(
            "bounded-terminal envelope needs regime B3-bounded, got {}",
            regime.name()
        )));
    }
    Ok(EnvelopeReport {
        kind: EnvelopeKind::B3Envelope,
        t: 0.0,
        a: p.envelope_c,
        b: p.envelope_c,
        exponent: p.r + p.kappa,
        iterations: 0,
        converged: true,
        envelope_c: p.envelope_c,
        c1: None,
        c2: None,
        rate_regime: Some(rate_regime(p.r, p.kappa)),
    })
}
