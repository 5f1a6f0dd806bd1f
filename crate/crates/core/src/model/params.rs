use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Structural regime a problem is declared to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Local-Lipschitz exponent `r < 1/l`, deterministic diffusion.
    #[serde(rename = "B2-subcritical")]
    B2Subcritical,
    /// Exponent `1/l` with the smallness condition on `alpha + T beta`.
    #[serde(rename = "B1-critical")]
    B1Critical,
    /// Bounded terminal condition, state-dependent diffusion.
    #[serde(rename = "B3-bounded")]
    B3Bounded,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::B2Subcritical => "B2-subcritical",
            Regime::B1Critical => "B1-critical",
            Regime::B3Bounded => "B3-bounded",
        }
    }

    /// Whether the regime requires `sigma` to be free of the state.
    pub fn requires_deterministic_sigma(self) -> bool {
        !matches!(self, Regime::B3Bounded)
    }
}

fn one() -> f64 {
    1.0
}

/// Declared regularity constants. These are trusted, not inferred; the
/// harness only falsifies them by sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityParams {
    #[serde(default = "one")]
    pub l: f64,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default, rename = "K_b")]
    pub k_b: f64,
    #[serde(default, rename = "K_f_y")]
    pub k_fy: f64,
    #[serde(default, rename = "K_f_x")]
    pub k_fx: f64,
    #[serde(default, rename = "K_f_z")]
    pub k_fz: f64,
    #[serde(default, rename = "K_g")]
    pub k_g: f64,
    #[serde(default = "one")]
    pub sigma_sup: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default, rename = "M_sigma")]
    pub m_sigma: f64,
    #[serde(default, rename = "K_sigma")]
    pub k_sigma: f64,
    #[serde(default, rename = "M_f")]
    pub m_f: f64,
    #[serde(default, rename = "M_g")]
    pub m_g: f64,
    /// Horizon. Zero means "take it from the enclosing problem".
    #[serde(default, rename = "T")]
    pub horizon: f64,
    /// The unspecified constant in the non-explicit estimates.
    #[serde(default = "one", rename = "envelope_C")]
    pub envelope_c: f64,
}

impl Default for RegularityParams {
    fn default() -> Self {
        RegularityParams {
            l: 1.0,
            r: 0.0,
            alpha: 0.0,
            beta: 0.0,
            gamma: 1.0,
            k_b: 0.0,
            k_fy: 0.0,
            k_fx: 0.0,
            k_fz: 0.0,
            k_g: 0.0,
            sigma_sup: 1.0,
            kappa: 0.0,
            m_sigma: 0.0,
            k_sigma: 0.0,
            m_f: 0.0,
            m_g: 0.0,
            horizon: 1.0,
            envelope_c: 1.0,
        }
    }
}

impl RegularityParams {
    fn named(&self) -> [(&'static str, f64); 18] {
        [
            ("l", self.l),
            ("r", self.r),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("K_b", self.k_b),
            ("K_f_y", self.k_fy),
            ("K_f_x", self.k_fx),
            ("K_f_z", self.k_fz),
            ("K_g", self.k_g),
            ("sigma_sup", self.sigma_sup),
            ("kappa", self.kappa),
            ("M_sigma", self.m_sigma),
            ("K_sigma", self.k_sigma),
            ("M_f", self.m_f),
            ("M_g", self.m_g),
            ("T", self.horizon),
            ("envelope_C", self.envelope_c),
        ]
    }

    /// Checks the generic constraints plus the regime-specific ones.
    pub fn validate(&self, regime: Regime) -> Result<()> {
        for (name, v) in self.named() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(name, v, "must be finite and nonnegative"));
            }
        }
        if self.l < 1.0 {
            return Err(Error::param("l", self.l, "growth exponent must be >= 1"));
        }
        if self.kappa > 1.0 {
            return Err(Error::param("kappa", self.kappa, "must lie in [0, 1]"));
        }
        if self.horizon <= 0.0 {
            return Err(Error::param("T", self.horizon, "horizon must be positive"));
        }
        if regime == Regime::B2Subcritical && self.r * self.l >= 1.0 {
            return Err(Error::Regime(format!(
                "B2-subcritical needs r < 1/l, got r = {}, l = {}",
                self.r, self.l
            )));
        }
        Ok(())
    }
}
