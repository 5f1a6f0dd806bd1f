//! The smooth radial cut-off used to Lipschitz-ize the terminal condition
//! and the driver.
//!
//! Inside the ball of radius `M - 1` the map is the identity. Outside, the
//! radius is bent by `psi(rho) = M - exp(-(rho - (M - 1)))`, which is C1,
//! has slope at most one and never reaches `M`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    m: f64,
}

impl TruncationSpec {
    /// `m` must exceed one. `f64::INFINITY` gives the identity map.
    pub fn new(m: f64) -> Result<Self> {
        if m.is_nan() || m <= 1.0 {
            return Err(Error::param("M", m, "truncation radius must be > 1"));
        }
        Ok(TruncationSpec { m })
    }

    pub fn radius(&self) -> f64 {
        self.m
    }

    pub fn inner_radius(&self) -> f64 {
        self.m - 1.0
    }

    /// Radial profile.
    pub fn psi(&self, rho: f64) -> f64 {
        let inner = self.m - 1.0;
        if rho <= inner {
            rho
        } else {
            self.m - (-(rho - inner)).exp()
        }
    }

    /// Writes `rho_M(x)` into `out`. `x` and `out` may not alias.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= self.m - 1.0 {
            out.copy_from_slice(x);
            return;
        }
        let scale = self.psi(norm) / norm;
        for (o, v) in out.iter_mut().zip(x) {
            *o = v * scale;
        }
    }

    /// True when `x` lies in the ball where the map is the identity.
    pub fn is_inert_at(&self, x: &[f64]) -> bool {
        x.iter().map(|v| v * v).sum::<f64>().sqrt() <= self.m - 1.0
    }
}

/// `rho_M(x)` as a fresh vector.
pub fn smooth_truncation(x: &[f64], trunc: &TruncationSpec) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    trunc.apply_into(x, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_ball_is_identity() {
        let t = TruncationSpec::new(2.0).unwrap();
        assert_eq!(smooth_truncation(&[0.5, 0.0], &t), vec![0.5, 0.0]);
        assert_eq!(smooth_truncation(&[0.0, 0.0], &t), vec![0.0, 0.0]);
    }

    #[test]
    fn outside_point_matches_profile() {
        let t = TruncationSpec::new(2.0).unwrap();
        let out = smooth_truncation(&[3.0, 0.0], &t);
        // 2 - e^{-2}, evaluated independently
        assert!((out[0] - 1.864_664_716_763_387).abs() < 1e-14);
        assert_eq!(out[1], 0.0);
        assert!(out[0] < 2.0);
    }

    #[test]
    fn profile_is_continuous_at_the_seam() {
        let t = TruncationSpec::new(5.0).unwrap();
        let left = t.psi(4.0);
        let right = t.psi(4.0 + 1e-12);
        assert!((left - right).abs() < 1e-11);
    }

    #[test]
    fn invalid_radius() {
        assert!(TruncationSpec::new(1.0).is_err());
        assert!(TruncationSpec::new(f64::NAN).is_err());
        let inf = TruncationSpec::new(f64::INFINITY).unwrap();
        assert_eq!(smooth_truncation(&[1e300], &inf), vec![1e300]);
    }
}
