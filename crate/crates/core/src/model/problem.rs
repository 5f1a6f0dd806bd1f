use std::path::Path;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::catalog::CatalogProblem;
use super::expr::{parse_coefficient, CoefficientExpr, Env, Slot};
use super::params::{Regime, RegularityParams};
use super::truncation::TruncationSpec;
use crate::error::{Error, Result};

/// Which truncated problem to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationVariant {
    /// Cut off the state in `g` and `f`.
    DeterministicSigma,
    /// Cut off the state at radius `M^(1/(r+kappa))` and `z` at radius `M`.
    RandomSigma,
}

impl std::str::FromStr for TruncationVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deterministic-sigma" | "deterministic" => Ok(TruncationVariant::DeterministicSigma),
            "random-sigma" | "random" => Ok(TruncationVariant::RandomSigma),
            _ => Err(Error::Problem(format!("unknown truncation variant `{s}`"))),
        }
    }
}

/// A truncation attached to a problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppliedTruncation {
    pub variant: TruncationVariant,
    /// The radius `M` the caller asked for.
    pub m: f64,
    pub x: TruncationSpec,
    pub z: Option<TruncationSpec>,
}

/// Markovian forward-backward problem.
///
/// `sigma` is stored row-major. When a truncation is attached, [`terminal`]
/// and [`driver`] evaluate the truncated coefficients while the forward
/// coefficients are untouched.
///
/// [`terminal`]: ProblemSpec::terminal
/// [`driver`]: ProblemSpec::driver
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    d: usize,
    t0: f64,
    horizon: f64,
    x0: Vec<f64>,
    drift: Vec<CoefficientExpr>,
    sigma: Vec<CoefficientExpr>,
    driver: CoefficientExpr,
    terminal: CoefficientExpr,
    params: RegularityParams,
    regime: Regime,
    catalog: Option<CatalogProblem>,
    truncation: Option<AppliedTruncation>,
    drift_const: Option<Vec<f64>>,
    sigma_const: Option<Vec<f64>>,
}

fn inherit_horizon() -> RegularityParams {
    RegularityParams {
        horizon: 0.0,
        ..RegularityParams::default()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProblemFile {
    d: usize,
    #[serde(rename = "T")]
    horizon: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    t0: f64,
    x0: Vec<f64>,
    b: Vec<String>,
    sigma: Vec<Vec<String>>,
    f: String,
    g: String,
    #[serde(default = "inherit_horizon")]
    params: RegularityParams,
    regime: Regime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    catalog: Option<CatalogProblem>,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

fn constant_values(exprs: &[CoefficientExpr]) -> Option<Vec<f64>> {
    if exprs.iter().any(|e| e.references_x() || e.references_t()) {
        return None;
    }
    let env = Env::state(0.0, &[]);
    exprs.iter().map(|e| e.eval(&env).ok()).collect()
}

impl ProblemSpec {
    /// Assembles and validates a problem. `params.horizon == 0` inherits `horizon`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        horizon: f64,
        x0: Vec<f64>,
        drift: Vec<CoefficientExpr>,
        sigma: Vec<Vec<CoefficientExpr>>,
        driver: CoefficientExpr,
        terminal: CoefficientExpr,
        mut params: RegularityParams,
        regime: Regime,
    ) -> Result<Self> {
        let d = x0.len();
        if d == 0 {
            return Err(Error::Problem("dimension must be at least 1".into()));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::param("T", horizon, "horizon must be positive and finite"));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Problem(format!("x0 must be finite, got {x0:?}")));
        }
        if drift.len() != d || sigma.len() != d || sigma.iter().any(|row| row.len() != d) {
            return Err(Error::Problem(format!(
                "drift must have {d} entries and sigma must be {d}x{d}"
            )));
        }
        if params.horizon == 0.0 {
            params.horizon = horizon;
        } else if params.horizon != horizon {
            return Err(Error::Problem(format!(
                "params.T = {} disagrees with T = {horizon}",
                params.horizon
            )));
        }
        params.validate(regime)?;

        let expected = [
            (Slot::Drift, &drift),
            (Slot::Diffusion, &sigma.concat()),
        ];
        for (slot, exprs) in expected {
            if exprs.iter().any(|e| e.slot() != slot) {
                return Err(Error::Problem(format!("coefficient parsed for the wrong slot, expected {slot}")));
            }
        }
        if driver.slot() != Slot::Driver || terminal.slot() != Slot::Terminal {
            return Err(Error::Problem("driver or terminal parsed for the wrong slot".into()));
        }
        let sigma: Vec<CoefficientExpr> = sigma.into_iter().flatten().collect();
        for e in drift.iter().chain(&sigma).chain([&driver, &terminal]) {
            let (xi, zi) = e.max_indices();
            if xi.is_some_and(|i| i >= d) || zi.is_some_and(|i| i >= d) {
                return Err(Error::Problem(format!(
                    "`{}` indexes past dimension {d}",
                    e.source()
                )));
            }
        }
        if regime.requires_deterministic_sigma() && sigma.iter().any(|e| e.references_x()) {
            return Err(Error::Assumption(format!(
                "regime {} requires sigma independent of x",
                regime.name()
            )));
        }
        let drift_const = constant_values(&drift);
        let sigma_const = constant_values(&sigma);
        Ok(ProblemSpec {
            d,
            t0: 0.0,
            horizon,
            x0,
            drift,
            sigma,
            driver,
            terminal,
            params,
            regime,
            catalog: None,
            truncation: None,
            drift_const,
            sigma_const,
        })
    }

    pub fn with_catalog(mut self, tag: CatalogProblem) -> Self {
        self.catalog = Some(tag);
        self
    }

    /// Same problem started at `(t0, x0)`.
    pub fn with_start(&self, t0: f64, x0: &[f64]) -> Result<Self> {
        if x0.len() != self.d {
            return Err(Error::Problem(format!(
                "start point has dimension {}, expected {}",
                x0.len(),
                self.d
            )));
        }
        if !(t0.is_finite() && (0.0..=self.horizon).contains(&t0)) {
            return Err(Error::param("t0", t0, "start time must lie in [0, T]"));
        }
        let mut out = self.clone();
        out.t0 = t0;
        out.x0 = x0.to_vec();
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn x0(&self) -> &[f64] {
        &self.x0
    }
    pub fn params(&self) -> &RegularityParams {
        &self.params
    }
    pub fn regime(&self) -> Regime {
        self.regime
    }
    pub fn catalog(&self) -> Option<&CatalogProblem> {
        self.catalog.as_ref()
    }
    pub fn truncation(&self) -> Option<&AppliedTruncation> {
        self.truncation.as_ref()
    }
    pub fn driver_expr(&self) -> &CoefficientExpr {
        &self.driver
    }
    pub fn terminal_expr(&self) -> &CoefficientExpr {
        &self.terminal
    }
    pub fn drift_exprs(&self) -> &[CoefficientExpr] {
        &self.drift
    }
    /// Row-major `d x d`.
    pub fn sigma_exprs(&self) -> &[CoefficientExpr] {
        &self.sigma
    }

    pub fn sigma_is_deterministic(&self) -> bool {
        !self.sigma.iter().any(|e| e.references_x())
    }

    /// Constant drift, if it depends on neither time nor state.
    pub fn drift_constant(&self) -> Option<&[f64]> {
        self.drift_const.as_deref()
    }

    pub fn sigma_constant(&self) -> Option<&[f64]> {
        self.sigma_const.as_deref()
    }

    pub fn drift_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        if let Some(c) = &self.drift_const {
            out.copy_from_slice(c);
            return Ok(());
        }
        let env = Env::state(t, x);
        for (o, e) in out.iter_mut().zip(&self.drift) {
            *o = e.eval(&env)?;
        }
        Ok(())
    }

    pub fn sigma_into(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        if let Some(c) = &self.sigma_const {
            out.copy_from_slice(c);
            return Ok(());
        }
        let env = Env::state(t, x);
        for (o, e) in out.iter_mut().zip(&self.sigma) {
            *o = e.eval(&env)?;
        }
        Ok(())
    }

    /// Terminal condition, truncated if a truncation is attached.
    pub fn terminal(&self, x: &[f64]) -> Result<f64> {
        match &self.truncation {
            None => self.terminal.eval(&Env::state(self.horizon, x)),
            Some(tr) => {
                let mut xs: SmallVec<[f64; 4]> = SmallVec::from_elem(0.0, x.len());
                tr.x.apply_into(x, &mut xs);
                self.terminal.eval(&Env::state(self.horizon, &xs))
            }
        }
    }

    /// Driver, truncated if a truncation is attached.
    pub fn driver(&self, t: f64, x: &[f64], y: f64, z: &[f64]) -> Result<f64> {
        match &self.truncation {
            None => self.driver.eval(&Env { t, x, y, z }),
            Some(tr) => {
                let mut xs: SmallVec<[f64; 4]> = SmallVec::from_elem(0.0, x.len());
                tr.x.apply_into(x, &mut xs);
                match &tr.z {
                    None => self.driver.eval(&Env { t, x: &xs, y, z }),
                    Some(zt) => {
                        let mut zs: SmallVec<[f64; 4]> = SmallVec::from_elem(0.0, z.len());
                        zt.apply_into(z, &mut zs);
                        self.driver.eval(&Env { t, x: &xs, y, z: &zs })
                    }
                }
            }
        }
    }

    /// True when the driver is `|z|^2 / 2`: either by catalog tag or by a
    /// numeric probe on a fixed set of points.
    pub fn is_pure_quadratic(&self) -> bool {
        if let Some(tag) = &self.catalog {
            return tag.is_pure_quadratic();
        }
        let d = self.d;
        let probes: [(f64, f64, f64, f64); 5] = [
            (0.0, 0.0, 0.0, 0.0),
            (0.3, 1.0, -2.0, 0.7),
            (0.9, -3.0, 5.0, -1.3),
            (0.1, 2.5, 0.25, 2.2),
            (0.6, -0.4, -1.0, -0.05),
        ];
        probes.iter().all(|&(t, xv, y, zv)| {
            let x = vec![xv; d];
            let z: Vec<f64> = (0..d).map(|i| zv * (1.0 + i as f64)).collect();
            let want = z.iter().map(|v| v * v).sum::<f64>() / 2.0;
            match self.driver.eval(&Env { t, x: &x, y, z: &z }) {
                Ok(v) => (v - want).abs() <= 1e-12 * (1.0 + want.abs()),
                Err(_) => false,
            }
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text)?;
        Self::from_file_repr(file)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Problem(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    fn from_file_repr(file: ProblemFile) -> Result<Self> {
        if file.x0.len() != file.d {
            return Err(Error::Problem(format!(
                "x0 has {} entries but d = {}",
                file.x0.len(),
                file.d
            )));
        }
        let drift = file
            .b
            .iter()
            .map(|s| parse_coefficient(s, Slot::Drift))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let sigma = file
            .sigma
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| parse_coefficient(s, Slot::Diffusion))
                    .collect::<std::result::Result<Vec<_>, _>>()
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let driver = parse_coefficient(&file.f, Slot::Driver)?;
        let terminal = parse_coefficient(&file.g, Slot::Terminal)?;
        let mut spec = ProblemSpec::new(
            file.horizon,
            file.x0,
            drift,
            sigma,
            driver,
            terminal,
            file.params,
            file.regime,
        )?;
        if !(0.0..=spec.horizon).contains(&file.t0) {
            return Err(Error::param("t0", file.t0, "start time must lie in [0, T]"));
        }
        spec.t0 = file.t0;
        spec.catalog = file.catalog;
        Ok(spec)
    }

    /// JSON problem document. Truncation is not part of the file format.
    pub fn to_json_string(&self) -> Result<String> {
        let d = self.d;
        let file = ProblemFile {
            d,
            horizon: self.horizon,
            t0: self.t0,
            x0: self.x0.clone(),
            b: self.drift.iter().map(|e| e.source().to_string()).collect(),
            sigma: (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| self.sigma[i * d + j].source().to_string())
                        .collect()
                })
                .collect(),
            f: self.driver.source().to_string(),
            g: self.terminal.source().to_string(),
            params: self.params.clone(),
            regime: self.regime,
            catalog: self.catalog.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

/// Attaches a truncation of radius `m` to an untruncated problem.
pub fn truncate_problem(spec: &ProblemSpec, m: f64, variant: TruncationVariant) -> Result<ProblemSpec> {
    if spec.truncation.is_some() {
        return Err(Error::Problem("problem is already truncated".into()));
    }
    let x_trunc = TruncationSpec::new(m)?;
    let applied = match variant {
        TruncationVariant::DeterministicSigma => AppliedTruncation {
            variant,
            m,
            x: x_trunc,
            z: None,
        },
        TruncationVariant::RandomSigma => {
            if spec.regime != Regime::B3Bounded {
                return Err(Error::Regime(format!(
                    "random-sigma truncation needs regime B3-bounded, problem is {}",
                    spec.regime.name()
                )));
            }
            let e = spec.params.r + spec.params.kappa;
            if e <= 0.0 {
                return Err(Error::param("r + kappa", e, "random-sigma truncation needs r + kappa > 0"));
            }
            AppliedTruncation {
                variant,
                m,
                x: TruncationSpec::new(m.powf(1.0 / e))?,
                z: Some(x_trunc),
            }
        }
    };
    let mut out = spec.clone();
    out.truncation = Some(applied);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog;

    fn p(src: &str, slot: Slot) -> CoefficientExpr {
        parse_coefficient(src, slot).unwrap()
    }

    fn heat(g: &str, f: &str) -> ProblemSpec {
        ProblemSpec::new(
            1.0,
            vec![0.0],
            vec![p("0", Slot::Drift)],
            vec![vec![p("1", Slot::Diffusion)]],
            p(f, Slot::Driver),
            p(g, Slot::Terminal),
            RegularityParams::default(),
            Regime::B2Subcritical,
        )
        .unwrap()
    }

    #[test]
    fn deterministic_truncation_inside_ball() {
        let spec = heat("x0", "abs(z)^2 / 2");
        let tr = truncate_problem(&spec, 5.0, TruncationVariant::DeterministicSigma).unwrap();
        assert_eq!(tr.terminal(&[2.0]).unwrap(), 2.0);
        assert!(tr.terminal(&[10.0]).unwrap() < 5.0);
        // driver has no x dependence, so truncation changes nothing
        for z in [0.0, 3.0, 100.0] {
            assert_eq!(tr.driver(0.5, &[50.0], 1.0, &[z]).unwrap(), spec.driver(0.5, &[50.0], 1.0, &[z]).unwrap());
        }
    }

    #[test]
    fn random_sigma_radii() {
        let spec = catalog::CatalogProblem::RandomSigmaSine {
            s: 1.0,
            kappa: 0.3,
            r: 0.2,
            horizon: 1.0,
            x0: 0.0,
        }
        .spec()
        .unwrap();
        let tr = truncate_problem(&spec, 32.0, TruncationVariant::RandomSigma).unwrap();
        let a = tr.truncation().unwrap();
        assert!((a.x.radius() - 1024.0).abs() < 1e-9);
        assert_eq!(a.z.unwrap().radius(), 32.0);
    }

    #[test]
    fn variant_regime_mismatch() {
        let spec = heat("x0", "0");
        let err = truncate_problem(&spec, 4.0, TruncationVariant::RandomSigma).unwrap_err();
        assert!(matches!(err, Error::Regime(_)));
        assert!(truncate_problem(&spec, 0.5, TruncationVariant::DeterministicSigma).is_err());
    }

    #[test]
    fn sigma_with_x_rejected_in_deterministic_regimes() {
        let err = ProblemSpec::new(
            1.0,
            vec![0.0],
            vec![p("0", Slot::Drift)],
            vec![vec![p("1 + x0", Slot::Diffusion)]],
            p("0", Slot::Driver),
            p("x0", Slot::Terminal),
            RegularityParams::default(),
            Regime::B1Critical,
        )
        .unwrap_err();
        assert!(err.is_assumption_violation());
    }

    #[test]
    fn json_round_trip() {
        let spec = catalog::CatalogProblem::quadratic_linear(1.0, 1.0).spec().unwrap();
        let text = spec.to_json_string().unwrap();
        let back = ProblemSpec::from_json_str(&text).unwrap();
        assert_eq!(back.to_json_string().unwrap(), text);
        assert!(back.is_pure_quadratic());
        assert_eq!(back.catalog(), spec.catalog());
    }

    #[test]
    fn json_without_params_inherits_horizon() {
        let text = r#"{"d":1,"T":2.0,"x0":[0.0],"b":["0"],"sigma":[["1"]],
            "f":"abs(z)^2/2","g":"sin(x0)","regime":"B2-subcritical"}"#;
        let spec = ProblemSpec::from_json_str(text).unwrap();
        assert_eq!(spec.params().horizon, 2.0);
        assert!(spec.is_pure_quadratic());
        assert_eq!(spec.sigma_constant(), Some(&[1.0][..]));
    }

    #[test]
    fn json_reports_bad_index() {
        let text = r#"{"d":1,"T":1.0,"x0":[0.0],"b":["0"],"sigma":[["1"]],
            "f":"z1","g":"x0","regime":"B2-subcritical"}"#;
        assert!(matches!(ProblemSpec::from_json_str(text), Err(Error::Problem(_))));
        let text = r#"{"d":1,"T":1.0,"x0":[0.0],"b":["0"],"sigma":[["1"]],
            "f":"0","g":"t","regime":"B2-subcritical"}"#;
        assert!(matches!(ProblemSpec::from_json_str(text), Err(Error::Parse(_))));
    }

    #[test]
    fn probe_rejects_other_drivers() {
        assert!(!heat("x0", "abs(z)^2").is_pure_quadratic());
        assert!(!heat("x0", "0").is_pure_quadratic());
        assert!(heat("x0", "dot(z, z) / 2").is_pure_quadratic());
    }
}
