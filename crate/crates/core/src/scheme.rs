//! Explicit backward dynamic programming over an Euler ensemble.
//!
//! For `k = n-1, ..., 0`
//!
//! ```text
//! Z_k = E_k[ Y_{k+1} dW_k ] / h
//! Y_k = E_k[ Y_{k+1} + h f(t_k, X_k, Y_{k+1}, Z_k) ]
//! ```
//!
//! with `E_k` replaced by a regression on `X_k`. The `Z` responses are
//! centred by a first regression of `Y_{k+1}` on the same design
//! (`E_k[c(X_k) dW_k] = 0`, so the target is unchanged while the variance
//! drops from `O(1/h)` to `O(1)`).
//!
//! Only the fitted regressions are kept. `Y[p][k]` and `Z[p][k]` are
//! recomputed from them on demand and agree bit-for-bit with the values
//! used during the recursion.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::condexp::{Design, EstimatorSpec, FittedRegression};
use crate::error::{Error, Result};
use crate::model::{AppliedTruncation, ProblemSpec, TruncationVariant};
use crate::par::{self, CHUNK};
use crate::simulate::{euler_paths, PathEnsemble};

/// Which family of truncated coefficients the solution was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeVariant {
    Untruncated,
    DeterministicSigma,
    RandomSigma,
}

impl SchemeVariant {
    pub fn name(self) -> &'static str {
        match self {
            SchemeVariant::Untruncated => "untruncated",
            SchemeVariant::DeterministicSigma => "deterministic-sigma",
            SchemeVariant::RandomSigma => "random-sigma",
        }
    }

    fn of(spec: &ProblemSpec) -> Self {
        match spec.truncation().map(|t| t.variant) {
            None => SchemeVariant::Untruncated,
            Some(TruncationVariant::DeterministicSigma) => SchemeVariant::DeterministicSigma,
            Some(TruncationVariant::RandomSigma) => SchemeVariant::RandomSigma,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    spec: ProblemSpec,
    ens: Arc<PathEnsemble>,
    estimator: EstimatorSpec,
    variant: SchemeVariant,
    y_fits: Vec<FittedRegression>,
    /// `z_fits[k][i]`.
    z_fits: Vec<Vec<FittedRegression>>,
    y_terminal: Vec<f64>,
    y0_stderr: f64,
    rank_deficient_steps: Vec<usize>,
}

/// Per-step sample statistics of a solution.
#[derive(Debug, Clone, Serialize)]
pub struct StepStats {
    pub k: usize,
    pub t: f64,
    pub y_mean: f64,
    pub y_std: f64,
    pub z_mean: Vec<f64>,
}

fn at_step(k: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Estimator { detail, .. } => Error::Estimator { step: k, detail },
        Error::NonFiniteResponse { row } => Error::Estimator {
            step: k,
            detail: format!("non-finite response at particle {row}"),
        },
        other => other,
    }
}

fn check_compatible(spec: &ProblemSpec, ens: &PathEnsemble) -> Result<()> {
    if ens.dim() != spec.dim() {
        return Err(Error::Grid(format!(
            "ensemble has dimension {}, problem has {}",
            ens.dim(),
            spec.dim()
        )));
    }
    let scale = spec.horizon().abs().max(1.0);
    if (ens.t0() - spec.t0()).abs() > 1e-12 * scale || (ens.time(ens.n()) - spec.horizon()).abs() > 1e-9 * scale {
        return Err(Error::Grid(format!(
            "ensemble covers [{}, {}], problem covers [{}, {}]",
            ens.t0(),
            ens.time(ens.n()),
            spec.t0(),
            spec.horizon()
        )));
    }
    Ok(())
}

/// Runs the backward recursion for `spec` (usually truncated) on `ens`.
///
/// `ens` must come from the same forward equation; truncation only changes
/// `g` and `f`.
pub fn solve_backward(
    spec: &ProblemSpec,
    ens: impl Into<Arc<PathEnsemble>>,
    est: &EstimatorSpec,
) -> Result<DiscreteSolution> {
    let ens: Arc<PathEnsemble> = ens.into();
    check_compatible(spec, &ens)?;
    est.validate()?;
    let (n, np, d, h) = (ens.n(), ens.particles(), ens.dim(), ens.h());
    let kfy = spec.params().k_fy;
    if h * kfy >= 0.5 {
        return Err(Error::Assumption(format!(
            "explicit step needs h * K_f_y < 1/2, got h = {h} and K_f_y = {kfy}; increase n"
        )));
    }

    let xn = ens.step_states(n);
    let y_terminal: Vec<f64> = par::map_chunks(np, |r| {
        r.map(|p| {
            let x = &xn[p * d..(p + 1) * d];
            spec.terminal(x).map_err(|e| Error::PathEvaluation {
                particle: p,
                step: n,
                state: x.to_vec(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<f64>>>()
    })
    .into_iter()
    .collect::<Result<Vec<Vec<f64>>>>()?
    .concat();
    if let Some(p) = y_terminal.iter().position(|v| !v.is_finite()) {
        return Err(Error::PathEvaluation {
            particle: p,
            step: n,
            state: xn[p * d..(p + 1) * d].to_vec(),
            source: Box::new(Error::Domain {
                op: "terminal",
                detail: format!("value {}", y_terminal[p]),
            }),
        });
    }

    let mut y_fits = Vec::with_capacity(n);
    let mut z_fits = Vec::with_capacity(n);
    let mut rank_deficient_steps = Vec::new();
    let mut y_next = y_terminal.clone();
    let mut dw = vec![0.0; np * d];
    let mut zr = vec![0.0; np];
    let mut z_pred = vec![0.0; np * d];
    let mut y0_stderr = 0.0;

    for k in (0..n).rev() {
        let t = ens.time(k);
        let x = ens.step_states(k);
        let design = Design::new(x, d, est).map_err(at_step(k))?;

        dw.par_chunks_mut(CHUNK * d).enumerate().for_each(|(c, block)| {
            for (local, w) in block.chunks_mut(d).enumerate() {
                ens.increment_into(c * CHUNK + local, k, w);
            }
        });

        let cv_fit = design.fit(&y_next).map_err(at_step(k))?;
        let centre = design.predict_rows(&cv_fit);

        let mut zf = Vec::with_capacity(d);
        for i in 0..d {
            zr.par_iter_mut().enumerate().for_each(|(p, r)| {
                *r = (y_next[p] - centre[p]) * dw[p * d + i] / h;
            });
            let fit = design.fit(&zr).map_err(at_step(k))?;
            let pred = design.predict_rows(&fit);
            if let Some(p) = pred.iter().position(|v| !v.is_finite()) {
                return Err(Error::Estimator {
                    step: k,
                    detail: format!("non-finite Z prediction at particle {p}"),
                });
            }
            for (p, v) in pred.into_iter().enumerate() {
                z_pred[p * d + i] = v;
            }
            if fit.rank_deficient() {
                rank_deficient_steps.push(k);
            }
            zf.push(fit);
        }

        let responses: Vec<f64> = par::map_chunks(np, |r| {
            r.map(|p| {
                let xp = &x[p * d..(p + 1) * d];
                let zp = &z_pred[p * d..(p + 1) * d];
                let fv = spec.driver(t, xp, y_next[p], zp).map_err(|e| Error::PathEvaluation {
                    particle: p,
                    step: k,
                    state: xp.to_vec(),
                    source: Box::new(e),
                })?;
                if !fv.is_finite() {
                    return Err(Error::NonFiniteDriver {
                        particle: p,
                        step: k,
                        state: xp.to_vec(),
                        z: zp.to_vec(),
                    });
                }
                Ok(y_next[p] + h * fv)
            })
            .collect::<Result<Vec<f64>>>()
        })
        .into_iter()
        .collect::<Result<Vec<Vec<f64>>>>()?
        .concat();

        let yfit = design.fit(&responses).map_err(at_step(k))?;
        let y_cur = design.predict_rows(&yfit);
        if let Some(p) = y_cur.iter().position(|v| !v.is_finite()) {
            return Err(Error::Estimator {
                step: k,
                detail: format!("non-finite Y prediction at particle {p}"),
            });
        }
        if yfit.rank_deficient() && !rank_deficient_steps.ends_with(&[k]) {
            rank_deficient_steps.push(k);
        }
        if k == 0 {
            let mean = par::sum(np, |p| responses[p]) / np as f64;
            let var = par::sum(np, |p| (responses[p] - mean).powi(2)) / (np.max(2) - 1) as f64;
            y0_stderr = (var / np as f64).sqrt();
        }
        y_fits.push(yfit);
        z_fits.push(zf);
        y_next = y_cur;
    }
    y_fits.reverse();
    z_fits.reverse();
    rank_deficient_steps.dedup();
    rank_deficient_steps.reverse();

    Ok(DiscreteSolution {
        spec: spec.clone(),
        ens,
        estimator: est.clone(),
        variant: SchemeVariant::of(spec),
        y_fits,
        z_fits,
        y_terminal,
        y0_stderr,
        rank_deficient_steps,
    })
}

impl DiscreteSolution {
    pub fn n(&self) -> usize {
        self.ens.n()
    }
    pub fn h(&self) -> f64 {
        self.ens.h()
    }
    pub fn dim(&self) -> usize {
        self.ens.dim()
    }
    pub fn particles(&self) -> usize {
        self.ens.particles()
    }
    pub fn ensemble(&self) -> &PathEnsemble {
        &self.ens
    }
    pub fn shared_ensemble(&self) -> Arc<PathEnsemble> {
        Arc::clone(&self.ens)
    }
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }
    pub fn estimator(&self) -> &EstimatorSpec {
        &self.estimator
    }
    pub fn variant(&self) -> SchemeVariant {
        self.variant
    }
    pub fn truncation(&self) -> Option<&AppliedTruncation> {
        self.spec.truncation()
    }
    pub fn y_fit(&self, k: usize) -> &FittedRegression {
        &self.y_fits[k]
    }
    pub fn z_fit(&self, k: usize, i: usize) -> &FittedRegression {
        &self.z_fits[k][i]
    }
    /// Steps whose least-squares design lost rank.
    pub fn rank_deficient_steps(&self) -> &[usize] {
        &self.rank_deficient_steps
    }

    /// `Y[p][k]`.
    pub fn y(&self, p: usize, k: usize) -> f64 {
        if k == self.n() {
            self.y_terminal[p]
        } else {
            self.y_fits[k].predict(self.ens.state(p, k))
        }
    }

    /// `Z[p][k]`; at `k = n` the last fitted step is reused.
    pub fn z_into(&self, p: usize, k: usize, out: &mut [f64]) {
        let k = k.min(self.n() - 1);
        let x = self.ens.state(p, k);
        for (o, f) in out.iter_mut().zip(&self.z_fits[k]) {
            *o = f.predict(x);
        }
    }

    /// `Y[.][k]` for every particle.
    pub fn y_step(&self, k: usize) -> Vec<f64> {
        par::map_chunks(self.particles(), |r| r.map(|p| self.y(p, k)).collect::<Vec<_>>()).concat()
    }

    /// `Z[.][k]`, `P x d` row-major.
    pub fn z_step(&self, k: usize) -> Vec<f64> {
        let d = self.dim();
        par::map_chunks(self.particles(), |r| {
            let mut out = vec![0.0; r.len() * d];
            for (i, p) in r.enumerate() {
                self.z_into(p, k, &mut out[i * d..(i + 1) * d]);
            }
            out
        })
        .concat()
    }

    /// The regressions of step `k` evaluated at an arbitrary state. At
    /// `k = n` this is the (truncated) terminal function, `NaN` where it is
    /// undefined, together with the last fitted `Z`.
    pub fn evaluate(&self, k: usize, x: &[f64]) -> (f64, Vec<f64>) {
        let n = self.n();
        let y = if k >= n {
            self.spec.terminal(x).unwrap_or(f64::NAN)
        } else {
            self.y_fits[k].predict(x)
        };
        let kz = k.min(n - 1);
        let z = self.z_fits[kz].iter().map(|f| f.predict(x)).collect();
        (y, z)
    }

    /// `Y0` as estimated at the start state.
    pub fn y0(&self) -> f64 {
        self.y(0, 0)
    }

    /// Standard error of the step-0 responses' mean, conditional on the
    /// fitted regressions. Regression noise from later steps is not in it;
    /// see [`replicate_y0`] for an unconditional estimate.
    pub fn y0_stderr(&self) -> f64 {
        self.y0_stderr
    }

    pub fn z0(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.dim()];
        self.z_into(0, 0, &mut z);
        z
    }

    pub fn step_stats(&self, k: usize) -> StepStats {
        let np = self.particles();
        let d = self.dim();
        let y = self.y_step(k);
        let z = self.z_step(k);
        let y_mean = par::sum(np, |p| y[p]) / np as f64;
        let y_var = par::sum(np, |p| (y[p] - y_mean).powi(2)) / np as f64;
        let z_mean = (0..d).map(|i| par::sum(np, |p| z[p * d + i]) / np as f64).collect();
        StepStats {
            k,
            t: self.ens.time(k),
            y_mean,
            y_std: y_var.sqrt(),
            z_mean,
        }
    }
}

/// `Y0` over independent ensembles, one per seed.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicatedY0 {
    pub seeds: Vec<u64>,
    pub y0: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation of a single run's `Y0`.
    pub run_std: f64,
    /// Standard error of `mean`.
    pub mean_stderr: f64,
}

/// Solves the same problem on one ensemble per seed. The spread of the
/// results is the honest Monte Carlo error of a single run, regression
/// noise included.
pub fn replicate_y0(
    spec: &ProblemSpec,
    n: usize,
    particles: usize,
    est: &EstimatorSpec,
    seeds: &[u64],
) -> Result<ReplicatedY0> {
    if seeds.len() < 2 {
        return Err(Error::param("seeds", seeds.len() as f64, "need at least two replications"));
    }
    let y0 = seeds
        .iter()
        .map(|&s| Ok(solve_backward(spec, euler_paths(spec, n, particles, s)?, est)?.y0()))
        .collect::<Result<Vec<f64>>>()?;
    let r = y0.len() as f64;
    let mean = y0.iter().sum::<f64>() / r;
    let run_std = (y0.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt();
    Ok(ReplicatedY0 {
        seeds: seeds.to_vec(),
        y0,
        mean,
        run_std,
        mean_stderr: run_std / r.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_coefficient, truncate_problem, CatalogProblem, Regime, RegularityParams, Slot};
    use crate::simulate::euler_paths;

    fn spec_1d(f: &str, g: &str, s: f64, kfy: f64) -> ProblemSpec {
        let params = RegularityParams {
            k_fy: kfy,
            ..RegularityParams::default()
        };
        ProblemSpec::new(
            1.0,
            vec![0.0],
            vec![parse_coefficient("0", Slot::Drift).unwrap()],
            vec![vec![parse_coefficient(&s.to_string(), Slot::Diffusion).unwrap()]],
            parse_coefficient(f, Slot::Driver).unwrap(),
            parse_coefficient(g, Slot::Terminal).unwrap(),
            params,
            Regime::B3Bounded,
        )
        .unwrap()
    }

    #[test]
    fn constant_terminal() {
        let spec = spec_1d("0", "2.5", 1.0, 0.0);
        let ens = euler_paths(&spec, 8, 20_000, 3).unwrap();
        for est in [EstimatorSpec::global(2), EstimatorSpec::partitioning(16)] {
            let sol = solve_backward(&spec, ens.clone(), &est).unwrap();
            for k in 0..=8 {
                let y = sol.y_step(k);
                assert!(y.iter().all(|v| (v - 2.5).abs() < 1e-12));
                let z = sol.z_step(k);
                assert!(z.iter().all(|v| v.abs() < 1e-10), "{est:?}");
            }
            let (y, z) = sol.evaluate(3, &[0.7]);
            assert!((y - 2.5).abs() < 1e-12 && z[0].abs() < 1e-10);
        }
    }

    #[test]
    fn brownian_terminal_in_span() {
        // E_k[X_{k+1}] = X_k is only reproduced up to the sample projection
        // of the increments onto the basis, which is O(sqrt(T / P))
        let spec = spec_1d("0", "x", 1.0, 0.0);
        let ens = euler_paths(&spec, 16, 50_000, 5).unwrap();
        let sol = solve_backward(&spec, ens, &EstimatorSpec::global(1)).unwrap();
        for k in 1..16 {
            for p in (0..50_000).step_by(997) {
                let x = sol.ensemble().state(p, k)[0];
                let tol = 6.0 * (1.0f64 / 50_000.0).sqrt() * (1.0 + x.abs());
                assert!((sol.y(p, k) - x).abs() < tol);
            }
            let stats = sol.step_stats(k);
            assert!((stats.z_mean[0] - 1.0).abs() < 2e-2, "{k}: {:?}", stats.z_mean);
        }
        assert!(sol.y0().abs() < 6.0 * sol.y0_stderr());
    }

    #[test]
    fn terminal_exactness_and_evaluate_identity() {
        let spec = CatalogProblem::quadratic_linear(1.0, 1.0).spec().unwrap();
        let tr = truncate_problem(&spec, 3.0, TruncationVariant::DeterministicSigma).unwrap();
        let ens = euler_paths(&spec, 8, 5_000, 9).unwrap();
        let sol = solve_backward(&tr, ens, &EstimatorSpec::partitioning(20)).unwrap();
        for p in 0..5_000 {
            let x = sol.ensemble().state(p, 8);
            assert_eq!(sol.y(p, 8), tr.terminal(x).unwrap());
        }
        for k in [0, 3, 7] {
            let y = sol.y_step(k);
            let z = sol.z_step(k);
            for p in (0..5_000).step_by(37) {
                let (ye, ze) = sol.evaluate(k, sol.ensemble().state(p, k));
                assert_eq!(ye.to_bits(), y[p].to_bits());
                assert_eq!(ze[0].to_bits(), z[p].to_bits());
            }
        }
        assert_eq!(sol.variant(), SchemeVariant::DeterministicSigma);
    }

    #[test]
    fn step_guard() {
        let spec = spec_1d("-y", "x", 1.0, 10.0);
        let ens = euler_paths(&spec, 8, 100, 1).unwrap();
        let err = solve_backward(&spec, ens, &EstimatorSpec::global(1)).unwrap_err();
        assert!(err.is_assumption_violation(), "{err}");
        let ens = euler_paths(&spec, 32, 100, 1).unwrap();
        assert!(solve_backward(&spec, ens, &EstimatorSpec::global(1)).is_ok());
    }

    #[test]
    fn driver_failure_is_located() {
        let spec = spec_1d("log(y)", "x", 1.0, 0.0);
        let ens = euler_paths(&spec, 4, 64, 1).unwrap();
        match solve_backward(&spec, ens, &EstimatorSpec::global(1)) {
            Err(Error::PathEvaluation { step: 3, .. }) | Err(Error::NonFiniteDriver { step: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mismatched_ensemble() {
        let spec = spec_1d("0", "x", 1.0, 0.0);
        let other = CatalogProblem::quadratic_linear(1.0, 1.0).spec().unwrap();
        let ens = euler_paths(&other.with_start(0.5, &[0.0]).unwrap(), 4, 64, 1).unwrap();
        assert!(matches!(
            solve_backward(&spec, ens, &EstimatorSpec::global(1)),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn replicated_spread_matches_plain_monte_carlo() {
        // f = 0, g = x: Y0 is the sample mean of X_T, whose spread is 1/sqrt(P)
        let spec = CatalogProblem::by_name("heat-linear").unwrap().spec().unwrap();
        let seeds: Vec<u64> = (1..=12).collect();
        let r = replicate_y0(&spec, 4, 2_000, &EstimatorSpec::global(1), &seeds).unwrap();
        let want = 1.0 / (2_000f64).sqrt();
        assert!(r.run_std > 0.5 * want && r.run_std < 1.6 * want, "{r:?}");
        assert!(r.mean.abs() < 4.0 * r.mean_stderr);
        assert!(replicate_y0(&spec, 4, 100, &EstimatorSpec::global(1), &[1]).is_err());
    }
}
