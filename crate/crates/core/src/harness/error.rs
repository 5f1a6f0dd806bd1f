//! Mean-square errors of a discrete solution against a reference.
//!
//! ```text
//! y_error = max_k mean_p |Y[p][k] - Y_ref(t_k, X[p][k])|^2
//! z_error = sum_k int_{t_k}^{t_{k+1}} mean_p |Z[p][k] - Z_ref(s, X[p](s))|^2 ds
//! ```
//!
//! `X[p](s)` between grid points is the continuous Euler interpolation,
//! sampled from the Brownian bridge pinned at the stored increment. The time
//! integral uses three-point Gauss-Legendre for closed forms and the fine
//! grid's own steps for fine-grid references.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::ReferenceSolution;
use crate::par;
use crate::scheme::DiscreteSolution;
use crate::simulate::rng::{NormalStream, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub n: usize,
    pub h: f64,
    #[serde(rename = "P")]
    pub particles: usize,
    /// Truncation radius; empty when untruncated.
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub estimator: String,
    pub seed: u64,
    pub y_error: f64,
    pub z_error: f64,
    pub total: f64,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    pub variant: String,
    pub reference: String,
    pub reference_stderr: f64,
}

const GL_NODES: [f64; 3] = [0.112_701_665_379_258_3, 0.5, 0.887_298_334_620_741_7];
const GL_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

enum Quadrature<'a> {
    Pointwise(&'a ReferenceSolution),
    Fine(&'a DiscreteSolution, usize),
}

/// Errors of `sol` measured against `reference`.
///
/// A reference that only knows `Y0` (Cole-Hopf) gives `y_error =
/// |Y0 - Y0_ref|^2` and `z_error = 0`.
pub fn error_against(sol: &DiscreteSolution, reference: &ReferenceSolution) -> Result<ErrorReport> {
    let ens = sol.ensemble();
    let (n, np, d, h) = (sol.n(), sol.particles(), sol.dim(), sol.h());
    let mut report = ErrorReport {
        n,
        h,
        particles: np,
        m: sol.truncation().map(|t| t.m),
        estimator: sol.estimator().label(),
        seed: ens.seed(),
        y_error: 0.0,
        z_error: 0.0,
        total: 0.0,
        slope: None,
        intercept: None,
        r2: None,
        variant: sol.variant().name().to_string(),
        reference: reference.kind.name().to_string(),
        reference_stderr: reference.y0_stderr,
    };
    if !reference.is_pointwise() {
        report.y_error = (sol.y0() - reference.y0).powi(2);
        report.total = report.y_error;
        return Ok(report);
    }

    let quad = match reference.solution() {
        Some(fine) => {
            let fe = fine.ensemble();
            let scale = sol.spec().horizon().abs().max(1.0);
            let same_span = (fe.t0() - ens.t0()).abs() <= 1e-12 * scale
                && (fe.time(fe.n()) - ens.time(n)).abs() <= 1e-9 * scale;
            if !same_span || fine.dim() != d || fine.n() % n != 0 {
                return Err(Error::Grid(format!(
                    "reference grid with {} steps on [{}, {}] does not refine {} steps on [{}, {}]",
                    fine.n(),
                    fe.t0(),
                    fe.time(fe.n()),
                    n,
                    ens.t0(),
                    ens.time(n)
                )));
            }
            Quadrature::Fine(fine, fine.n() / n)
        }
        None => Quadrature::Pointwise(reference),
    };

    let mut y_error = 0.0f64;
    for k in 0..=n {
        let t = ens.time(k);
        let sum = par::sum(np, |p| {
            let x = ens.state(p, k);
            let yr = match &quad {
                Quadrature::Pointwise(r) => r.eval(t, x).map(|v| v.0).unwrap_or(f64::NAN),
                Quadrature::Fine(f, m) => f.evaluate(k * m, x).0,
            };
            (sol.y(p, k) - yr).powi(2)
        });
        y_error = y_error.max(sum / np as f64);
    }

    let (nodes, weights): (Vec<f64>, Vec<f64>) = match &quad {
        Quadrature::Pointwise(_) => (GL_NODES.to_vec(), GL_WEIGHTS.to_vec()),
        Quadrature::Fine(_, m) => ((0..*m).map(|j| j as f64 / *m as f64).collect(), vec![1.0 / *m as f64; *m]),
    };
    let bridge = NormalStream::new(ens.seed(), Purpose::Bridge);
    let spec = sol.spec();
    let mut z_error = 0.0;
    for k in 0..n {
        let t = ens.time(k);
        let parts = par::map_chunks(np, |r| {
            let mut acc = 0.0;
            let mut dw = vec![0.0; d];
            let mut xi = vec![0.0; nodes.len() * d];
            let mut b = vec![0.0; d];
            let mut s = vec![0.0; d * d];
            let mut z = vec![0.0; d];
            let mut xs = vec![0.0; d];
            let mut w = vec![0.0; d];
            for p in r {
                let x = ens.state(p, k);
                ens.increment_into(p, k, &mut dw);
                bridge.fill(k as u64, p as u64, &mut xi);
                sol.z_into(p, k, &mut z);
                if spec.drift_into(t, x, &mut b).is_err() || spec.sigma_into(t, x, &mut s).is_err() {
                    return f64::NAN;
                }
                for (j, (&lam, &wt)) in nodes.iter().zip(&weights).enumerate() {
                    let spread = (lam * (1.0 - lam) * h).sqrt();
                    for i in 0..d {
                        w[i] = lam * dw[i] + spread * xi[j * d + i];
                    }
                    for i in 0..d {
                        let noise: f64 = s[i * d..(i + 1) * d].iter().zip(&w).map(|(a, v)| a * v).sum();
                        xs[i] = x[i] + b[i] * (lam * h) + noise;
                    }
                    let zr = match &quad {
                        Quadrature::Pointwise(r) => r.eval(t + lam * h, &xs).map(|v| v.1),
                        Quadrature::Fine(f, m) => Some(f.evaluate(k * m + j, &xs).1),
                    };
                    let Some(zr) = zr else { return f64::NAN };
                    let e2: f64 = z.iter().zip(&zr).map(|(a, c)| (a - c).powi(2)).sum();
                    acc += wt * e2;
                }
            }
            acc
        });
        z_error += h * parts.into_iter().sum::<f64>() / np as f64;
    }

    if !(y_error.is_finite() && z_error.is_finite()) {
        return Err(Error::Domain {
            op: "error_against",
            detail: "reference or forward coefficients not finite along the ensemble".into(),
        });
    }
    report.y_error = y_error;
    report.z_error = z_error;
    report.total = y_error + z_error;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condexp::EstimatorSpec;
    use crate::model::CatalogProblem;
    use crate::scheme::solve_backward;
    use crate::simulate::euler_paths;

    #[test]
    fn self_comparison_is_zero() {
        let spec = CatalogProblem::by_name("quadratic-sine").unwrap().spec().unwrap();
        let ens = euler_paths(&spec, 8, 4_000, 2).unwrap();
        for est in [EstimatorSpec::global(3), EstimatorSpec::partitioning(16)] {
            let sol = solve_backward(&spec, ens.clone(), &est).unwrap();
            let r = ReferenceSolution::from_solution(sol.clone(), "self");
            let rep = error_against(&sol, &r).unwrap();
            assert_eq!((rep.y_error, rep.z_error, rep.total), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn constant_problem_against_closed_form() {
        let spec = CatalogProblem::by_name("constant-terminal").unwrap().spec().unwrap();
        let ens = euler_paths(&spec, 8, 4_000, 2).unwrap();
        let sol = solve_backward(&spec, ens, &EstimatorSpec::global(2)).unwrap();
        let r = ReferenceSolution::closed_form(&spec).unwrap();
        let rep = error_against(&sol, &r).unwrap();
        assert!(rep.y_error < 1e-24 && rep.z_error < 1e-20, "{rep:?}");
        assert_eq!(rep.reference, "closed-form");
    }

    #[test]
    fn bridge_quadrature_matches_z_regularity() {
        // heat-linear has Z = s theta exactly, so only the estimator noise
        // remains and it is far below h
        let spec = CatalogProblem::by_name("heat-linear").unwrap().spec().unwrap();
        let ens = euler_paths(&spec, 16, 20_000, 5).unwrap();
        let sol = solve_backward(&spec, ens, &EstimatorSpec::global(1)).unwrap();
        let rep = error_against(&sol, &ReferenceSolution::closed_form(&spec).unwrap()).unwrap();
        assert!(rep.z_error < 1e-3, "{rep:?}");
        assert!(rep.y_error < 1e-3, "{rep:?}");
    }

    #[test]
    fn grid_mismatch() {
        let spec = CatalogProblem::by_name("quadratic-sine").unwrap().spec().unwrap();
        let a = solve_backward(&spec, euler_paths(&spec, 8, 500, 1).unwrap(), &EstimatorSpec::global(2)).unwrap();
        let b = solve_backward(&spec, euler_paths(&spec, 12, 500, 1).unwrap(), &EstimatorSpec::global(2)).unwrap();
        let r = ReferenceSolution::from_solution(b, "coarse");
        assert!(matches!(error_against(&a, &r), Err(Error::Grid(_))));
    }
}
