//! Feynman-Kac evaluation of the semilinear PDE attached to a problem.

use serde::{Deserialize, Serialize};

use crate::condexp::EstimatorSpec;
use crate::error::{Error, Result};
use crate::model::{truncate_problem, ProblemSpec, TruncationVariant};
use crate::scheme::solve_backward;
use crate::simulate::euler_paths;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FkStrategy {
    /// A fresh scheme run started at every grid point.
    PerPoint,
    /// One run from the problem's start; grid points read its regressions.
    SingleRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkConfig {
    pub t_grid: Vec<f64>,
    pub x_grid: Vec<Vec<f64>>,
    pub n: usize,
    #[serde(rename = "P")]
    pub particles: usize,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub estimator: EstimatorSpec,
    pub seed: u64,
    pub strategy: FkStrategy,
    pub variant: TruncationVariant,
}

#[derive(Debug, Clone, Serialize)]
pub struct FkField {
    pub t_grid: Vec<f64>,
    pub x_grid: Vec<Vec<f64>>,
    /// `u[j][i] = u(t_j, x_i)`.
    pub u: Vec<Vec<f64>>,
    /// Standard error of each entry, 0 where exact or unavailable.
    pub stderr: Vec<Vec<f64>>,
    /// `max |u| / (1 + |x|^(1 + 1/l))` over the grid.
    pub growth_ratio: f64,
    /// Largest `|u(t, x_i+1) - u(t, x_i)| / |x_i+1 - x_i|` along the grid.
    pub lipschitz_ratio: f64,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `u(t, x) = Y_t^{t,x}` on a grid.
pub fn feynman_kac_grid(spec: &ProblemSpec, cfg: &FkConfig) -> Result<FkField> {
    if cfg.t_grid.is_empty() || cfg.x_grid.is_empty() {
        return Err(Error::Problem("grids must be nonempty".into()));
    }
    let d = spec.dim();
    if cfg.x_grid.iter().any(|x| x.len() != d) {
        return Err(Error::Problem(format!("grid points must have dimension {d}")));
    }
    let (t0, horizon) = (spec.t0(), spec.horizon());
    if cfg.t_grid.iter().any(|t| !(*t >= t0 && *t <= horizon)) {
        return Err(Error::Problem(format!("grid times must lie in [{t0}, {horizon}]")));
    }
    let tspec = match cfg.m {
        Some(m) => truncate_problem(spec, m, cfg.variant)?,
        None => spec.clone(),
    };
    let at_horizon = |t: f64| (horizon - t).abs() <= 1e-12 * horizon.abs().max(1.0);

    let mut u = vec![vec![0.0; cfg.x_grid.len()]; cfg.t_grid.len()];
    let mut se = u.clone();
    match cfg.strategy {
        FkStrategy::PerPoint => {
            for (j, &t) in cfg.t_grid.iter().enumerate() {
                for (i, x) in cfg.x_grid.iter().enumerate() {
                    if at_horizon(t) {
                        u[j][i] = tspec.terminal(x)?;
                        continue;
                    }
                    let steps = ((cfg.n as f64 * (horizon - t) / (horizon - t0)).round() as usize).max(1);
                    let start = tspec.with_start(t, x)?;
                    let ens = euler_paths(&start, steps, cfg.particles, cfg.seed)?;
                    let sol = solve_backward(&start, ens, &cfg.estimator)?;
                    u[j][i] = sol.y0();
                    se[j][i] = sol.y0_stderr();
                }
            }
        }
        FkStrategy::SingleRun => {
            let ens = euler_paths(&tspec, cfg.n, cfg.particles, cfg.seed)?;
            let sol = solve_backward(&tspec, ens, &cfg.estimator)?;
            let h = sol.h();
            for (j, &t) in cfg.t_grid.iter().enumerate() {
                let k = if at_horizon(t) {
                    cfg.n
                } else {
                    (((t - t0) / h).round() as usize).min(cfg.n)
                };
                for (i, x) in cfg.x_grid.iter().enumerate() {
                    u[j][i] = sol.evaluate(k, x).0;
                }
            }
        }
    }

    let inv_l = 1.0 / spec.params().l;
    let mut growth = 0.0f64;
    let mut lip = 0.0f64;
    for row in &u {
        for (i, x) in cfg.x_grid.iter().enumerate() {
            growth = growth.max(row[i].abs() / (1.0 + norm(x).powf(1.0 + inv_l)));
            if i + 1 < cfg.x_grid.len() {
                let dx: Vec<f64> = x.iter().zip(&cfg.x_grid[i + 1]).map(|(a, b)| a - b).collect();
                let gap = norm(&dx);
                if gap > 0.0 {
                    lip = lip.max((row[i + 1] - row[i]).abs() / gap);
                }
            }
        }
    }
    Ok(FkField {
        t_grid: cfg.t_grid.clone(),
        x_grid: cfg.x_grid.clone(),
        u,
        stderr: se,
        growth_ratio: growth,
        lipschitz_ratio: lip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CatalogProblem;
    use crate::oracle::closed_form_linear;

    fn cfg(strategy: FkStrategy) -> FkConfig {
        FkConfig {
            t_grid: vec![0.0, 0.5, 1.0],
            x_grid: vec![vec![-1.0], vec![0.0], vec![1.0]],
            n: 16,
            particles: 20_000,
            m: Some(10.0),
            estimator: EstimatorSpec::global(2),
            seed: 11,
            strategy,
            variant: TruncationVariant::DeterministicSigma,
        }
    }

    #[test]
    fn quadratic_linear_field() {
        let spec = CatalogProblem::quadratic_linear(1.0, 1.0).spec().unwrap();
        let f = feynman_kac_grid(&spec, &cfg(FkStrategy::PerPoint)).unwrap();
        for (j, t) in f.t_grid.iter().enumerate() {
            for (i, x) in f.x_grid.iter().enumerate() {
                let want = closed_form_linear(&[1.0], 1.0, 1.0, x, *t).0;
                if *t == 1.0 {
                    assert_eq!(f.u[j][i], x[0]);
                } else {
                    assert!((f.u[j][i] - want).abs() < 0.03, "u({t}, {x:?}) = {}", f.u[j][i]);
                }
            }
        }
        assert!(f.growth_ratio.is_finite() && f.growth_ratio < 1.0);
        assert!((f.lipschitz_ratio - 1.0).abs() < 0.05);
    }

    #[test]
    fn single_run_strategy() {
        let spec = CatalogProblem::quadratic_linear(1.0, 1.0).spec().unwrap();
        let f = feynman_kac_grid(&spec, &cfg(FkStrategy::SingleRun)).unwrap();
        assert!((f.u[1][2] - 1.25).abs() < 0.05, "{:?}", f.u);
        assert_eq!(f.u[2], vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_grids() {
        let spec = CatalogProblem::quadratic_linear(1.0, 1.0).spec().unwrap();
        let mut c = cfg(FkStrategy::PerPoint);
        c.t_grid = vec![1.5];
        assert!(feynman_kac_grid(&spec, &c).is_err());
        c.t_grid = vec![];
        assert!(feynman_kac_grid(&spec, &c).is_err());
    }
}
