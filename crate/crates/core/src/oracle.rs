//! Reference solutions: closed forms, the Cole-Hopf formula for `|z|^2/2`,
//! and fine-grid surrogate runs.

use serde::Serialize;

use crate::condexp::EstimatorSpec;
use crate::error::{Error, Result};
use crate::model::{CatalogProblem, ProblemSpec};
use crate::par;
use crate::scheme::{solve_backward, DiscreteSolution};
use crate::simulate::{euler_paths, rng::Purpose, terminal_states};

/// Euler steps used inside [`cole_hopf_y`].
pub const COLE_HOPF_INNER_STEPS: usize = 256;

/// `log E[exp(sin W_1)]` from `scripts/golden_oracle.py`: 10^7 samples,
/// seed 20240611.
pub const GOLDEN_SINE_Y0: f64 = 0.206_617_763_505_815;
pub const GOLDEN_SINE_STDERR: f64 = 1.962e-4;
/// The same number by adaptive quadrature, for cross-checking the golden.
pub const QUADRATURE_SINE_Y0: f64 = 0.206_465_088_163_683_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    ColeHopfMc,
    ClosedForm,
    FineGrid,
}

impl ReferenceKind {
    pub fn name(self) -> &'static str {
        match self {
            ReferenceKind::ColeHopfMc => "cole-hopf-mc",
            ReferenceKind::ClosedForm => "closed-form",
            ReferenceKind::FineGrid => "fine-grid",
        }
    }
}

/// Where a reference number came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Provenance {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub n_ref: Option<usize>,
    pub p_ref: Option<usize>,
    pub estimator: Option<String>,
    pub note: String,
}

/// Solutions known in closed form, as functions of `(t, x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum Analytic {
    /// `y = theta.x + s^2 |theta|^2 (T - t) / 2`, `z = s theta`.
    QuadraticLinear { theta: Vec<f64>, s: f64, horizon: f64 },
    /// `y = theta.x`, `z = s theta`.
    HeatLinear { theta: Vec<f64>, s: f64 },
    Constant { c: f64, d: usize },
    /// `y = e^(-lambda tau) sin(omega (x + c s tau)) / omega`,
    /// `lambda = a + s^2 omega^2 / 2`, `tau = T - t`.
    LipschitzSine { omega: f64, a: f64, c: f64, s: f64, horizon: f64 },
}

impl Analytic {
    /// Closed form of a catalog entry, if it has one.
    pub fn of(entry: &CatalogProblem) -> Option<Analytic> {
        Some(match entry {
            CatalogProblem::QuadraticLinear { theta, s, horizon, .. } => Analytic::QuadraticLinear {
                theta: theta.clone(),
                s: *s,
                horizon: *horizon,
            },
            CatalogProblem::HeatLinear { theta, s, .. } => Analytic::HeatLinear {
                theta: theta.clone(),
                s: *s,
            },
            CatalogProblem::ConstantTerminal { c, .. } => Analytic::Constant { c: *c, d: 1 },
            CatalogProblem::LipschitzSine {
                omega, a, c, s, horizon, ..
            } => Analytic::LipschitzSine {
                omega: *omega,
                a: *a,
                c: *c,
                s: *s,
                horizon: *horizon,
            },
            _ => return None,
        })
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Analytic::QuadraticLinear { theta, s, horizon } => closed_form_linear(theta, *s, *horizon, x, t),
            Analytic::HeatLinear { theta, s } => {
                let y = theta.iter().zip(x).map(|(a, b)| a * b).sum();
                (y, theta.iter().map(|v| s * v).collect())
            }
            Analytic::Constant { c, d } => (*c, vec![0.0; *d]),
            Analytic::LipschitzSine {
                omega,
                a,
                c,
                s,
                horizon,
            } => {
                let tau = horizon - t;
                let lambda = a + s * s * omega * omega / 2.0;
                let decay = (-lambda * tau).exp();
                let phase = omega * (x[0] + c * s * tau);
                (decay * phase.sin() / omega, vec![s * decay * phase.cos()])
            }
        }
    }
}

/// Solution of the quadratic problem with linear terminal `theta.x`,
/// `b = 0`, `sigma = s I`.
pub fn closed_form_linear(theta: &[f64], s: f64, horizon: f64, x: &[f64], t: f64) -> (f64, Vec<f64>) {
    let dot: f64 = theta.iter().zip(x).map(|(a, b)| a * b).sum();
    let sq: f64 = theta.iter().map(|a| a * a).sum();
    (dot + s * s * sq * (horizon - t) / 2.0, theta.iter().map(|a| s * a).collect())
}

#[derive(Debug, Clone)]
enum Evaluator {
    None,
    Analytic(Analytic),
    FineGrid(Box<DiscreteSolution>),
}

/// A reference `(Y, Z)` with its own error bar.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub kind: ReferenceKind,
    pub y0: f64,
    pub y0_stderr: f64,
    pub provenance: Provenance,
    eval: Evaluator,
}

impl ReferenceSolution {
    /// Closed-form reference for a catalog-tagged problem.
    pub fn closed_form(spec: &ProblemSpec) -> Option<Self> {
        let form = Analytic::of(spec.catalog()?)?;
        let (y0, _) = form.eval(spec.t0(), spec.x0());
        Some(ReferenceSolution {
            kind: ReferenceKind::ClosedForm,
            y0,
            y0_stderr: 0.0,
            provenance: Provenance {
                note: format!("closed form of catalog entry {}", spec.catalog()?.name()),
                ..Provenance::default()
            },
            eval: Evaluator::Analytic(form),
        })
    }

    /// Wraps an existing solution as a reference (for instance a run at a
    /// larger truncation radius on the same ensemble).
    pub fn from_solution(sol: DiscreteSolution, note: impl Into<String>) -> Self {
        ReferenceSolution {
            kind: ReferenceKind::FineGrid,
            y0: sol.y0(),
            y0_stderr: sol.y0_stderr(),
            provenance: Provenance {
                seed: Some(sol.ensemble().seed()),
                n_ref: Some(sol.n()),
                p_ref: Some(sol.particles()),
                estimator: Some(sol.estimator().label()),
                note: note.into(),
                ..Provenance::default()
            },
            eval: Evaluator::FineGrid(Box::new(sol)),
        }
    }

    /// `(y, z)` at `(t, x)`, or `None` when the reference only knows `Y0`.
    /// Fine-grid references use the regressions of the step containing `t`.
    pub fn eval(&self, t: f64, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        match &self.eval {
            Evaluator::None => None,
            Evaluator::Analytic(a) => Some(a.eval(t, x)),
            Evaluator::FineGrid(sol) => {
                let ens = sol.ensemble();
                let pos = (t - ens.t0()) / ens.h();
                let k = ((pos + 1e-9).floor().max(0.0) as usize).min(sol.n());
                Some(sol.evaluate(k, x))
            }
        }
    }

    pub fn is_pointwise(&self) -> bool {
        !matches!(self.eval, Evaluator::None)
    }

    /// The wrapped fine-grid solution, if any.
    pub fn solution(&self) -> Option<&DiscreteSolution> {
        match &self.eval {
            Evaluator::FineGrid(s) => Some(s),
            _ => None,
        }
    }
}

/// Monte Carlo estimates behind [`cole_hopf_y`].
#[derive(Debug, Clone, Serialize)]
pub struct ColeHopfEstimate {
    pub y: f64,
    pub stderr: f64,
    /// Plain sample mean of `g(X_T)` and its standard error.
    pub g_mean: f64,
    pub g_stderr: f64,
    pub samples: usize,
    pub inner_steps: usize,
    pub seed: u64,
}

/// `log E[exp g(X_T) | X_t = x]` by Monte Carlo, with a delta-method
/// standard error. Only valid for the driver `|z|^2/2`.
pub fn cole_hopf_y(spec: &ProblemSpec, t: f64, x: &[f64], samples: usize, seed: u64) -> Result<(f64, f64)> {
    let e = cole_hopf(spec, t, x, samples, seed, COLE_HOPF_INNER_STEPS)?;
    Ok((e.y, e.stderr))
}

pub fn cole_hopf(
    spec: &ProblemSpec,
    t: f64,
    x: &[f64],
    samples: usize,
    seed: u64,
    inner_steps: usize,
) -> Result<ColeHopfEstimate> {
    if !spec.is_pure_quadratic() {
        return Err(Error::Assumption(
            "the Cole-Hopf formula needs the driver |z|^2/2".into(),
        ));
    }
    if samples < 100 {
        return Err(Error::param("samples", samples as f64, "need at least 100 samples"));
    }
    let start = spec.with_start(t, x)?;
    let d = start.dim();
    let xt = terminal_states(&start, inner_steps, samples, seed, Purpose::ColeHopf)?;
    let g: Vec<f64> = par::try_map_chunks(samples, |r| {
        r.map(|p| start.terminal(&xt[p * d..(p + 1) * d])).collect::<Result<Vec<f64>>>()
    })?
    .concat();
    let gmax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !gmax.is_finite() || g.iter().any(|v| v.is_nan()) {
        return Err(Error::Overflow(format!(
            "terminal values reach {gmax}; rescale g so exp(g) stays representable"
        )));
    }
    let n = samples as f64;
    // shifted by the maximum so exp never overflows
    let m1 = par::sum(samples, |p| (g[p] - gmax).exp()) / n;
    let m2 = par::sum(samples, |p| (2.0 * (g[p] - gmax)).exp()) / n;
    let var = (m2 - m1 * m1).max(0.0) * n / (n - 1.0);
    let g_mean = par::sum(samples, |p| g[p]) / n;
    let g_var = par::sum(samples, |p| (g[p] - g_mean).powi(2)) / (n - 1.0);
    Ok(ColeHopfEstimate {
        y: gmax + m1.ln(),
        stderr: var.sqrt() / (m1 * n.sqrt()),
        g_mean,
        g_stderr: (g_var / n).sqrt(),
        samples,
        inner_steps,
        seed,
    })
}

/// Cole-Hopf value at the problem's start, wrapped as a reference.
pub fn cole_hopf_reference(spec: &ProblemSpec, samples: usize, seed: u64) -> Result<ReferenceSolution> {
    let e = cole_hopf(spec, spec.t0(), spec.x0(), samples, seed, COLE_HOPF_INNER_STEPS)?;
    Ok(ReferenceSolution {
        kind: ReferenceKind::ColeHopfMc,
        y0: e.y,
        y0_stderr: e.stderr,
        provenance: Provenance {
            samples: Some(samples),
            seed: Some(seed),
            n_ref: Some(e.inner_steps),
            note: "log of the Monte Carlo mean of exp(g(X_T))".into(),
            ..Provenance::default()
        },
        eval: Evaluator::None,
    })
}

/// Surrogate reference: the scheme itself on a finer grid and more particles.
pub fn fine_grid_reference(
    truncated: &ProblemSpec,
    n_ref: usize,
    p_ref: usize,
    est: &EstimatorSpec,
    seed: u64,
) -> Result<ReferenceSolution> {
    let ens = euler_paths(truncated, n_ref, p_ref, seed)?;
    let sol = solve_backward(truncated, ens, est)?;
    Ok(ReferenceSolution::from_solution(
        sol,
        "fine-grid surrogate run of the scheme; its bias is not controlled",
    ))
}

/// The best available reference for a problem: closed form when the
/// catalog knows one, otherwise Cole-Hopf for `|z|^2/2`, otherwise `None`.
pub fn default_reference(spec: &ProblemSpec, samples: usize, seed: u64) -> Result<Option<ReferenceSolution>> {
    if let Some(r) = ReferenceSolution::closed_form(spec) {
        return Ok(Some(r));
    }
    if spec.is_pure_quadratic() {
        return cole_hopf_reference(spec, samples, seed).map(Some);
    }
    Ok(None)
}
