//! Named problems whose coefficient trees are built directly, without the
//! parser. Each entry also declares its regularity constants and, where one
//! exists, is recognised by the oracle module as having a closed form.

use serde::{Deserialize, Serialize};

use super::expr::{CoefficientExpr, Func, Node, Slot};
use super::params::{Regime, RegularityParams};
use super::problem::ProblemSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CatalogProblem {
    /// `f = |z|^2/2`, `g = theta . x`, `b = 0`, `sigma = s I`.
    QuadraticLinear {
        theta: Vec<f64>,
        s: f64,
        horizon: f64,
        x0: Vec<f64>,
    },
    /// `f = |z|^2/2`, `g = sin(x0)`, `b = 0`, `sigma = s`.
    QuadraticSine { s: f64, horizon: f64, x0: f64 },
    /// `f = -a y + c z0`, `g = sin(omega x0)/omega`, `b = 0`, `sigma = s`.
    LipschitzSine {
        omega: f64,
        a: f64,
        c: f64,
        s: f64,
        horizon: f64,
        x0: f64,
    },
    /// `f = 0`, `g = c`.
    ConstantTerminal { c: f64, horizon: f64, x0: f64 },
    /// `f = 0`, `g = theta . x`, `sigma = s I`.
    HeatLinear {
        theta: Vec<f64>,
        s: f64,
        horizon: f64,
        x0: Vec<f64>,
    },
    /// `f = gamma/(l+1) |z|^(l+1)`, `g = amp sin(x0)`.
    Superquadratic {
        l: f64,
        gamma: f64,
        amp: f64,
        s: f64,
        horizon: f64,
        x0: f64,
    },
    /// `f = |z|^2/2`, `g = sin(x0)`, `sigma = s (1 + x0^2)^(kappa/2)`.
    RandomSigmaSine {
        s: f64,
        kappa: f64,
        r: f64,
        horizon: f64,
        x0: f64,
    },
}

fn abs_z_pow(p: f64) -> Node {
    Node::pow(Node::call(Func::Abs, vec![Node::z()]), Node::num(p))
}

fn linear_form(theta: &[f64]) -> Node {
    theta
        .iter()
        .enumerate()
        .map(|(i, th)| Node::mul(Node::num(*th), Node::xi(i)))
        .reduce(Node::add)
        .unwrap_or(Node::num(0.0))
}

fn scaled_identity(d: usize, s: f64) -> Vec<Vec<CoefficientExpr>> {
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| CoefficientExpr::constant(if i == j { s } else { 0.0 }, Slot::Diffusion))
                .collect()
        })
        .collect()
}

fn zero_drift(d: usize) -> Vec<CoefficientExpr> {
    (0..d).map(|_| CoefficientExpr::constant(0.0, Slot::Drift)).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

impl CatalogProblem {
    /// One-dimensional linear-terminal quadratic problem on `[0, 1]` from 0.
    pub fn quadratic_linear(theta: f64, s: f64) -> Self {
        CatalogProblem::QuadraticLinear {
            theta: vec![theta],
            s,
            horizon: 1.0,
            x0: vec![0.0],
        }
    }

    /// Catalog entry by name with default parameters.
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "quadratic-linear" => Self::quadratic_linear(1.0, 1.0),
            "quadratic-sine" => CatalogProblem::QuadraticSine {
                s: 1.0,
                horizon: 1.0,
                x0: 0.0,
            },
            "lipschitz-sine" => CatalogProblem::LipschitzSine {
                omega: 1.0,
                a: 0.5,
                c: 0.5,
                s: 1.0,
                horizon: 1.0,
                x0: 0.0,
            },
            "constant-terminal" => CatalogProblem::ConstantTerminal {
                c: 1.0,
                horizon: 1.0,
                x0: 0.0,
            },
            "heat-linear" => CatalogProblem::HeatLinear {
                theta: vec![1.0],
                s: 1.0,
                horizon: 1.0,
                x0: vec![0.0],
            },
            "superquadratic" => CatalogProblem::Superquadratic {
                l: 2.0,
                gamma: 1.0,
                amp: 0.2,
                s: 1.0,
                horizon: 1.0,
                x0: 0.0,
            },
            "random-sigma-sine" => CatalogProblem::RandomSigmaSine {
                s: 1.0,
                kappa: 0.25,
                r: 0.25,
                horizon: 1.0,
                x0: 0.0,
            },
            _ => return Err(Error::Problem(format!("unknown catalog problem `{name}`"))),
        })
    }

    pub const NAMES: [&'static str; 7] = [
        "quadratic-linear",
        "quadratic-sine",
        "lipschitz-sine",
        "constant-terminal",
        "heat-linear",
        "superquadratic",
        "random-sigma-sine",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CatalogProblem::QuadraticLinear { .. } => "quadratic-linear",
            CatalogProblem::QuadraticSine { .. } => "quadratic-sine",
            CatalogProblem::LipschitzSine { .. } => "lipschitz-sine",
            CatalogProblem::ConstantTerminal { .. } => "constant-terminal",
            CatalogProblem::HeatLinear { .. } => "heat-linear",
            CatalogProblem::Superquadratic { .. } => "superquadratic",
            CatalogProblem::RandomSigmaSine { .. } => "random-sigma-sine",
        }
    }

    pub fn is_pure_quadratic(&self) -> bool {
        matches!(
            self,
            CatalogProblem::QuadraticLinear { .. }
                | CatalogProblem::QuadraticSine { .. }
                | CatalogProblem::RandomSigmaSine { .. }
        )
    }

    /// Builds the problem with its declared constants.
    pub fn spec(&self) -> Result<ProblemSpec> {
        let quadratic = || CoefficientExpr::from_node(Node::div(abs_z_pow(2.0), Node::num(2.0)), Slot::Driver);
        let sin_x0 = || CoefficientExpr::from_node(Node::call(Func::Sin, vec![Node::xi(0)]), Slot::Terminal);
        let spec = match self {
            CatalogProblem::QuadraticLinear { theta, s, horizon, x0 }
            | CatalogProblem::HeatLinear { theta, s, horizon, x0 } => {
                let d = theta.len();
                if x0.len() != d {
                    return Err(Error::Problem("theta and x0 must have equal length".into()));
                }
                let driver = if matches!(self, CatalogProblem::QuadraticLinear { .. }) {
                    quadratic()?
                } else {
                    CoefficientExpr::constant(0.0, Slot::Driver)
                };
                let params = RegularityParams {
                    k_g: norm(theta),
                    sigma_sup: s.abs(),
                    m_sigma: s.abs(),
                    horizon: *horizon,
                    ..RegularityParams::default()
                };
                ProblemSpec::new(
                    *horizon,
                    x0.clone(),
                    zero_drift(d),
                    scaled_identity(d, *s),
                    driver,
                    CoefficientExpr::from_node(linear_form(theta), Slot::Terminal)?,
                    params,
                    Regime::B2Subcritical,
                )?
            }
            CatalogProblem::QuadraticSine { s, horizon, x0 } => {
                let params = RegularityParams {
                    k_g: 1.0,
                    sigma_sup: s.abs(),
                    m_sigma: s.abs(),
                    m_g: 1.0,
                    horizon: *horizon,
                    ..RegularityParams::default()
                };
                ProblemSpec::new(
                    *horizon,
                    vec![*x0],
                    zero_drift(1),
                    scaled_identity(1, *s),
                    quadratic()?,
                    sin_x0()?,
                    params,
                    Regime::B2Subcritical,
                )?
            }
            CatalogProblem::LipschitzSine {
                omega,
                a,
                c,
                s,
                horizon,
                x0,
            } => {
                if *omega == 0.0 {
                    return Err(Error::param("omega", *omega, "frequency must be nonzero"));
                }
                let driver = Node::add(
                    Node::mul(Node::num(-a), Node::y()),
                    Node::mul(Node::num(*c), Node::zi(0)),
                );
                let terminal = Node::div(
                    Node::call(Func::Sin, vec![Node::mul(Node::num(*omega), Node::xi(0))]),
                    Node::num(*omega),
                );
                let params = RegularityParams {
                    k_g: 1.0,
                    k_fy: a.abs(),
                    k_fz: c.abs(),
                    sigma_sup: s.abs(),
                    m_sigma: s.abs(),
                    m_g: 1.0 / omega.abs(),
                    horizon: *horizon,
                    ..RegularityParams::default()
                };
                ProblemSpec::new(
                    *horizon,
                    vec![*x0],
                    zero_drift(1),
                    scaled_identity(1, *s),
                    CoefficientExpr::from_node(driver, Slot::Driver)?,
                    CoefficientExpr::from_node(terminal, Slot::Terminal)?,
                    params,
                    Regime::B2Subcritical,
                )?
            }
            CatalogProblem::ConstantTerminal { c, horizon, x0 } => {
                let params = RegularityParams {
                    m_g: c.abs(),
                    horizon: *horizon,
                    m_sigma: 1.0,
                    ..RegularityParams::default()
                };
                ProblemSpec::new(
                    *horizon,
                    vec![*x0],
                    zero_drift(1),
                    scaled_identity(1, 1.0),
                    CoefficientExpr::constant(0.0, Slot::Driver),
                    CoefficientExpr::constant(*c, Slot::Terminal),
                    params,
                    Regime::B2Subcritical,
                )?
            }
            CatalogProblem::Superquadratic {
                l,
                gamma,
                amp,
                s,
                horizon,
                x0,
            } => {
                let driver = Node::mul(Node::num(gamma / (l + 1.0)), abs_z_pow(l + 1.0));
                let terminal = Node::mul(Node::num(*amp), Node::call(Func::Sin, vec![Node::xi(0)]));
                let params = RegularityParams {
                    l: *l,
                    gamma: *gamma,
                    k_g: amp.abs(),
                    sigma_sup: s.abs(),
                    m_sigma: s.abs(),
                    m_g: amp.abs(),
                    horizon: *horizon,
                    ..RegularityParams::default()
                };
                ProblemSpec::new(
                    *horizon,
                    vec![*x0],
                    zero_drift(1),
                    scaled_identity(1, *s),
                    CoefficientExpr::from_node(driver, Slot::Driver)?,
                    CoefficientExpr::from_node(terminal, Slot::Terminal)?,
                    params,
                    Regime::B1Critical,
                )?
            }
            CatalogProblem::RandomSigmaSine {
                s,
                kappa,
                r,
                horizon,
                x0,
            } => {
                let sigma = Node::mul(
                    Node::num(*s),
                    Node::pow(
                        Node::add(Node::num(1.0), Node::pow(Node::xi(0), Node::num(2.0))),
                        Node::num(kappa / 2.0),
                    ),
                );
                let params = RegularityParams {
                    r: *r,
                    kappa: *kappa,
                    k_g: 1.0,
                    m_g: 1.0,
                    m_f: 0.5,
                    m_sigma: s.abs(),
                    k_sigma: s.abs() * kappa,
                    sigma_sup: s.abs(),
                    horizon: *horizon,
                    ..RegularityParams::default()
                };
                ProblemSpec::new(
                    *horizon,
                    vec![*x0],
                    zero_drift(1),
                    vec![vec![CoefficientExpr::from_node(sigma, Slot::Diffusion)?]],
                    quadratic()?,
                    sin_x0()?,
                    params,
                    Regime::B3Bounded,
                )?
            }
        };
        Ok(spec.with_catalog(self.clone()))
    }
}
