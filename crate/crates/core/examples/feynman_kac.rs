//! The PDE solution u(t, x) = Y_t^{t,x} on a grid, compared with the closed
//! form u(t, x) = x + (T - t)/2 of the linear-terminal quadratic problem.
//!
//! ```bash
//! cargo run --release --example feynman_kac
//! ```

use bsde_lab::condexp::EstimatorSpec;
use bsde_lab::harness::{feynman_kac_grid, FkConfig, FkStrategy};
use bsde_lab::model::{CatalogProblem, TruncationVariant};

fn main() -> bsde_lab::Result<()> {
    let spec = CatalogProblem::by_name("quadratic-linear")?.spec()?;
    let cfg = FkConfig {
        t_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
        x_grid: (-4..=4).map(|i| vec![i as f64 * 0.5]).collect(),
        n: 16,
        particles: 20_000,
        m: Some(10.0),
        estimator: EstimatorSpec::global(2),
        seed: 2,
        strategy: FkStrategy::PerPoint,
        variant: TruncationVariant::DeterministicSigma,
    };
    let field = feynman_kac_grid(&spec, &cfg)?;
    let mut worst = 0.0f64;
    for (j, t) in field.t_grid.iter().enumerate() {
        let row: Vec<String> = field.u[j].iter().map(|u| format!("{u:+.3}")).collect();
        println!("t = {t:.2}: {}", row.join(" "));
        for (i, x) in field.x_grid.iter().enumerate() {
            worst = worst.max((field.u[j][i] - (x[0] + (1.0 - t) / 2.0)).abs());
        }
    }
    println!("max |u - closed form| = {worst:.4}");
    println!("growth ratio {:.4}, adjacent Lipschitz ratio {:.4}", field.growth_ratio, field.lipschitz_ratio);
    Ok(())
}
