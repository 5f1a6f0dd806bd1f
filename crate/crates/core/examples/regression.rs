//! The two conditional-expectation estimators on the same data.
//!
//! ```bash
//! cargo run --example regression
//! ```

use bsde_lab::condexp::{fit, EstimatorSpec};
use bsde_lab::model::CatalogProblem;
use bsde_lab::simulate::euler_paths;
use bsde_lab::simulate::rng::{NormalStream, Purpose};

fn main() -> bsde_lab::Result<()> {
    // E[sin(X_1 + xi) | X_1] = e^{-1/2} sin(X_1) for independent xi ~ N(0, 1)
    let spec = CatalogProblem::by_name("heat-linear")?.spec()?;
    let ens = euler_paths(&spec, 1, 200_000, 3)?;
    let x = ens.step_states(1);
    let noise = NormalStream::new(11, Purpose::Increments);
    let mut xi = [0.0];
    let y: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(p, v)| {
            noise.fill(0, p as u64, &mut xi);
            (v + xi[0]).sin()
        })
        .collect();

    let c = (-0.5f64).exp();
    for est in ["global:1", "global:3", "global:7", "partition:16", "partition:64", "partition:256"] {
        let spec: EstimatorSpec = est.parse()?;
        let f = fit(x, 1, &y, &spec)?;
        let err = (-20..=20)
            .map(|i| {
                let v = i as f64 / 10.0;
                (f.predict(&[v]) - c * v.sin()).abs()
            })
            .fold(0.0, f64::max);
        println!("{:>14}: max error on [-2, 2] = {err:.4}", spec.label());
    }
    Ok(())
}
