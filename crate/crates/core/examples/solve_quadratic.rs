//! One backward run on the quadratic sine problem, with and without
//! truncation, plus per-step statistics.
//!
//! ```bash
//! cargo run --release --example solve_quadratic
//! ```

use std::sync::Arc;

use bsde_lab::condexp::EstimatorSpec;
use bsde_lab::model::{truncate_problem, CatalogProblem, TruncationVariant};
use bsde_lab::scheme::solve_backward;
use bsde_lab::simulate::euler_paths;

fn main() -> bsde_lab::Result<()> {
    let spec = CatalogProblem::by_name("quadratic-sine")?.spec()?;
    let ens = Arc::new(euler_paths(&spec, 32, 100_000, 1)?);
    let est = EstimatorSpec::partitioning(128);

    let plain = solve_backward(&spec, Arc::clone(&ens), &est)?;
    println!("untruncated: Y0 = {:.5} +- {:.1e}, Z0 = {:.5}", plain.y0(), plain.y0_stderr(), plain.z0()[0]);
    for m in [2.0, 3.0, 8.0] {
        let sol = solve_backward(&truncate_problem(&spec, m, TruncationVariant::DeterministicSigma)?, Arc::clone(&ens), &est)?;
        println!("M = {m}:      Y0 = {:.5}", sol.y0());
    }

    println!("\n   k      t    mean Y    std Y   mean Z");
    for k in (0..=32).step_by(8) {
        let s = plain.step_stats(k);
        println!("{:>4} {:>6.3} {:>9.5} {:>8.5} {:>8.5}", s.k, s.t, s.y_mean, s.y_std, s.z_mean[0]);
    }

    // the fitted regressions are the solution; query them anywhere
    let (y, z) = plain.evaluate(16, &[1.0]);
    println!("\nu(0.5, 1.0) ~ {y:.5}, v(0.5, 1.0) ~ {:.5}", z[0]);
    Ok(())
}
