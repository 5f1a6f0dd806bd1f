//! Smallness threshold, Z-bounds and envelope fixed points.
//!
//! ```bash
//! cargo run --example apriori_bounds
//! ```

use bsde_lab::apriori::{
    b1_envelope, b2_envelope, b3_envelope, check_b1_threshold, lipschitz_z_bound, rate_regime, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use bsde_lab::model::{Regime, RegularityParams};

fn main() -> bsde_lab::Result<()> {
    let unit = RegularityParams::default();
    let th = check_b1_threshold(&unit)?;
    println!("threshold for alpha + T beta: {:.12} (1/e)", th.threshold);

    for alpha in [0.1, 0.2, 0.3, 0.36, 0.37] {
        let p = RegularityParams { alpha, ..unit.clone() };
        let env = b1_envelope(&p, 0.0, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        println!(
            "alpha = {alpha:.2}: B = {:.6}, {} iterations, converged {}",
            env.b, env.iterations, env.converged
        );
    }

    let lip = RegularityParams { k_g: 1.0, k_fx: 0.5, k_b: 0.2, k_fy: 0.3, ..unit.clone() };
    println!("Lipschitz |Z| bound: {:.6}", lipschitz_z_bound(&lip));

    let sub = RegularityParams { r: 0.5, ..unit.clone() };
    let env = b2_envelope(&sub)?;
    println!("subcritical envelope: |Z| <= {:.6} + {} |x|^{}", env.a, env.b, env.exponent);

    let bounded = RegularityParams { r: 0.25, kappa: 0.25, ..unit };
    let env = b3_envelope(&bounded, Regime::B3Bounded)?;
    println!("bounded-terminal envelope exponent {}, {:?}", env.exponent, env.rate_regime);
    println!("kappa = 0.5, r = 0.5: {:?}", rate_regime(0.5, 0.5));
    Ok(())
}
