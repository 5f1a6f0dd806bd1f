//! Reference values: Cole-Hopf Monte Carlo, the frozen golden number, closed
//! forms and replicated scheme runs.
//!
//! ```bash
//! cargo run --release --example cole_hopf_oracle
//! ```

use bsde_lab::condexp::EstimatorSpec;
use bsde_lab::model::{truncate_problem, CatalogProblem, TruncationVariant};
use bsde_lab::oracle::{cole_hopf, closed_form_linear, GOLDEN_SINE_STDERR, GOLDEN_SINE_Y0};
use bsde_lab::scheme::replicate_y0;

fn main() -> bsde_lab::Result<()> {
    let spec = CatalogProblem::by_name("quadratic-sine")?.spec()?;
    let ch = cole_hopf(&spec, 0.0, &[0.0], 200_000, 5, 64)?;
    println!("Cole-Hopf: {:.5} +- {:.1e}  (Jensen floor E g = {:.5})", ch.y, ch.stderr, ch.g_mean);
    println!("golden:    {GOLDEN_SINE_Y0:.5} +- {GOLDEN_SINE_STDERR:.1e}");

    let cut = truncate_problem(&spec, 8.0, TruncationVariant::DeterministicSigma)?;
    let rep = replicate_y0(&cut, 32, 50_000, &EstimatorSpec::partitioning(128), &[1, 2, 3, 4])?;
    println!("scheme:    {:.5} +- {:.1e} over {} runs", rep.mean, rep.mean_stderr, rep.y0.len());

    let (y, z) = closed_form_linear(&[1.0], 1.0, 1.0, &[0.0], 0.0);
    println!("linear terminal closed form: Y0 = {y}, Z0 = {z:?}");
    Ok(())
}
