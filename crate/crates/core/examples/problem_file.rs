//! Load a problem from JSON, evaluate its coefficients and attach a
//! truncation.
//!
//! ```bash
//! cargo run --example problem_file
//! ```

use bsde_lab::model::{truncate_problem, ProblemSpec, TruncationVariant};

fn main() -> bsde_lab::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/problems/ou-quadratic-2d.json");
    let spec = ProblemSpec::from_path(path)?;
    println!("d = {}, T = {}, regime {}", spec.dim(), spec.horizon(), spec.regime().name());

    let x = [1.0, -2.0];
    let mut b = [0.0; 2];
    spec.drift_into(0.0, &x, &mut b)?;
    println!("b(0, x)       = {b:?}");
    println!("g(x)          = {:.6}", spec.terminal(&x)?);
    println!("f(0, x, 1, z) = {:.6}", spec.driver(0.0, &x, 1.0, &[3.0, 4.0])?);

    // far from the origin the truncated terminal condition sees a bent state
    let cut = truncate_problem(&spec, 3.0, TruncationVariant::DeterministicSigma)?;
    for r in [1.0, 2.5, 5.0, 50.0] {
        let x = [r, 0.0];
        println!("|x| = {r:>4}: g = {:+.6}, g_M = {:+.6}", spec.terminal(&x)?, cut.terminal(&x)?);
    }

    // parse errors point at the offending byte
    let bad = r#"{"d": 1, "T": 1, "x0": [0], "b": ["0"], "sigma": [["1"]],
                  "f": "0.5 * z0^2", "g": "sin(x0) + t", "regime": "B2-subcritical"}"#;
    if let Err(e) = ProblemSpec::from_json_str(bad) {
        println!("rejected: {e}");
    }
    Ok(())
}
