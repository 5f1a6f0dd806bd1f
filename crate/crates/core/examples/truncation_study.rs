//! Error of truncating at M against a larger radius on the same paths;
//! log-error is close to linear in M^2.
//!
//! ```bash
//! cargo run --release --example truncation_study
//! ```

use bsde_lab::condexp::EstimatorSpec;
use bsde_lab::harness::{truncation_study, StudyOutputs, TruncationStudyConfig};
use bsde_lab::model::TruncationVariant;

fn main() -> bsde_lab::Result<()> {
    let cfg = TruncationStudyConfig {
        problem: concat!(env!("CARGO_MANIFEST_DIR"), "/problems/quadratic-linear-wide.json").into(),
        n: 32,
        particles: 50_000,
        estimator: EstimatorSpec::partitioning(128),
        m_values: vec![2.0, 3.0, 4.0, 5.0],
        m_ref: 8.0,
        variant: TruncationVariant::DeterministicSigma,
        seed: 1,
        outputs: StudyOutputs::default(),
    };
    let out = truncation_study(&cfg)?;
    for r in &out.reports {
        println!("M = {}: total {:.3e}", r.m.unwrap_or(f64::NAN), r.total);
    }
    if let Some(f) = out.fit {
        println!("slope against M^2: {:.4} (r2 {:.4})", f.slope, f.r2);
    }
    Ok(())
}
