//! A small convergence study against the closed-form Lipschitz problem,
//! written as CSV, JSON and plot data.
//!
//! ```bash
//! cargo run --release --example convergence_study -- /tmp/study
//! ```

use bsde_lab::condexp::EstimatorSpec;
use bsde_lab::harness::{convergence_study, MSchedule, ReferenceStrategy, StudyConfig, StudyOutputs};
use bsde_lab::model::TruncationVariant;

fn main() -> bsde_lab::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "target/study".into());
    let dir = std::path::Path::new(&dir);
    let cfg = StudyConfig {
        problem: "catalog:lipschitz-sine".into(),
        n_values: vec![4, 8, 16, 32],
        particles: 100_000,
        estimator: EstimatorSpec::partitioning(128),
        schedule: MSchedule::None,
        variant: TruncationVariant::DeterministicSigma,
        seeds: vec![1],
        reference: ReferenceStrategy::ClosedForm,
        outputs: StudyOutputs {
            csv: Some(dir.join("lipschitz.csv")),
            json: Some(dir.join("lipschitz.json")),
            plot: Some(dir.join("lipschitz.dat")),
        },
    };
    let out = convergence_study(&cfg)?;
    println!("   n        h     y_error     z_error       total");
    for r in &out.reports {
        println!("{:>4} {:>8.5} {:>11.3e} {:>11.3e} {:>11.3e}", r.n, r.h, r.y_error, r.z_error, r.total);
    }
    if let Some(f) = out.fit {
        println!("log(total) = {:.3} log(h) + {:.3}, r2 = {:.4}", f.slope, f.intercept, f.r2);
    }
    println!("written to {}", dir.display());
    Ok(())
}
