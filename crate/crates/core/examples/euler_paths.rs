//! Forward Euler ensemble: counter-based increments, moment check and the
//! binary dump.
//!
//! ```bash
//! cargo run --example euler_paths
//! ```

use bsde_lab::model::CatalogProblem;
use bsde_lab::simulate::dump::{read_dump, write_dump};
use bsde_lab::simulate::euler_paths;

fn main() -> bsde_lab::Result<()> {
    let spec = CatalogProblem::by_name("random-sigma-sine")?.spec()?;
    let ens = euler_paths(&spec, 50, 100_000, 7)?;
    let check = ens.increment_check();
    println!(
        "increment scores: mean {:.2}, variance {:.2}, flagged {}",
        check.max_mean_score, check.max_var_score, check.flagged
    );

    let last = ens.step_states(ens.n());
    let mean = last.iter().sum::<f64>() / last.len() as f64;
    let var = last.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / last.len() as f64;
    println!("X_T: mean {mean:+.4}, variance {var:.4}");

    // particle 12 is the same path whatever P is
    let small = euler_paths(&spec, 50, 20, 7)?;
    println!("particle 12 at T: {} vs {}", ens.state(12, 50)[0], small.state(12, 50)[0]);

    let mut buf = Vec::new();
    write_dump(&small, &mut buf)?;
    let back = read_dump(buf.as_slice())?;
    println!("dump: {} bytes, first state {:?}", buf.len(), back.state(0, 1));
    Ok(())
}
