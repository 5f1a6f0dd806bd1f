//! Truncation radius schedules and the regimes they require.
//!
//! ```bash
//! cargo run --example schedules
//! ```

use bsde_lab::harness::{select_m, ScheduleRule};
use bsde_lab::model::RegularityParams;

fn main() {
    let sub = RegularityParams { r: 0.25, ..RegularityParams::default() };
    let rnd = RegularityParams { r: 0.25, kappa: 0.25, ..RegularityParams::default() };
    println!("     n  subcritical  critical    strict");
    for n in [8.0, 64.0, 512.0, 4096.0, 1e6] {
        let a = select_m(n, &sub, ScheduleRule::Thm56Subcritical, 2.0, 1.0).unwrap();
        let b = select_m(n, &sub, ScheduleRule::Thm56Critical, 2.0, 1.0).unwrap();
        let c = select_m(n, &rnd, ScheduleRule::Thm57Strict, 0.5, 1.0).unwrap();
        println!("{n:>6} {a:>12.4} {b:>9.4} {c:>9.4}");
    }
    let over = RegularityParams { r: 0.5, kappa: 0.5, ..RegularityParams::default() };
    match select_m(100.0, &over, ScheduleRule::Thm57Strict, 0.5, 1.0) {
        Ok(m) => println!("unexpected M = {m}"),
        Err(e) => println!("{e}"),
    }
    if let Err(e) = select_m(100.0, &sub, ScheduleRule::Thm56Subcritical, 5.0, 1.0) {
        println!("{e}");
    }
}
