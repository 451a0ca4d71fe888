//! Runs every property suite and prints the worst slack per check.

use renyi_semigroups::optim::OptimOptions;
use renyi_semigroups::verify::{run_suite, Suite};
use renyi_semigroups::Result;

fn main() -> Result<()> {
    let results = run_suite(Suite::All, 0, &OptimOptions::default())?;
    for r in &results {
        println!("{:<5} {:<18} {:<48} {:+.3e}", if r.passed { "ok" } else { "FAIL" }, r.suite, r.check, r.slack);
    }
    Ok(())
}
