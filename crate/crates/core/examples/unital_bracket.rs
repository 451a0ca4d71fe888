//! β_p of the unital depolarizing generator against its two-sided bracket.

use renyi_semigroups::constants::{beta_estimate, beta_p_unital_depolarizing_bounds};
use renyi_semigroups::dynamics::{Liouvillian, Semigroup};
use renyi_semigroups::opalg::matrix::DensityMatrix;
use renyi_semigroups::optim::OptimOptions;
use renyi_semigroups::Result;

fn main() -> Result<()> {
    let opts = OptimOptions::default();
    println!("d  p    lower    beta_p   upper");
    for d in [2, 3] {
        let sg = Semigroup::new(Liouvillian::depolarizing(&DensityMatrix::maximally_mixed(d))?)?;
        for p in [2.0, 3.0, 5.0] {
            let (lo, hi) = beta_p_unital_depolarizing_bounds(d, p)?;
            println!("{d}  {p:<4} {lo:.5}  {:.5}  {hi:.5}", beta_estimate(&sg, p, &opts)?.value);
        }
    }
    Ok(())
}
