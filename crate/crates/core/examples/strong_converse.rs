//! Success-probability envelope for transmitting above capacity through
//! n uses of a depolarizing semigroup, printed as a CSV grid.

use renyi_semigroups::bounds::{capacity_decay_curve, curve_csv, k_constant, succ_prob_bound};
use renyi_semigroups::dynamics::{Liouvillian, Semigroup};
use renyi_semigroups::opalg::matrix::DensityMatrix;
use renyi_semigroups::Result;

fn main() -> Result<()> {
    let half = DensityMatrix::maximally_mixed(2);
    let b = succ_prob_bound(1.0, 10, 2.0, 0.5 / 2f64.ln(), 2.0, &half)?;
    println!("R = 1 bit, n = 10, t = 2: p_succ <= {:.4}", b.value);
    println!("k(lambda = 1) = {}", k_constant(1.0, &half, 2)?);

    let sg = Semigroup::new(Liouvillian::depolarizing(&half)?)?;
    let rows = capacity_decay_curve(&sg, 2.0, &[0.5, 1.0, 2.0, 4.0], &[0.5, 0.75, 1.0], 50, None)?;
    print!("{}", curve_csv(&rows));
    Ok(())
}
