//! Worst-case mixing times of a depolarizing qubit against the β_2 bounds.

use renyi_semigroups::bounds::{empirical_t1, empirical_t2, t1_bound_from_beta, t2_bound_from_beta2, uncertainty_check};
use renyi_semigroups::constants::beta2_depolarizing_closed_form;
use renyi_semigroups::dynamics::{Liouvillian, Semigroup};
use renyi_semigroups::opalg::matrix::DensityMatrix;
use renyi_semigroups::optim::OptimOptions;
use renyi_semigroups::Result;

fn main() -> Result<()> {
    let opts = OptimOptions::default();
    let sigma = DensityMatrix::from_diagonal(&[0.75, 0.25])?;
    let sg = Semigroup::new(Liouvillian::depolarizing(&sigma)?)?;
    let beta = beta2_depolarizing_closed_form(&sigma)?.value;
    println!("eps    t1 empirical  t1 bound   t2 empirical  t2 bound");
    for eps in [0.3, 0.1, 0.03] {
        println!(
            "{eps:<6} {:<13.4} {:<10.4} {:<13.4} {:.4}",
            empirical_t1(&sg, eps, &opts)?.value,
            t1_bound_from_beta(beta, &sigma, eps)?.value,
            empirical_t2(&sg, eps, &opts)?.value,
            t2_bound_from_beta2(beta, &sigma, eps)?.value
        );
    }
    for m in [0.1, 0.01] {
        let sg = Semigroup::new(Liouvillian::depolarizing(&DensityMatrix::from_diagonal(&[1.0 - m, m])?)?)?;
        let u = uncertainty_check(&sg, &opts)?;
        println!("min eig {m}: alpha_2 t_2(1/e) = {:.4} (>= 1/2)", u.alpha_product);
    }
    Ok(())
}
