//! Second-order expansion of E_p and κ_p around the identity along the gap
//! eigenvector: residuals shrink like ε³.

use renyi_semigroups::constants::taylor_expansion_check;
use renyi_semigroups::dynamics::{Liouvillian, Semigroup};
use renyi_semigroups::opalg::matrix::DensityMatrix;
use renyi_semigroups::Result;

fn main() -> Result<()> {
    let sg = Semigroup::new(Liouvillian::depolarizing(&DensityMatrix::from_diagonal(&[0.8, 0.2])?)?)?;
    let r = taylor_expansion_check(&sg, 3.0, &[1e-1, 3e-2, 1e-2, 3e-3, 1e-3])?;
    println!("eigenvalue {:.6}, coefficient {:.6}", r.eigenvalue, r.coefficient);
    println!("eps      E_p          predicted    kappa_p      predicted    ratio");
    for row in &r.rows {
        println!(
            "{:<8} {:.6e} {:.6e} {:.6e} {:.6e} {:.6}",
            row.eps, row.dirichlet, row.dirichlet_predicted, row.kappa, row.kappa_predicted, row.ratio
        );
    }
    println!("residual slopes: E_p {:.3}, kappa_p {:.3}", r.dirichlet_slope, r.kappa_slope);
    Ok(())
}
