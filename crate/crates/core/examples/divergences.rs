//! Sandwiched Rényi divergences of a qubit pair across orders, and the
//! Pinsker lower bound.

use renyi_semigroups::divergence::{kl_divergence, max_divergence, sandwiched_divergence, trace_distance};
use renyi_semigroups::opalg::matrix::DensityMatrix;
use renyi_semigroups::Result;

fn main() -> Result<()> {
    let sigma = DensityMatrix::from_diagonal(&[0.75, 0.25])?;
    let rho = DensityMatrix::normalized(renyi_semigroups::io::parse_matrix(r#"{"dim":2,"re":[[1,1],[1,1]]}"#)?)?;
    println!("p      D_p (nats)");
    println!("1      {:.6}", kl_divergence(&rho, &sigma)?);
    for p in [1.5, 2.0, 3.0, 10.0] {
        println!("{p:<6} {:.6}", sandwiched_divergence(&rho, &sigma, p)?);
    }
    println!("inf    {:.6}", max_divergence(&rho, &sigma)?);
    let t = trace_distance(&rho, &sigma)?;
    println!("Pinsker floor ½‖ρ−σ‖₁² = {:.6}", 0.5 * t * t);
    Ok(())
}
