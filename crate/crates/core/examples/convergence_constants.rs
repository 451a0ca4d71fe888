//! Spectral gap, β_2 and α_2 of an amplitude-damping-with-heating
//! generator, next to the depolarizing closed form.

use renyi_semigroups::constants::{alpha_estimate, beta2_depolarizing_closed_form, beta_estimate, spectral_gap};
use renyi_semigroups::dynamics::{Liouvillian, Semigroup};
use renyi_semigroups::io::{parse_dynamics, Dynamics};
use renyi_semigroups::opalg::matrix::DensityMatrix;
use renyi_semigroups::optim::OptimOptions;
use renyi_semigroups::Result;

const DAMPING: &str = r#"{"kind":"gkls","H":{"dim":2,"re":[[0.5,0],[0,-0.5]]},
  "L":[{"dim":2,"re":[[0,0.8660254037844386],[0,0]]},{"dim":2,"re":[[0,0],[0.5,0]]}]}"#;

fn main() -> Result<()> {
    let opts = OptimOptions::default();
    let Dynamics::Continuous { generator, .. } = parse_dynamics(DAMPING)? else { unreachable!() };
    let sg = Semigroup::new(generator)?;
    println!("fixed point diag = {:.4} {:.4}", sg.sigma()[(0, 0)].re, sg.sigma()[(1, 1)].re);
    println!("gap      = {:.6}", spectral_gap(&sg)?.value);
    for p in [1.0, 2.0, 3.0] {
        let b = beta_estimate(&sg, p, &opts)?;
        println!("beta_{p}   = {:.6} ({:?})", b.value, b.method);
    }
    println!("alpha_2  = {:.6}", alpha_estimate(&sg, 2.0, &opts)?.value);

    let sigma = DensityMatrix::from_diagonal(&[0.75, 0.25])?;
    let dep = Semigroup::new(Liouvillian::depolarizing(&sigma)?)?;
    println!(
        "depolarizing: closed form {:.6}, search {:.6}",
        beta2_depolarizing_closed_form(&sigma)?.value,
        beta_estimate(&dep, 2.0, &opts)?.value
    );
    Ok(())
}
