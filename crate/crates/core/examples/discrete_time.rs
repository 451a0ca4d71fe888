//! β_D for channels: completely depolarizing, a channel with a
//! non-contracted pure state, and the random Pauli channel on two qubits.

use renyi_semigroups::bounds::{discrete_contraction_check, discrete_t1_bound, random_pauli_beta_d_lower};
use renyi_semigroups::constants::beta_discrete;
use renyi_semigroups::dynamics::Channel;
use renyi_semigroups::opalg::matrix::DensityMatrix;
use renyi_semigroups::optim::OptimOptions;
use renyi_semigroups::random::{random_density, seeded_rng};
use renyi_semigroups::Result;

fn main() -> Result<()> {
    let opts = OptimOptions::default();
    let dep = beta_discrete(&Channel::completely_depolarizing(2), &opts)?;
    println!("completely depolarizing qubit: beta_D = {:.5}", dep.value);
    let nc = beta_discrete(&Channel::pauli_noncontractive(), &opts)?;
    println!("non-contractive Pauli channel: beta_D = {:.2e}", nc.value + 0.0);

    let pauli = Channel::random_pauli(2)?;
    let lower = random_pauli_beta_d_lower(2)?;
    println!("random Pauli n=2: certified beta_D >= {lower}");
    let mut rng = seeded_rng(3);
    for _ in 0..3 {
        let r = discrete_contraction_check(&pauli, &random_density(4, &mut rng), Some(lower))?;
        println!("  D_2 {:.4} -> {:.4} nats (factor {:.4})", r.d2_input_nats, r.d2_output_nats, r.factor);
    }
    let bound = discrete_t1_bound(lower, &DensityMatrix::maximally_mixed(4), 0.1)?;
    println!("steps to reach trace distance 0.1: <= {:.2}", bound.value);
    Ok(())
}
