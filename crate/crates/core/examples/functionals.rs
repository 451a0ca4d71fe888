//! Entropy functionals of a relative density and the entropy production
//! along a random primitive generator.

use renyi_semigroups::dynamics::{Liouvillian, Semigroup};
use renyi_semigroups::functionals::{dirichlet_form, ent_p, entropy_production, kappa, rothaus_check, variance};
use renyi_semigroups::random::{random_full_rank_density, seeded_rng};
use renyi_semigroups::Result;

fn main() -> Result<()> {
    let mut rng = seeded_rng(1);
    let sg = Semigroup::new(Liouvillian::random_primitive(2, 2, &mut rng))?;
    let rho = random_full_rank_density(2, 0.05, &mut rng);
    let x = sg.space().relative_density(&rho)?;

    println!("Var(X) = {:.6}", variance(sg.space(), &x)?.value);
    for p in [1.0, 1.5, 2.0, 4.0] {
        println!(
            "p = {p}: kappa = {:.6}  Ent = {:.6}  E = {:.6}",
            kappa(sg.space(), &x, p)?.value,
            ent_p(sg.space(), &x, p)?.value,
            dirichlet_form(&sg, &x, p)?.value
        );
    }
    let ep = entropy_production(&sg, &rho, 2.0)?;
    println!("d/dt D_2 = {:.6} (two forms differ by {:.1e})", ep.value, ep.diagnostics["route_gap"]);
    let r = rothaus_check(sg.space(), &x)?;
    println!("Rothaus: {:.6} <= {:.6}", r.lhs, r.rhs);
    Ok(())
}
