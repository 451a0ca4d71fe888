//! Convergence constants of a semigroup: spectral gap, `β_p`, `α_p`, the
//! discrete `β_D`, depolarizing closed forms and the second-order expansion
//! around the identity.

mod taylor;

pub use taylor::{divided_difference_f, divided_difference_g, taylor_expansion_check, TaylorReport, ROUNDOFF_FLOOR, TaylorRow};

use crate::dynamics::liouvillian::conjugate_by_gamma;
use crate::dynamics::superop::unvectorize;
use crate::dynamics::{Channel, Semigroup};
use crate::error::{invalid, Error, Result};
use crate::estimate::{ConstantEstimate, Method};
use crate::functionals::{dirichlet_value, ent_value, kappa_value, SP_STEP};
use crate::opalg::matrix::{c64, hermitian_deviation, hermitian_part, identity, operator_norm, CMat, DensityMatrix, Eigh};
use crate::opalg::WeightedSpace;
use crate::optim::{exp_hermitian_scaled, gaussian_params, multistart, traceless_dim, traceless_hermitian, traceless_params, OptimOptions};
use crate::random::SeededRng;

/// Candidates with `κ_p` (or `Ent_p`) below this are treated as `X ∝ 1`.
pub const SINGULAR_FLOOR: f64 = 1e-12;
/// `Ent_p` carries finite-difference noise near `1e-12`; ratios against it
/// need a larger floor.
pub const ENT_FLOOR: f64 = 1e-9;

fn require_primitive(sg: &Semigroup) -> Result<()> {
    if sg.is_primitive() {
        Ok(())
    } else {
        Err(Error::NotPrimitive("constant needs a primitive generator".into()))
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("exponent must be a finite p >= 1, got {p}")));
    }
    Ok(())
}

/// The gap of `−½(L̂ + L*)` in the σ-weighted space, computed as the second
/// smallest eigenvalue of its Hilbert-Schmidt symmetric similarity
/// `Γ^{1/2} ∘ ½(L̂ + L*) ∘ Γ^{−1/2}`. The witness is the Hermitian gap
/// eigenvector of `L̂` scaled to unit operator norm.
pub fn spectral_gap(sg: &Semigroup) -> Result<ConstantEstimate> {
    require_primitive(sg)?;
    let (lambda, x) = gap_eigenpair(sg)?;
    Ok(ConstantEstimate {
        value: lambda,
        method: Method::Eigenvalue,
        restarts: 0,
        converged: true,
        witness: Some(x),
        detail: "second eigenvalue of the symmetrized hat generator".into(),
    })
}

pub(crate) fn gap_eigenpair(sg: &Semigroup) -> Result<(f64, CMat)> {
    let space = sg.space();
    let d = sg.dim();
    let sym = sg.hat().add(&sg.generator().superop().adjoint())?.scale(0.5);
    let m = conjugate_by_gamma(&sym, space, 0.5).scale(-1.0).into_matrix();
    let dev = hermitian_deviation(&m);
    if dev > 1e-8 * (1.0 + operator_norm(&m)) {
        return Err(Error::NotHermitian(dev));
    }
    let e = Eigh::new(&hermitian_part(&m));
    if e.values.len() < 2 {
        return Err(invalid("spectral gap needs dimension at least 2"));
    }
    let v: Vec<_> = e.vector(1).iter().copied().collect();
    let y = space.gamma_unchecked(&unvectorize(&v, d), -0.5);
    let mut x = hermitian_part(&y);
    if operator_norm(&x) < 1e-8 * operator_norm(&y) {
        x = hermitian_part(&(y * c64(0.0, 1.0)));
    }
    let n = operator_norm(&x);
    Ok((e.values[1], x / c64(n, 0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ratio {
    Beta,
    Alpha,
}

fn ratio_at(sg: &Semigroup, x: &CMat, p: f64, kind: Ratio, h: f64) -> f64 {
    let space = sg.space();
    let den = match kind {
        Ratio::Beta => kappa_value(space, x, p),
        Ratio::Alpha => ent_value(space, x, p, h),
    };
    let floor = match kind {
        Ratio::Alpha if p > 1.0 => ENT_FLOOR,
        _ => SINGULAR_FLOOR,
    };
    if !(den > floor) {
        return f64::INFINITY;
    }
    let r = dirichlet_value(sg, x, p) / den;
    if r.is_finite() {
        r
    } else {
        f64::INFINITY
    }
}

/// `X = exp(H)/‖exp(H)‖_{1,σ}`.
pub(crate) fn unit_density(space: &WeightedSpace, h: &CMat) -> CMat {
    let e = exp_hermitian_scaled(h);
    let n = space.norm_pow_unchecked(&e, 1.0);
    e / c64(n, 0.0)
}

/// Starting points: the gap eigenvector at several scales and signs, and
/// regularized logs of the eigenprojectors of σ.
fn initial_points(sg: &Semigroup) -> Vec<Vec<f64>> {
    let d = sg.dim();
    let mut out = Vec::new();
    if let Ok((_, x)) = gap_eigenpair(sg) {
        for eps in [1e-3, 1e-2, 1e-1, 0.3, 0.6, 0.9] {
            for sign in [1.0, -1.0] {
                let y = identity(d) + &x * c64(sign * eps, 0.0);
                out.push(traceless_params(&Eigh::new(&y).map(|v| v.max(1e-300).ln())));
            }
        }
    }
    let space = sg.space();
    let u = space.eigenvectors();
    for k in 0..d {
        let col = u.column(k);
        let proj = col * col.adjoint();
        for delta in [1e-3, 1e-2, 1e-1] {
            let y = &proj + identity(d) * c64(delta, 0.0);
            out.push(traceless_params(&Eigh::new(&y).map(f64::ln)));
            let y = identity(d) - &proj + identity(d) * c64(delta, 0.0);
            out.push(traceless_params(&Eigh::new(&y).map(f64::ln)));
        }
    }
    out
}

fn ratio_search(sg: &Semigroup, p: f64, kind: Ratio, opts: &OptimOptions) -> Result<ConstantEstimate> {
    let d = sg.dim();
    let space = sg.space();
    let f = |theta: &[f64]| ratio_at(sg, &unit_density(space, &traceless_hermitian(theta, d)), p, kind, SP_STEP);
    let inits = initial_points(sg);
    let sample = |rng: &mut SeededRng| gaussian_params(traceless_dim(d), 1.0, rng);
    let best = multistart(&f, &inits, sample, opts)?;
    let x = unit_density(space, &traceless_hermitian(&best.x, d));
    // recompute at the witness with a second finite-difference step
    let value = match kind {
        Ratio::Beta => ratio_at(sg, &x, p, kind, SP_STEP),
        Ratio::Alpha => {
            let a = ratio_at(sg, &x, p, kind, SP_STEP);
            let b = ratio_at(sg, &x, p, kind, SP_STEP / 2.0);
            if (a - b).abs() > 1e-6 * a.abs().max(1.0) {
                a.max(b)
            } else {
                a
            }
        }
    };
    let what = match kind {
        Ratio::Beta => "E_p/kappa_p",
        Ratio::Alpha => "E_p/Ent_p",
    };
    Ok(ConstantEstimate {
        value,
        method: Method::OptimizationUpperBound,
        restarts: best.restarts,
        converged: best.converged,
        witness: Some(x),
        detail: format!("min of {what} over X = exp(H)/|exp(H)|_1"),
    })
}

/// Upper estimate of `β_p = inf E_p(X)/κ_p(X)` over `‖X‖_{1,σ} = 1`.
pub fn beta_estimate(sg: &Semigroup, p: f64, opts: &OptimOptions) -> Result<ConstantEstimate> {
    require_primitive(sg)?;
    check_p(p)?;
    ratio_search(sg, p, Ratio::Beta, opts)
}

/// Upper estimate of `α_p = inf E_p(X)/Ent_p(X)` over `‖X‖_{1,σ} = 1`.
pub fn alpha_estimate(sg: &Semigroup, p: f64, opts: &OptimOptions) -> Result<ConstantEstimate> {
    require_primitive(sg)?;
    check_p(p)?;
    ratio_search(sg, p, Ratio::Alpha, opts)
}

/// `(1 − 1/M)/log M` with `M = ‖σ^{-1}‖_∞`: `β_2` of `L(ρ) = tr(ρ)σ − ρ`.
pub fn beta2_depolarizing_closed_form(sigma: &DensityMatrix) -> Result<ConstantEstimate> {
    let space = WeightedSpace::new(sigma.clone())?;
    let m = space.inverse_norm();
    if !(m > 1.0) {
        return Err(invalid("the inverse norm of sigma must exceed 1"));
    }
    Ok(ConstantEstimate::exact((1.0 - 1.0 / m) / m.ln(), Method::ClosedForm, "depolarizing closed form"))
}

/// Bracket `[lower, upper]` on `β_p` for depolarizing to `1/d`, `p ≥ 2`.
pub fn beta_p_unital_depolarizing_bounds(d: usize, p: f64) -> Result<(f64, f64)> {
    if d < 2 {
        return Err(invalid("dimension must be at least 2"));
    }
    if !(p >= 2.0) || !p.is_finite() {
        return Err(invalid(format!("bracket holds for finite p >= 2, got {p}")));
    }
    let c = p / (2.0 * (p - 1.0));
    let ld = (d as f64).ln();
    let r = (d as f64).powf((p - 1.0) / p);
    Ok((c * (r - 1.0) / (r * ld), c / ld))
}

/// Upper estimate of `β_D(T) = β_2(T* T̂ − id)`. Channels whose discrete
/// generator is not primitive are accepted; the estimate then reports
/// a vanishing ratio honestly.
pub fn beta_discrete(t: &Channel, opts: &OptimOptions) -> Result<ConstantEstimate> {
    let sg = t.discrete_generator()?;
    let mut est = ratio_search(&sg, 2.0, Ratio::Beta, opts)?;
    if let Some(x) = &est.witness {
        let space = sg.space();
        let that = t.hat(space)?;
        let direct = space.norm_pow_unchecked(x, 2.0) - space.norm_pow_unchecked(&hermitian_part(&that.apply(x)?), 2.0);
        let gap = (direct - dirichlet_value(&sg, x, 2.0)).abs();
        if gap > 1e-9 * (1.0 + direct.abs()) {
            return Err(Error::InvalidGenerator(format!("discrete Dirichlet form mismatch {gap:e}")));
        }
    }
    est.detail = "min of E_2/kappa_2 for the generator T* T^ - id".into();
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Liouvillian;
    use crate::random::{random_full_rank_density, seeded_rng};

    fn depol(sigma: &DensityMatrix) -> Semigroup {
        Semigroup::new(Liouvillian::depolarizing(sigma).unwrap()).unwrap()
    }

    fn quick() -> OptimOptions {
        OptimOptions { restarts: 16, ..OptimOptions::default() }
    }

    #[test]
    fn gap_examples() {
        let mut rng = seeded_rng(1);
        for _ in 0..3 {
            let sigma = random_full_rank_density(3, 0.05, &mut rng);
            assert!((spectral_gap(&depol(&sigma)).unwrap().value - 1.0).abs() < 1e-9);
        }
        let l = Liouvillian::random_primitive(2, 2, &mut rng);
        let g = spectral_gap(&Semigroup::new(l.clone()).unwrap()).unwrap().value;
        let g2 = spectral_gap(&Semigroup::new(l.scaled(2.5)).unwrap()).unwrap().value;
        assert!((g2 - 2.5 * g).abs() < 1e-9);
        let l2 = Liouvillian::depolarizing(&DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap()).unwrap().tensor_power(2).unwrap();
        assert!((spectral_gap(&Semigroup::new(l2).unwrap()).unwrap().value - 1.0).abs() < 1e-9);
        assert!(spectral_gap(&Semigroup::with_fixed_point(Liouvillian::zero(2), DensityMatrix::maximally_mixed(2)).unwrap()).is_err());
    }

    #[test]
    fn gap_witness_is_an_eigenvector_for_reversible_generators() {
        let mut rng = seeded_rng(2);
        let l = Liouvillian::random_primitive(2, 3, &mut rng).reversibilize().unwrap();
        let sg = Semigroup::new(l).unwrap();
        let (lambda, x) = gap_eigenpair(&sg).unwrap();
        let r = sg.hat().apply(&x).unwrap() + &x * c64(lambda, 0.0);
        assert!(crate::opalg::matrix::max_abs(&r) < 1e-9);
    }

    #[test]
    fn closed_forms() {
        let half = DensityMatrix::maximally_mixed(2);
        assert!((beta2_depolarizing_closed_form(&half).unwrap().value - 0.72135).abs() < 1e-5);
        let s = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        assert!((beta2_depolarizing_closed_form(&s).unwrap().value - 0.54101).abs() < 1e-5);
        let (lo, hi) = beta_p_unital_depolarizing_bounds(2, 2.0).unwrap();
        assert!((lo - 0.422556).abs() < 1e-5 && (hi - std::f64::consts::LOG2_E).abs() < 1e-12);
        assert!(lo < 0.72135 && 0.72135 < hi);
        assert!(beta_p_unital_depolarizing_bounds(2, 1.5).is_err());
        for d in 2..6 {
            for p in [2.0, 3.0, 10.0, 1e3] {
                let (lo, hi) = beta_p_unital_depolarizing_bounds(d, p).unwrap();
                assert!(lo <= hi);
            }
        }
    }

    #[test]
    fn beta2_depolarizing_matches_closed_form() {
        let s = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        let est = beta_estimate(&depol(&s), 2.0, &quick()).unwrap();
        assert_eq!(est.method, Method::OptimizationUpperBound);
        assert!((est.value - 0.54101).abs() < 1e-3, "{}", est.value);
    }

    #[test]
    fn alpha2_qubit_depolarizing_is_one() {
        let est = alpha_estimate(&depol(&DensityMatrix::maximally_mixed(2)), 2.0, &quick()).unwrap();
        assert!((est.value - 1.0).abs() < 2e-2, "{}", est.value);
    }

    #[test]
    fn beta1_equals_alpha1() {
        let s = DensityMatrix::from_diagonal(&[0.7, 0.3]).unwrap();
        let sg = depol(&s);
        let b = beta_estimate(&sg, 1.0, &quick()).unwrap().value;
        let a = alpha_estimate(&sg, 1.0, &quick()).unwrap().value;
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn discrete_examples() {
        let dep = beta_discrete(&Channel::completely_depolarizing(2), &quick()).unwrap();
        assert!((dep.value - 0.72135).abs() < 1e-3, "{}", dep.value);
        let nc = beta_discrete(&Channel::pauli_noncontractive(), &quick()).unwrap();
        assert!(nc.value.abs() < 1e-6, "{}", nc.value);
    }
}
