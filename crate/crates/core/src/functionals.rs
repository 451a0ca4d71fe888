//! Entropy and energy functionals on the σ-weighted spaces: variance,
//! `κ_p`, operator valued relative entropy `S_p`, `Ent_p`, Dirichlet forms,
//! entropy production and weighted `p → q` norms.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::divergence::log_trace_power;
use crate::dynamics::{Semigroup, Superoperator};
use crate::error::{invalid, Error, Result};
use crate::estimate::{ConstantEstimate, Method};
use crate::opalg::matrix::{c64, check_dim, hermitian_part, identity, trace, CMat, DensityMatrix, Eigh};
use crate::opalg::weighted::check_positive;
use crate::opalg::{Exponent, WeightedSpace};
use crate::optim::{gaussian_params, hermitian_from_params, multistart, OptimOptions};
use crate::random::SeededRng;

/// Step of the central difference in `s` behind `S_p`; the Richardson
/// combination of steps `h` and `h/2` cancels the `h²` error term.
pub const SP_STEP: f64 = 1e-3;
/// Inputs with condition number above this are rejected by `S_p`.
pub const SP_COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Var,
    Kappa,
    Ent,
    Dirichlet,
    EntropyProduction,
    PqNorm,
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalValue {
    pub value: f64,
    pub functional: Functional,
    pub p: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl FunctionalValue {
    fn new(value: f64, functional: Functional, p: f64) -> Self {
        Self { value, functional, p, diagnostics: BTreeMap::new() }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.diagnostics.insert(key.to_string(), v);
        self
    }
}

fn check_exponent(p: f64, min: f64) -> Result<()> {
    if !(p >= min) || !p.is_finite() {
        return Err(invalid(format!("exponent must be a finite p >= {min}, got {p}")));
    }
    Ok(())
}

fn check_definite(x: &CMat) -> Result<Eigh> {
    check_positive(x)?;
    let e = Eigh::new(x);
    if !(e.min() > 0.0) {
        return Err(Error::NotFullRank(e.min()));
    }
    Ok(e)
}

/// Hölder conjugate `p/(p−1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `Var_σ(X) = ‖X‖²_{2,σ} − (tr Γ_σ(X))²`, for Hermitian `X`.
pub fn variance(space: &WeightedSpace, x: &CMat) -> Result<FunctionalValue> {
    check_dim(x, space.dim())?;
    let (n2, n1) = variance_parts(space, x);
    Ok(FunctionalValue::new(n2 - n1 * n1, Functional::Var, 2.0).with("norm2_sq", n2).with("norm1", n1))
}

fn variance_parts(space: &WeightedSpace, x: &CMat) -> (f64, f64) {
    let h = hermitian_part(x);
    let n2 = space.norm_pow_unchecked(&h, 2.0);
    let n1 = trace(&space.gamma_unchecked(&h, 1.0)).re;
    (n2, n1)
}

pub(crate) fn variance_value(space: &WeightedSpace, x: &CMat) -> f64 {
    let (n2, n1) = variance_parts(space, x);
    n2 - n1 * n1
}

/// `κ_p(X) = 1/(p−1) ‖X‖^p_p log(‖X‖^p_p / ‖X‖^p_1)`; `κ_1 = Ent_1`.
pub fn kappa(space: &WeightedSpace, x: &CMat, p: f64) -> Result<FunctionalValue> {
    check_exponent(p, 1.0)?;
    check_dim(x, space.dim())?;
    check_positive(x)?;
    if Eigh::new(x).max() <= 0.0 {
        return Err(invalid("kappa needs a nonzero argument"));
    }
    if p == 1.0 {
        let v = ent1_value(space, x);
        return Ok(FunctionalValue::new(v, Functional::Kappa, 1.0));
    }
    let np = space.norm_pow_unchecked(x, p);
    let n1 = space.norm_pow_unchecked(x, 1.0);
    Ok(FunctionalValue::new(kappa_value(space, x, p), Functional::Kappa, p).with("norm_p_pow", np).with("norm1", n1))
}

pub(crate) fn kappa_value(space: &WeightedSpace, x: &CMat, p: f64) -> f64 {
    if p == 1.0 {
        return ent1_value(space, x);
    }
    let np = space.norm_pow_unchecked(x, p);
    let n1 = space.norm_pow_unchecked(x, 1.0);
    np * (np.ln() - p * n1.ln()) / (p - 1.0)
}

/// `S_p(X) = −p d/ds I_{p+s,p}(X)` at `s = 0`.
pub fn op_valued_entropy(space: &WeightedSpace, x: &CMat, p: f64) -> Result<CMat> {
    check_exponent(p, 1.0 + f64::EPSILON)?;
    check_dim(x, space.dim())?;
    let e = check_definite(x)?;
    let cond = e.max() / e.min();
    if cond > SP_COND_LIMIT {
        return Err(Error::IllConditioned(cond));
    }
    Ok(sp_value(space, x, p, SP_STEP))
}

pub(crate) fn sp_value(space: &WeightedSpace, x: &CMat, p: f64, h: f64) -> CMat {
    let a = Eigh::new(&space.gamma_unchecked(x, 1.0 / p));
    let at = |s: f64| -> CMat {
        let r = p / (p + s);
        let inner = a.map(|v| v.max(0.0).powf(r));
        space.gamma_unchecked(&inner, -1.0 / (p + s))
    };
    let central = |h: f64| (at(h) - at(-h)) * c64(1.0 / (2.0 * h), 0.0);
    let d1 = central(h);
    let d2 = central(h / 2.0);
    let deriv = (d2 * c64(4.0, 0.0) - d1) * c64(1.0 / 3.0, 0.0);
    hermitian_part(&(deriv * c64(-p, 0.0)))
}

/// `Ent_p(X) = ⟨I_{q,p}(X), S_p(X)⟩_σ − ‖X‖^p_p log ‖X‖_p`; `p = 1` uses
/// `tr[Γ(X)(log Γ(X) − log σ)] − ‖X‖_1 log ‖X‖_1`.
pub fn ent_p(space: &WeightedSpace, x: &CMat, p: f64) -> Result<FunctionalValue> {
    check_exponent(p, 1.0)?;
    check_dim(x, space.dim())?;
    if p == 1.0 {
        check_definite(x)?;
        return Ok(FunctionalValue::new(ent1_value(space, x), Functional::Ent, 1.0));
    }
    op_valued_entropy(space, x, p)?;
    let np = space.norm_pow_unchecked(x, p);
    Ok(FunctionalValue::new(ent_value(space, x, p, SP_STEP), Functional::Ent, p).with("norm_p_pow", np))
}

pub(crate) fn ent_value(space: &WeightedSpace, x: &CMat, p: f64, h: f64) -> f64 {
    if p == 1.0 {
        return ent1_value(space, x);
    }
    let q = conjugate(p);
    let i_qp = space.power_operator_unchecked(x, q, p);
    let s = sp_value(space, x, p, h);
    let np = space.norm_pow_unchecked(x, p);
    space.inner_unchecked(&i_qp, &s).re - np * np.ln() / p
}

pub(crate) fn ent1_value(space: &WeightedSpace, x: &CMat) -> f64 {
    let g = hermitian_part(&space.gamma_unchecked(x, 1.0));
    let e = Eigh::new(&g);
    let log_g = e.map(|v| if v > 0.0 { v.ln() } else { 0.0 });
    let log_s = Eigh::new(space.sigma()).map(f64::ln);
    let n1: f64 = e.values.iter().map(|v| v.max(0.0)).sum();
    trace(&(&g * (log_g - log_s))).re - if n1 > 0.0 { n1 * n1.ln() } else { 0.0 }
}

/// `Ent_2` from `tr[A² log(A/‖X‖_2)] − ½ tr[A² log σ]`, `A = σ^{1/4} X σ^{1/4}`.
/// Accepts singular positive `X` (`0 log 0 = 0`).
pub fn ent2_explicit(space: &WeightedSpace, x: &CMat) -> Result<f64> {
    check_dim(x, space.dim())?;
    check_positive(x)?;
    Ok(ent2_explicit_value(space, x))
}

pub(crate) fn ent2_explicit_value(space: &WeightedSpace, x: &CMat) -> f64 {
    let a = hermitian_part(&space.gamma_unchecked(x, 0.5));
    let e = Eigh::new(&a);
    let n2 = e.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n2 == 0.0 {
        return 0.0;
    }
    let first: f64 = e.values.iter().filter(|&&v| v > 0.0).map(|v| v * v * (v / n2).ln()).sum();
    let a2 = e.map(|v| v * v);
    let log_s = Eigh::new(space.sigma()).map(f64::ln);
    first - 0.5 * trace(&(a2 * log_s)).re
}

/// `E_p(X) = −p/(2(p−1)) ⟨I_{q,p}(X), L̂(X)⟩_σ`; `E_1(X) = −½ tr[L(Γ X)(log Γ X − log σ)]`.
pub fn dirichlet_form(sg: &Semigroup, x: &CMat, p: f64) -> Result<FunctionalValue> {
    if !sg.is_primitive() {
        return Err(Error::NotPrimitive("Dirichlet forms need a primitive generator".into()));
    }
    check_exponent(p, 1.0)?;
    check_dim(x, sg.dim())?;
    check_definite(x)?;
    Ok(FunctionalValue::new(dirichlet_value(sg, x, p), Functional::Dirichlet, p))
}

pub(crate) fn dirichlet_value(sg: &Semigroup, x: &CMat, p: f64) -> f64 {
    let space = sg.space();
    if p == 1.0 {
        let g = hermitian_part(&space.gamma_unchecked(x, 1.0));
        let log_g = Eigh::new(&g).map(|v| if v > 0.0 { v.ln() } else { 0.0 });
        let log_s = Eigh::new(space.sigma()).map(f64::ln);
        let lg = sg.generator().superop().apply_unchecked(&g);
        return -0.5 * trace(&(lg * (log_g - log_s))).re;
    }
    let lx = sg.hat().apply_unchecked(x);
    let i_qp = if p == 2.0 { x.clone() } else { space.power_operator_unchecked(x, conjugate(p), p) };
    -p / (2.0 * (p - 1.0)) * space.inner_unchecked(&i_qp, &lx).re
}

/// `d/dt D_p(e^{tL}ρ‖σ)` at `t = 0` from the trace formula
/// `p/(p−1) tr[(σ^a ρ σ^a)^{p−1} σ^a L(ρ) σ^a] / tr[(σ^a ρ σ^a)^p]`,
/// `a = (1−p)/2p`. The diagnostics carry the Dirichlet form route
/// `−2‖X‖^{−p}_p E_p(X)` with `X = Γ^{-1}(ρ)`.
pub fn entropy_production(sg: &Semigroup, rho: &DensityMatrix, p: f64) -> Result<FunctionalValue> {
    if !sg.is_primitive() {
        return Err(Error::NotPrimitive("entropy production needs a primitive generator".into()));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(invalid(format!("entropy production needs finite p > 1, got {p}")));
    }
    check_dim(rho, sg.dim())?;
    let (long, short) = entropy_production_forms(sg, rho, p);
    Ok(FunctionalValue::new(long, Functional::EntropyProduction, p)
        .with("dirichlet_form_route", short)
        .with("route_gap", (long - short).abs()))
}

pub(crate) fn entropy_production_forms(sg: &Semigroup, rho: &CMat, p: f64) -> (f64, f64) {
    let space = sg.space();
    let a = (1.0 - p) / (2.0 * p);
    let s = space.frac_power(a);
    let inner = hermitian_part(&(&*s * rho * &*s));
    let e = Eigh::new(&inner);
    let pow = e.map(|v| v.max(0.0).powf(p - 1.0));
    let lrho = sg.generator().superop().apply_unchecked(rho);
    let num = trace(&(pow * &*s * lrho * &*s)).re;
    let den = log_trace_power(&inner, p).exp();
    let long = p / (p - 1.0) * num / den;
    let x = space.gamma_unchecked(rho, -1.0);
    let np = space.norm_pow_unchecked(&x, p);
    let short = -2.0 * dirichlet_value(sg, &x, p) / np;
    (long, short)
}

/// Lower estimate of `sup_Y ‖Φ(Y)‖_{q,σ} / ‖Y‖_{p,σ}` over Hermitian `Y`.
pub fn pq_norm(
    phi: &Superoperator,
    space: &WeightedSpace,
    p: impl Into<Exponent>,
    q: impl Into<Exponent>,
    opts: &OptimOptions,
) -> Result<ConstantEstimate> {
    let (p, q) = (p.into(), q.into());
    for e in [p, q] {
        if let Exponent::Finite(v) = e {
            check_exponent(v, 1.0)?;
        }
    }
    if phi.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: phi.dim() });
    }
    let d = space.dim();
    let ratio = |y: &CMat| -> f64 {
        let den = space.weighted_norm(y, p).unwrap_or(f64::NAN);
        if !(den > 1e-300) {
            return f64::NAN;
        }
        space.weighted_norm(&phi.apply_unchecked(y), q).unwrap_or(f64::NAN) / den
    };
    let f = |theta: &[f64]| -ratio(&hermitian_from_params(theta, d));
    let mut inits = vec![{
        let mut v = vec![0.0; d * d];
        v[..d].iter_mut().for_each(|x| *x = 1.0);
        v
    }];
    for k in 0..d {
        let mut v = vec![0.0; d * d];
        v[k] = 1.0;
        inits.push(v);
    }
    let sample = |rng: &mut SeededRng| gaussian_params(d * d, 1.0, rng);
    let best = multistart(&f, &inits, sample, opts)?;
    Ok(ConstantEstimate {
        value: -best.f,
        method: Method::OptimizationLowerBound,
        restarts: best.restarts,
        converged: best.converged,
        witness: Some(hermitian_from_params(&best.x, d)),
        detail: "search over hermitian Y only".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RothausReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// `Ent_2(X) ≤ Ent_2(|X − E(X)|) + 2 Var(X)` with `E(X) = tr(σX)·1`.
pub fn rothaus_check(space: &WeightedSpace, x: &CMat) -> Result<RothausReport> {
    check_dim(x, space.dim())?;
    check_definite(x)?;
    let lhs = ent2_explicit_value(space, x);
    let centered = x - identity(space.dim()) * trace(&(space.sigma().as_matrix() * x));
    let abs = Eigh::new(&centered).map(f64::abs);
    let rhs = ent2_explicit_value(space, &abs) + 2.0 * variance_value(space, x);
    let slack = rhs - lhs;
    Ok(RothausReport { lhs, rhs, slack, holds: slack >= -1e-8 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::kl_divergence;
    use crate::dynamics::Liouvillian;
    use crate::opalg::matrix::{from_real_diagonal, pauli};
    use crate::random::{random_density, random_full_rank_density, random_positive_definite, seeded_rng};
    use proptest::prelude::*;

    fn half() -> WeightedSpace {
        WeightedSpace::maximally_mixed(2)
    }

    #[test]
    fn variance_examples() {
        assert!(variance(&half(), &identity(2)).unwrap().value.abs() < 1e-15);
        let x = from_real_diagonal(&[1.5, 0.5]);
        assert!((variance(&half(), &x).unwrap().value - 0.25).abs() < 1e-14);
        let v3 = variance(&half(), &(&x * c64(3.0, 0.0))).unwrap().value;
        assert!((v3 - 9.0 * 0.25).abs() < 1e-13);
    }

    #[test]
    fn kappa_examples() {
        assert!(kappa(&half(), &identity(2), 2.0).unwrap().value.abs() < 1e-15);
        let x = from_real_diagonal(&[1.5, 0.5]);
        let k = kappa(&half(), &x, 2.0).unwrap().value;
        assert!((k - 1.25 * 1.25f64.ln()).abs() < 1e-14);
        assert!((k - 0.2789).abs() < 1e-4);
        assert!(kappa(&half(), &CMat::zeros(2, 2), 2.0).is_err());
        let mut rng = seeded_rng(4);
        let space = WeightedSpace::new(random_full_rank_density(2, 0.05, &mut rng)).unwrap();
        let y = random_positive_definite(2, &mut rng);
        let e1 = kappa(&space, &y, 1.0).unwrap().value;
        let g4 = (kappa(&space, &y, 1.0 + 1e-4).unwrap().value - e1).abs();
        let g5 = (kappa(&space, &y, 1.0 + 1e-5).unwrap().value - e1).abs();
        assert!(g5 < g4 && g5 < 1e-3 * (1.0 + e1.abs()));
    }

    #[test]
    fn sp_commuting_case_matches_scalar_oracle() {
        let space = WeightedSpace::maximally_mixed(3);
        let x = from_real_diagonal(&[0.4, 1.1, 2.3]);
        for p in [1.5, 2.0, 3.0] {
            let s = op_valued_entropy(&space, &x, p).unwrap();
            for (i, v) in [0.4f64, 1.1, 2.3].iter().enumerate() {
                assert!((s[(i, i)].re - v * v.ln()).abs() < 1e-8, "p={p}");
            }
        }
    }

    #[test]
    fn ent_p_relates_to_relative_entropy() {
        let mut rng = seeded_rng(6);
        for _ in 0..5 {
            let space = WeightedSpace::new(random_full_rank_density(2, 0.05, &mut rng)).unwrap();
            let rho = random_full_rank_density(2, 0.02, &mut rng);
            let d = kl_divergence(&rho, space.sigma()).unwrap();
            let x = space.relative_density(&rho).unwrap();
            assert!((ent_p(&space, &x, 1.0).unwrap().value - d).abs() < 1e-8);
            for p in [1.5, 2.0, 3.0] {
                let y = space.power_operator(&x, p, 1.0).unwrap();
                let e = ent_p(&space, &y, p).unwrap().value;
                assert!((e - d / p).abs() < 1e-6 * d.max(1e-3), "p={p}: {e} vs {}", d / p);
            }
        }
    }

    #[test]
    fn sp_matches_norm_derivative() {
        let mut rng = seeded_rng(7);
        let space = WeightedSpace::new(random_full_rank_density(3, 0.05, &mut rng)).unwrap();
        let x = random_positive_definite(3, &mut rng);
        for p in [1.5, 2.0, 4.0] {
            let q = conjugate(p);
            let lhs = space.weighted_inner(&space.power_operator(&x, q, p).unwrap(), &op_valued_entropy(&space, &x, p).unwrap()).unwrap().re;
            let h = 1e-4;
            let f = |t: f64| space.weighted_norm_pow(&x, p + t).unwrap();
            let rhs = (f(h) - f(-h)) / (2.0 * h);
            assert!((lhs - rhs).abs() < 1e-5 * (1.0 + rhs.abs()), "p={p}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn ent2_routes_agree() {
        let mut rng = seeded_rng(8);
        for _ in 0..10 {
            let space = WeightedSpace::new(random_full_rank_density(3, 0.05, &mut rng)).unwrap();
            let x = random_positive_definite(3, &mut rng);
            let generic = ent_p(&space, &x, 2.0).unwrap().value;
            let explicit = ent2_explicit(&space, &x).unwrap();
            assert!((generic - explicit).abs() < 1e-6 * (1.0 + explicit.abs()));
        }
        assert!(ent_p(&half(), &identity(2), 2.0).unwrap().value.abs() < 1e-10);
    }

    #[test]
    fn dirichlet_examples() {
        let sg = Semigroup::new(Liouvillian::depolarizing(&DensityMatrix::maximally_mixed(2)).unwrap()).unwrap();
        let x = from_real_diagonal(&[1.5, 0.5]);
        assert!((dirichlet_form(&sg, &x, 2.0).unwrap().value - 0.25).abs() < 1e-14);
        for p in [1.0, 1.5, 2.0, 3.0] {
            assert!(dirichlet_form(&sg, &identity(2), p).unwrap().value.abs() < 1e-14);
        }
        let space = sg.space();
        for p in [2.0, 3.0, 5.0] {
            let closed = p / (2.0 * (p - 1.0))
                * (space.weighted_norm_pow(&x, p).unwrap() - space.weighted_norm_pow(&x, p - 1.0).unwrap());
            assert!((dirichlet_form(&sg, &x, p).unwrap().value - closed).abs() < 1e-8);
        }
    }

    #[test]
    fn entropy_production_routes_agree() {
        let mut rng = seeded_rng(9);
        let sg = Semigroup::new(Liouvillian::random(2, 2, &mut rng)).unwrap();
        let rho = random_density(2, &mut rng);
        for p in [1.5, 2.0, 3.0] {
            let v = entropy_production(&sg, &rho, p).unwrap();
            assert!(v.diagnostics["route_gap"] < 1e-10);
            assert!(v.value <= 1e-9);
        }
        let at_sigma = entropy_production(&sg, sg.sigma(), 2.0).unwrap();
        assert!(at_sigma.value.abs() < 1e-10);
    }

    #[test]
    fn pq_norm_examples() {
        let space = WeightedSpace::from_diagonal(&[0.75, 0.25]).unwrap();
        let opts = OptimOptions { restarts: 8, seed: 1, max_evals: Some(800), threads: None };
        let id = pq_norm(&Superoperator::identity(2), &space, 2.0, 2.0, &opts).unwrap();
        assert!((id.value - 1.0).abs() < 1e-9);
        let sigma = space.sigma().clone();
        let cond = Superoperator::from_fn(2, |y| identity(2) * trace(&(sigma.as_matrix() * y)));
        let e = pq_norm(&cond, &space, 2.0, 2.0, &opts).unwrap();
        assert!((e.value - 1.0).abs() < 1e-6);
        assert_eq!(e.method, Method::OptimizationLowerBound);
    }

    #[test]
    fn rothaus_examples() {
        assert!(rothaus_check(&half(), &identity(2)).unwrap().slack.abs() < 1e-14);
        let x = identity(2) + pauli(3) * c64(0.1, 0.0);
        assert!(rothaus_check(&half(), &x).unwrap().holds);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn pointwise_inequalities(seed in 0u64..100_000, d in 2usize..4) {
            let mut rng = seeded_rng(seed);
            let space = WeightedSpace::new(random_full_rank_density(d, 0.02, &mut rng)).unwrap();
            let y = random_positive_definite(d, &mut rng);
            let x = &y / c64(space.weighted_norm(&y, 1.0).unwrap(), 0.0);
            let var = variance(&space, &x).unwrap().value;
            prop_assert!(kappa(&space, &x, 2.0).unwrap().value - var >= -1e-9);
            for p in [1.5, 2.0, 3.0] {
                let e = ent_p(&space, &x, p).unwrap().value;
                prop_assert!(e - kappa(&space, &x, p).unwrap().value / p >= -1e-8);
            }
            prop_assert!(rothaus_check(&space, &x).unwrap().slack >= -1e-8);
        }

        #[test]
        fn dirichlet_forms_are_nonnegative(seed in 0u64..100_000) {
            let mut rng = seeded_rng(seed);
            let sg = Semigroup::new(Liouvillian::random(2, 2, &mut rng)).unwrap();
            let x = random_positive_definite(2, &mut rng);
            for p in [1.0, 1.5, 2.0, 3.0] {
                prop_assert!(dirichlet_form(&sg, &x, p).unwrap().value >= -1e-9);
            }
        }
    }
}
