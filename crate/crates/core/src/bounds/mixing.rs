use super::{check_eps, BoundReport, Units};
use crate::constants::spectral_gap;
use crate::dynamics::{Semigroup, Superoperator};
use crate::error::{Error, Result};
use crate::opalg::matrix::{hermitian_part, ket_bra, trace_norm, CMat, CVec};
use crate::optim::{gaussian_params, multistart, state_params, state_vector, OptimOptions};
use crate::random::SeededRng;

/// Bisection stops once the bracket is below this multiple of `1/λ`.
pub const BISECTION_TOL: f64 = 1e-3;
/// The search horizon is `HORIZON/λ`.
pub const HORIZON: f64 = 50.0;

fn pure_search(d: usize, f: impl Fn(&CMat) -> f64 + Sync, opts: &OptimOptions, eig: &CMat) -> Result<(f64, CMat)> {
    let obj = |theta: &[f64]| {
        let v = -f(&ket_bra(&state_vector(theta, d)));
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let inits: Vec<Vec<f64>> = (0..d).map(|k| state_params(&CVec::from_iterator(d, eig.column(k).iter().copied()))).collect();
    let sample = |rng: &mut SeededRng| gaussian_params(2 * d, 1.0, rng);
    let best = multistart(&obj, &inits, sample, opts)?;
    Ok((-best.f, ket_bra(&state_vector(&best.x, d))))
}

/// Largest `‖e^{tL}(ψ) − σ‖_1` found over pure `ψ`, with the maximizer.
/// Convexity of the trace norm puts the supremum over all states on pure
/// inputs.
pub fn worst_case_t1_distance(sg: &Semigroup, t: f64, opts: &OptimOptions) -> Result<(f64, CMat)> {
    let prop = sg.propagator(t);
    let sigma = sg.sigma().as_matrix().clone();
    pure_search(sg.dim(), |psi| trace_norm(&hermitian_part(&(prop.apply_unchecked(psi) - &sigma))), opts, sg.space().eigenvectors())
}

fn variance_after(sg: &Semigroup, prop: &Superoperator, psi: &CMat) -> f64 {
    let space = sg.space();
    let x = hermitian_part(&space.gamma_unchecked(&prop.apply_unchecked(psi), -1.0));
    space.norm_pow_unchecked(&x, 2.0) - 1.0
}

/// Largest `Var(e^{tL̂}X)` found over `X = Γ^{-1}(ψ)`, `ψ` pure. `Var` is
/// convex and every positive `X` with `‖X‖_{1,σ} = 1` is a mixture of such
/// points, so the supremum sits there.
pub fn worst_case_t2_variance(sg: &Semigroup, t: f64, opts: &OptimOptions) -> Result<(f64, CMat)> {
    let prop = sg.propagator(t);
    pure_search(sg.dim(), |psi| variance_after(sg, &prop, psi), opts, sg.space().eigenvectors())
}

fn bisect(
    sg: &Semigroup,
    eps: f64,
    opts: &OptimOptions,
    worst: impl Fn(&Semigroup, f64, &OptimOptions) -> Result<(f64, CMat)>,
    formula: &'static str,
) -> Result<BoundReport> {
    if !sg.is_primitive() {
        return Err(Error::NotPrimitive("mixing times need a primitive generator".into()));
    }
    check_eps(eps)?;
    let lambda = spectral_gap(sg)?.value;
    let horizon = HORIZON / lambda;
    let tol = BISECTION_TOL / lambda;
    let inputs = [("eps", eps), ("gap", lambda), ("horizon_time", horizon), ("tolerance_time", tol)];
    let mut report = BoundReport::new(0.0, Units::Time, formula, &inputs);
    report.note = Some("worst case searched over pure inputs; a lower estimate of the true mixing time".into());
    if worst(sg, 0.0, opts)?.0 <= eps {
        return Ok(report);
    }
    if worst(sg, horizon, opts)?.0 > eps {
        report.value = f64::INFINITY;
        report.note = Some("not mixed within horizon".into());
        return Ok(report);
    }
    let (mut lo, mut hi) = (0.0, horizon);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if worst(sg, mid, opts)?.0 <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    report.value = hi;
    Ok(report)
}

/// First `t` with worst-case trace distance to `σ` at most `ε`.
pub fn empirical_t1(sg: &Semigroup, eps: f64, opts: &OptimOptions) -> Result<BoundReport> {
    bisect(sg, eps, opts, worst_case_t1_distance, "empirical_t1")
}

/// First `t` with worst-case `Var(X_t)` at most `ε` over `‖X‖_{1,σ} = 1`.
pub fn empirical_t2(sg: &Semigroup, eps: f64, opts: &OptimOptions) -> Result<BoundReport> {
    bisect(sg, eps, opts, worst_case_t2_variance, "empirical_t2")
}
