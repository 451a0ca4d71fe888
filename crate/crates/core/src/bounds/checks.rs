use serde::Serialize;

use super::empirical_t2;
use crate::constants::{alpha_estimate, beta2_depolarizing_closed_form, beta_estimate};
use crate::divergence::sandwiched_divergence;
use crate::dynamics::{Channel, Liouvillian, Semigroup};
use crate::error::{Error, Result};
use crate::opalg::matrix::{max_abs_diff, DensityMatrix};
use crate::optim::OptimOptions;

fn require_reversible(sg: &Semigroup) -> Result<()> {
    if !sg.is_primitive() {
        return Err(Error::NotPrimitive("check needs a primitive generator".into()));
    }
    if !sg.is_reversible() {
        return Err(Error::NotReversible);
    }
    Ok(())
}

fn is_depolarizing(sg: &Semigroup) -> bool {
    Liouvillian::depolarizing(sg.sigma())
        .map(|l| max_abs_diff(l.superop().matrix(), sg.generator().superop().matrix()) < 1e-10)
        .unwrap_or(false)
}

#[derive(Debug, Clone, Serialize)]
pub struct UncertaintyReport {
    pub alpha2: f64,
    pub beta2: f64,
    pub t2_time: f64,
    /// `α_2 t_2(1/e)`.
    pub alpha_product: f64,
    /// `2 β_2 t_2(1/e)`.
    pub beta_product: f64,
    /// `α_2 t_2(1/e) − 1/2`.
    pub slack: f64,
    pub holds: bool,
}

/// Evaluates `1/2 ≤ α_2 t_2(1/e) ≤ 2β_2 t_2(1/e)` with optimizer estimates.
/// Both constants are estimated from above, so only the left inequality is
/// asserted.
pub fn uncertainty_check(sg: &Semigroup, opts: &OptimOptions) -> Result<UncertaintyReport> {
    require_reversible(sg)?;
    let alpha2 = alpha_estimate(sg, 2.0, opts)?.value;
    let beta2 = beta_estimate(sg, 2.0, opts)?.value;
    let t2 = empirical_t2(sg, (-1f64).exp(), opts)?.value;
    let alpha_product = alpha2 * t2;
    let slack = alpha_product - 0.5;
    Ok(UncertaintyReport {
        alpha2,
        beta2,
        t2_time: t2,
        alpha_product,
        beta_product: 2.0 * beta2 * t2,
        slack,
        holds: slack >= -1e-9,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub alpha2: f64,
    pub beta2: f64,
    /// `2 β_2`.
    pub upper: f64,
    /// `β_2 log(log‖σ^{-1}‖_∞ / log(1 + 1/e))`, clamped at 0.
    pub lower: f64,
    pub clamped: bool,
    pub holds_upper: bool,
    pub holds_lower: bool,
    /// True when at least one constant comes from the optimizer.
    pub heuristic: bool,
}

/// `2β_2 ≥ α_2 ≥ β_2 log(log‖σ^{-1}‖_∞ / log(1 + 1/e))`. Depolarizing
/// generators use the closed-form `β_2`, and `α_2 = 1` at the maximally
/// mixed qubit; everything else falls back to estimates.
pub fn alpha2_beta2_sandwich_check(sg: &Semigroup, opts: &OptimOptions) -> Result<SandwichReport> {
    require_reversible(sg)?;
    let depolarizing = is_depolarizing(sg);
    let half = sg.dim() == 2 && max_abs_diff(sg.sigma(), &DensityMatrix::maximally_mixed(2)) < 1e-12;
    let (beta2, beta_exact) = if depolarizing {
        (beta2_depolarizing_closed_form(sg.sigma())?.value, true)
    } else {
        (beta_estimate(sg, 2.0, opts)?.value, false)
    };
    let (alpha2, alpha_exact) = if depolarizing && half { (1.0, true) } else { (alpha_estimate(sg, 2.0, opts)?.value, false) };
    let lm = sg.space().inverse_norm().ln();
    let raw = beta2 * (lm / (-1f64).exp().ln_1p()).ln();
    let (lower, clamped) = if raw.is_finite() && raw >= 0.0 { (raw, false) } else { (0.0, true) };
    let tol = if alpha_exact && beta_exact { 1e-12 } else { 2e-2 };
    Ok(SandwichReport {
        alpha2,
        beta2,
        upper: 2.0 * beta2,
        lower,
        clamped,
        holds_upper: 2.0 * beta2 >= alpha2 - tol,
        holds_lower: alpha2 >= lower - tol,
        heuristic: !(alpha_exact && beta_exact),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub d2_input_nats: f64,
    pub d2_output_nats: f64,
    /// `D_2(T(ρ)‖σ)/D_2(ρ‖σ)`; 0 when the input already sits at `σ`.
    pub factor: f64,
    pub certified_beta_d: Option<f64>,
    /// `D_2(T(ρ)‖σ) ≤ (1 − β)D_2(ρ‖σ)` for the certified `β`, if one is given.
    pub holds: Option<bool>,
}

/// One-step contraction of `D_2` towards the fixed point of `T`.
pub fn discrete_contraction_check(t: &Channel, rho: &DensityMatrix, certified_beta_d: Option<f64>) -> Result<ContractionReport> {
    let report = t.fixed_point()?;
    if !report.primitive {
        return Err(Error::NotPrimitive("contraction check needs a primitive channel".into()));
    }
    let sigma = report.sigma.expect("primitive report carries sigma");
    let d_in = sandwiched_divergence(rho, &sigma, 2.0)?;
    let d_out = sandwiched_divergence(&t.apply_state(rho)?, &sigma, 2.0)?;
    let factor = if d_in > 0.0 { d_out / d_in } else { 0.0 };
    let holds = certified_beta_d.map(|b| d_out <= (1.0 - b) * d_in + 1e-12);
    Ok(ContractionReport { d2_input_nats: d_in, d2_output_nats: d_out, factor, certified_beta_d, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::random_pauli_beta_d_lower;
    use crate::random::{random_density, seeded_rng};

    #[test]
    fn sandwich_at_maximally_mixed_qubit() {
        let sg = Semigroup::new(Liouvillian::depolarizing(&DensityMatrix::maximally_mixed(2)).unwrap()).unwrap();
        let r = alpha2_beta2_sandwich_check(&sg, &OptimOptions::default()).unwrap();
        assert!(!r.heuristic && r.holds_upper && r.holds_lower);
        assert!((r.upper - std::f64::consts::LOG2_E).abs() < 1e-12 && (r.lower - 0.573).abs() < 1e-3);
    }

    #[test]
    fn contraction_examples() {
        let mut rng = seeded_rng(3);
        let dep = Channel::completely_depolarizing(2);
        let rho = random_density(2, &mut rng);
        assert!(discrete_contraction_check(&dep, &rho, None).unwrap().d2_output_nats.abs() < 1e-12);
        let pauli = Channel::random_pauli(2).unwrap();
        let b = random_pauli_beta_d_lower(2).unwrap();
        for _ in 0..10 {
            let rho = random_density(4, &mut rng);
            let r = discrete_contraction_check(&pauli, &rho, Some(b)).unwrap();
            assert_eq!(r.holds, Some(true));
            assert!(r.factor <= 0.875 + 1e-12);
        }
    }
}
