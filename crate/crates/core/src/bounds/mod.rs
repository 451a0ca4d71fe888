//! Closed-form mixing-time and strong-converse bounds, empirical mixing
//! times, and checks comparing the two.

mod checks;
mod mixing;

pub use checks::{
    alpha2_beta2_sandwich_check, discrete_contraction_check, uncertainty_check, ContractionReport, SandwichReport,
    UncertaintyReport,
};
pub use mixing::{empirical_t1, empirical_t2, worst_case_t1_distance, worst_case_t2_variance};

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use serde::Serialize;

use crate::constants::spectral_gap;
use crate::dynamics::Semigroup;
use crate::error::{invalid, Result};
use crate::opalg::matrix::{max_abs_diff, DensityMatrix};
use crate::opalg::WeightedSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Time,
    Steps,
    Probability,
    Nats,
    Bits,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub value: f64,
    pub units: Units,
    pub formula: &'static str,
    pub inputs: BTreeMap<String, f64>,
    pub clamped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    fn new(value: f64, units: Units, formula: &'static str, inputs: &[(&str, f64)]) -> Self {
        let inputs = inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Self { value, units, formula, inputs, clamped: false, note: None }
    }

    /// Replaces a negative value by 0 and records the clamp.
    fn clamp_nonnegative(mut self) -> Self {
        if !(self.value >= 0.0) {
            self.value = 0.0;
            self.clamped = true;
        }
        self
    }
}

fn log_inverse_norm(sigma: &DensityMatrix) -> Result<f64> {
    Ok(WeightedSpace::new(sigma.clone())?.inverse_norm().ln())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    check_positive("eps", eps)
}

/// `(1/2β_p) log(2 log‖σ^{-1}‖_∞ / ε²)`, clamped at 0.
pub fn t1_bound_from_beta(beta_p: f64, sigma: &DensityMatrix, eps: f64) -> Result<BoundReport> {
    check_positive("beta_p", beta_p)?;
    check_eps(eps)?;
    let lm = log_inverse_norm(sigma)?;
    let v = (2.0 * lm / (eps * eps)).ln() / (2.0 * beta_p);
    Ok(BoundReport::new(v, Units::Time, "t1_from_beta", &[("beta_p", beta_p), ("eps", eps), ("log_inverse_norm_nats", lm)])
        .clamp_nonnegative())
}

/// `(p/2α_p) log(2 log‖σ^{-1}‖_∞ / ε²)`, i.e. the β bound at `β = α_p/p`.
pub fn t1_bound_from_alpha(alpha_p: f64, p: f64, sigma: &DensityMatrix, eps: f64) -> Result<BoundReport> {
    check_positive("alpha_p", alpha_p)?;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("p must be finite and >= 1, got {p}")));
    }
    let mut r = t1_bound_from_beta(alpha_p / p, sigma, eps)?;
    r.formula = "t1_from_alpha";
    r.inputs.remove("beta_p");
    r.inputs.insert("alpha_p".into(), alpha_p);
    r.inputs.insert("p".into(), p);
    Ok(r)
}

/// `(1/2β_2) log(log‖σ^{-1}‖_∞ / log(1+ε))`, clamped at 0.
pub fn t2_bound_from_beta2(beta2: f64, sigma: &DensityMatrix, eps: f64) -> Result<BoundReport> {
    check_positive("beta2", beta2)?;
    check_eps(eps)?;
    let lm = log_inverse_norm(sigma)?;
    let v = (lm / eps.ln_1p()).ln() / (2.0 * beta2);
    Ok(BoundReport::new(v, Units::Time, "t2_from_beta2", &[("beta2", beta2), ("eps", eps), ("log_inverse_norm_nats", lm)])
        .clamp_nonnegative())
}

/// `−log(2 log‖σ^{-1}‖_∞ / ε²) / log(1 − β_D)` steps, clamped at 0.
pub fn discrete_t1_bound(beta_d: f64, sigma: &DensityMatrix, eps: f64) -> Result<BoundReport> {
    if !(beta_d > 0.0 && beta_d < 1.0) {
        return Err(invalid(format!("beta_D must lie in (0, 1), got {beta_d}")));
    }
    check_eps(eps)?;
    let lm = log_inverse_norm(sigma)?;
    let v = -(2.0 * lm / (eps * eps)).ln() / (-beta_d).ln_1p();
    Ok(BoundReport::new(v, Units::Steps, "discrete_t1", &[("beta_d", beta_d), ("eps", eps), ("log_inverse_norm_nats", lm)])
        .clamp_nonnegative())
}

/// Random Pauli form `−log(n/ε²) / log(1 − 1/2n²)` for `n` qubits. It
/// differs from [`discrete_t1_bound`] at `β_D = 1/2n²`, `σ = 1/2^n`, whose
/// log argument is `2n log 2/ε²`; both are reported side by side.
pub fn random_pauli_t1_bound(n: usize, eps: f64) -> Result<BoundReport> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    check_eps(eps)?;
    let nf = n as f64;
    let v = -(nf / (eps * eps)).ln() / (-1.0 / (2.0 * nf * nf)).ln_1p();
    Ok(BoundReport::new(v, Units::Steps, "random_pauli_t1", &[("n", nf), ("eps", eps)]).clamp_nonnegative())
}

/// `1/(2n²)`: certified lower bound on `β_D` of the `n`-qubit random Pauli channel.
pub fn random_pauli_beta_d_lower(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    Ok(1.0 - tensorized_contraction_factor(0.5, &vec![1.0 / n as f64; n])?)
}

/// `1 − q·(min p_i)²`.
pub fn tensorized_contraction_factor(q: f64, probs: &[f64]) -> Result<f64> {
    check_positive("q", q)?;
    if probs.is_empty() || probs.iter().any(|&p| !(p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(invalid("probabilities must be nonnegative and sum to 1"));
    }
    let pmin = probs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(1.0 - q * pmin * pmin)
}

/// `2^{−n((p−1)/p)(R − e^{−2ct} log₂‖σ^{-1}‖_∞)}` clamped to `[0, 1]`, with
/// `R` in bits per channel use.
pub fn succ_prob_bound(r_bits: f64, n: usize, p: f64, c: f64, t: f64, sigma: &DensityMatrix) -> Result<BoundReport> {
    check_positive("c", c)?;
    if !(p > 1.0) || !p.is_finite() {
        return Err(invalid(format!("p must be finite and > 1, got {p}")));
    }
    if !(t >= 0.0) {
        return Err(invalid(format!("t must be nonnegative, got {t}")));
    }
    if !r_bits.is_finite() {
        return Err(invalid("rate must be finite"));
    }
    let l2 = log_inverse_norm(sigma)? / LN_2;
    let exponent = -(n as f64) * ((p - 1.0) / p) * (r_bits - (-2.0 * c * t).exp() * l2);
    let raw = exponent.exp2();
    let mut r = BoundReport::new(
        raw.clamp(0.0, 1.0),
        Units::Probability,
        "succ_prob",
        &[("rate_bits", r_bits), ("n", n as f64), ("p", p), ("c", c), ("t_time", t), ("log2_inverse_norm_bits", l2)],
    );
    r.clamped = !(0.0..=1.0).contains(&raw);
    r.inputs.insert("exponent_bits".into(), exponent);
    Ok(r)
}

/// Lower bound on `β_2` of every tensor power from the gap `λ`:
/// `λ/2` for the maximally mixed qubit, `λ(1 − 2/d²)/(2(log 3 log(d²−1) + 2(1 − 2/d²)))`
/// for other maximally mixed `σ`, and `λ/(2(log(d⁴‖σ^{-1}‖_∞) + 11))` otherwise.
pub fn k_constant(lambda: f64, sigma: &DensityMatrix, d: usize) -> Result<f64> {
    check_positive("lambda", lambda)?;
    if sigma.dim() != d {
        return Err(crate::Error::DimensionMismatch { expected: d, found: sigma.dim() });
    }
    let unital = max_abs_diff(sigma, &DensityMatrix::maximally_mixed(d)) < 1e-12;
    let df = d as f64;
    Ok(if unital && d == 2 {
        lambda / 2.0
    } else if unital {
        let a = 1.0 - 2.0 / (df * df);
        lambda * a / (2.0 * (3f64.ln() * (df * df - 1.0).ln() + 2.0 * a))
    } else {
        k_constant_general(lambda, sigma)?
    })
}

/// The general branch of [`k_constant`], without the unital refinements.
pub fn k_constant_general(lambda: f64, sigma: &DensityMatrix) -> Result<f64> {
    check_positive("lambda", lambda)?;
    let df = sigma.dim() as f64;
    let m = WeightedSpace::new(sigma.clone())?.inverse_norm();
    Ok(lambda / (2.0 * ((df.powi(4) * m).ln() + 11.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub t: f64,
    pub r: f64,
    pub bound: f64,
}

/// `succ_prob_bound` over `t_grid × r_grid` (rates in bits). Without an
/// explicit `c` the gap route `c = k_constant(λ, σ, d)` is used, which
/// certifies `β_2` of all tensor powers and so needs `p = 2`.
pub fn capacity_decay_curve(
    sg: &Semigroup,
    p: f64,
    t_grid: &[f64],
    r_grid_bits: &[f64],
    n: usize,
    c: Option<f64>,
) -> Result<Vec<CurveRow>> {
    let c = match c {
        Some(c) => c,
        None => {
            if p != 2.0 {
                return Err(invalid("the gap route certifies c only for p = 2"));
            }
            k_constant(spectral_gap(sg)?.value, sg.sigma(), sg.dim())?
        }
    };
    let mut rows = Vec::with_capacity(t_grid.len() * r_grid_bits.len());
    for &t in t_grid {
        for &r in r_grid_bits {
            rows.push(CurveRow { t, r, bound: succ_prob_bound(r, n, p, c, t, sg.sigma())?.value });
        }
    }
    Ok(rows)
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("t,R,bound\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.t, r.r, r.bound));
    }
    out
}
