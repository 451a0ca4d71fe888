//! Property suites run by `rsg verify`. Each check reduces a family of
//! seeded instances to its worst slack and passes when
//! `slack ≥ −tolerance`; equalities report `slack = −error`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bounds::{
    capacity_decay_curve, discrete_contraction_check, empirical_t1, empirical_t2, k_constant, random_pauli_beta_d_lower,
    succ_prob_bound, t1_bound_from_beta, t2_bound_from_beta2, uncertainty_check,
};
use crate::constants::{alpha_estimate, beta2_depolarizing_closed_form, beta_discrete, beta_estimate, spectral_gap, taylor_expansion_check};
use crate::divergence::{kl_divergence, max_divergence, sandwiched_divergence, trace_distance};
use crate::dynamics::{Channel, Liouvillian, Semigroup};
use crate::error::{invalid, Result};
use crate::functionals::{ent_p, entropy_production, kappa, rothaus_check, variance, dirichlet_form};
use crate::opalg::matrix::{c64, ket_bra, DensityMatrix, CVec};
use crate::opalg::WeightedSpace;
use crate::optim::OptimOptions;
use crate::random::{random_density, random_full_rank_density, random_positive_definite, seeded_rng, SeededRng};

/// Environment variable replacing every check's tolerance.
pub const TOLERANCE_ENV: &str = "RSG_VERIFY_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Ordering,
    Pinsker,
    EntropyProduction,
    Taylor,
    GapBounds,
    Mixing,
    Discrete,
    StrongConverse,
    Rothaus,
    All,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Ordering,
        Suite::Pinsker,
        Suite::EntropyProduction,
        Suite::Taylor,
        Suite::GapBounds,
        Suite::Mixing,
        Suite::Discrete,
        Suite::StrongConverse,
        Suite::Rothaus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ordering => "ordering",
            Suite::Pinsker => "pinsker",
            Suite::EntropyProduction => "entropy-production",
            Suite::Taylor => "taylor",
            Suite::GapBounds => "gap-bounds",
            Suite::Mixing => "mixing",
            Suite::Discrete => "discrete",
            Suite::StrongConverse => "strong-converse",
            Suite::Rothaus => "rothaus",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| invalid(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub check: String,
    pub passed: bool,
    pub slack: f64,
    pub tolerance: f64,
    pub instances: usize,
}

struct Recorder {
    suite: &'static str,
    override_tol: Option<f64>,
    out: Vec<CheckResult>,
}

impl Recorder {
    fn push(&mut self, check: &str, slacks: &[f64], tolerance: f64) {
        let tolerance = self.override_tol.unwrap_or(tolerance);
        let slack = slacks.iter().cloned().fold(f64::INFINITY, |a, b| if b.is_nan() { f64::NAN } else { a.min(b) });
        self.out.push(CheckResult {
            suite: self.suite,
            check: check.to_string(),
            passed: slack >= -tolerance,
            slack,
            tolerance,
            instances: slacks.len(),
        });
    }
}

fn tolerance_override() -> Result<Option<f64>> {
    match std::env::var(TOLERANCE_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| invalid(format!("{TOLERANCE_ENV} must be a number, got '{s}'"))),
        Err(_) => Ok(None),
    }
}

/// Runs one suite (or every suite) and returns its checks in a fixed order.
pub fn run_suite(suite: Suite, seed: u64, opts: &OptimOptions) -> Result<Vec<CheckResult>> {
    let override_tol = tolerance_override()?;
    let suites: Vec<Suite> = if suite == Suite::All { Suite::ALL.to_vec() } else { vec![suite] };
    let mut out = Vec::new();
    for s in suites {
        let mut rec = Recorder { suite: s.name(), override_tol, out: Vec::new() };
        let mut rng = seeded_rng(seed);
        let opts = OptimOptions { seed, ..*opts };
        match s {
            Suite::Ordering => ordering(&mut rec, &mut rng)?,
            Suite::Pinsker => pinsker(&mut rec, &mut rng)?,
            Suite::EntropyProduction => production(&mut rec, &mut rng)?,
            Suite::Taylor => taylor(&mut rec)?,
            Suite::GapBounds => gap_bounds(&mut rec, &mut rng, &opts)?,
            Suite::Mixing => mixing(&mut rec, &opts)?,
            Suite::Discrete => discrete(&mut rec, &mut rng, &opts)?,
            Suite::StrongConverse => strong_converse(&mut rec, &mut rng)?,
            Suite::Rothaus => rothaus(&mut rec, &mut rng)?,
            Suite::All => unreachable!(),
        }
        out.extend(rec.out);
    }
    Ok(out)
}

fn random_pair(rng: &mut SeededRng) -> (DensityMatrix, DensityMatrix) {
    let d = 2 + rand::Rng::random_range(rng, 0..2usize);
    (random_density(d, rng), random_full_rank_density(d, 0.02, rng))
}

fn ordering(rec: &mut Recorder, rng: &mut SeededRng) -> Result<()> {
    let mut slacks = Vec::new();
    for _ in 0..50 {
        let (rho, sigma) = random_pair(rng);
        let mut chain = vec![kl_divergence(&rho, &sigma)?];
        for p in [1.5, 2.0, 5.0] {
            chain.push(sandwiched_divergence(&rho, &sigma, p)?);
        }
        chain.push(max_divergence(&rho, &sigma)?);
        slacks.extend(chain.windows(2).map(|w| w[1] - w[0]));
    }
    rec.push("divergences_increase_in_p", &slacks, 1e-9);
    Ok(())
}

fn pinsker(rec: &mut Recorder, rng: &mut SeededRng) -> Result<()> {
    let mut slacks = Vec::new();
    for _ in 0..50 {
        let (rho, sigma) = random_pair(rng);
        let t = trace_distance(&rho, &sigma)?;
        for p in [1.0, 2.0, 5.0, f64::INFINITY] {
            slacks.push(sandwiched_divergence(&rho, &sigma, p)? - 0.5 * t * t);
        }
    }
    rec.push("half_trace_distance_squared_below_divergence", &slacks, 1e-9);
    Ok(())
}

fn production(rec: &mut Recorder, rng: &mut SeededRng) -> Result<()> {
    let (mut routes, mut fd, mut sign, mut nonneg, mut dvar) = (vec![], vec![], vec![], vec![], vec![]);
    for _ in 0..10 {
        let sg = Semigroup::new(Liouvillian::random_primitive(2, 2, rng))?;
        let rho = random_full_rank_density(2, 0.05, rng);
        let h = 1e-5;
        let plus = DensityMatrix::new(sg.propagator(h).apply(&rho)?)?;
        let minus = DensityMatrix::new(sg.propagator(-h).apply(&rho)?)?;
        for p in [1.5, 2.0, 3.0] {
            let v = entropy_production(&sg, &rho, p)?;
            routes.push(-v.diagnostics["route_gap"]);
            sign.push(-v.value);
            let oracle = (sandwiched_divergence(&plus, sg.sigma(), p)? - sandwiched_divergence(&minus, sg.sigma(), p)?) / (2.0 * h);
            fd.push(-(v.value - oracle).abs() / v.value.abs().max(1e-12));
        }
        let x = random_positive_definite(2, rng);
        for p in [1.0, 1.5, 2.0, 3.0] {
            nonneg.push(dirichlet_form(&sg, &x, p)?.value);
        }
        let var = |t: f64| variance(sg.space(), &sg.evolve_relative(&x, t)).map(|v| v.value);
        let slope = (var(h)? - var(-h)?) / (2.0 * h);
        let e2 = dirichlet_form(&sg, &x, 2.0)?.value;
        dvar.push(-(slope + 2.0 * e2).abs());
    }
    rec.push("trace_form_matches_dirichlet_form", &routes, 1e-10);
    rec.push("matches_central_difference_relative", &fd, 1e-5);
    rec.push("production_nonpositive", &sign, 1e-9);
    rec.push("dirichlet_forms_nonnegative", &nonneg, 1e-9);
    rec.push("variance_derivative_is_minus_two_e2", &dvar, 1e-5);
    Ok(())
}

fn taylor(rec: &mut Recorder) -> Result<()> {
    let grid = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
    let (mut e, mut k, mut lim) = (vec![], vec![], vec![]);
    for a in [0.5, 0.25, 0.1] {
        let sg = Semigroup::new(Liouvillian::depolarizing(&DensityMatrix::from_diagonal(&[1.0 - a, a])?)?)?;
        for p in [1.5, 2.0, 3.0] {
            let r = taylor_expansion_check(&sg, p, &grid)?;
            e.push(r.dirichlet_slope - 2.9);
            k.push(r.kappa_slope - 2.9);
            lim.push(-(r.rows[grid.len() - 1].ratio - r.eigenvalue).abs());
        }
    }
    rec.push("dirichlet_residual_slope_at_least_2.9", &e, 0.0);
    rec.push("kappa_residual_slope_at_least_2.9", &k, 0.0);
    rec.push("ratio_at_1e-3_near_gap", &lim, 1e-3);
    Ok(())
}

fn gap_bounds(rec: &mut Recorder, rng: &mut SeededRng, opts: &OptimOptions) -> Result<()> {
    let (mut witness, mut below, mut lower, mut upper, mut alpha) = (vec![], vec![], vec![], vec![], vec![]);
    for _ in 0..5 {
        let sg = Semigroup::new(Liouvillian::random_primitive(2, 2, rng).reversibilize()?)?;
        let lambda = spectral_gap(&sg)?.value;
        let ratio = taylor_expansion_check(&sg, 2.0, &[1e-3])?.rows[0].ratio;
        let beta = beta_estimate(&sg, 2.0, opts)?.value;
        let m = sg.space().inverse_norm();
        witness.push(-(ratio - lambda).abs());
        below.push(ratio - beta);
        lower.push(beta - lambda * (1.0 - 1.0 / m) / m.ln());
        upper.push(lambda - beta);
        alpha.push(2.0 * beta - alpha_estimate(&sg, 2.0, opts)?.value);
    }
    rec.push("witness_ratio_near_gap", &witness, 1e-2);
    rec.push("beta2_below_witness_ratio", &below, 1e-6);
    rec.push("beta2_above_gap_lower_bound", &lower, 1e-9);
    rec.push("beta2_below_gap", &upper, 1e-3);
    rec.push("alpha2_below_twice_beta2", &alpha, 2e-2);
    Ok(())
}

fn mixing(rec: &mut Recorder, opts: &OptimOptions) -> Result<()> {
    let sigma = DensityMatrix::from_diagonal(&[0.75, 0.25])?;
    let sg = Semigroup::new(Liouvillian::depolarizing(&sigma)?)?;
    let beta = beta2_depolarizing_closed_form(&sigma)?.value;
    let m = sg.space().inverse_norm();
    let e1 = (-1f64).exp();
    let t2 = empirical_t2(&sg, e1, opts)?.value;
    rec.push("depolarizing_t2_closed_form", &[-(t2 - (1.0 + (m - 1.0).ln()) / 2.0).abs()], 1e-2);
    rec.push("t2_below_beta2_bound", &[t2_bound_from_beta2(beta, &sigma, e1)?.value - t2], 1e-2);
    let mut t1 = Vec::new();
    for eps in [0.3, 0.1, 0.03] {
        t1.push(t1_bound_from_beta(beta, &sigma, eps)?.value - empirical_t1(&sg, eps, opts)?.value);
    }
    rec.push("t1_below_beta2_bound", &t1, 1e-2);
    let rev = Semigroup::new(Liouvillian::depolarizing(&DensityMatrix::from_diagonal(&[0.9, 0.1])?)?)?;
    rec.push("alpha2_t2_at_least_half", &[uncertainty_check(&rev, opts)?.slack], 1e-9);
    Ok(())
}

fn discrete(rec: &mut Recorder, rng: &mut SeededRng, opts: &OptimOptions) -> Result<()> {
    let dep = beta_discrete(&Channel::completely_depolarizing(2), opts)?.value;
    rec.push("depolarizing_beta_d", &[-(dep - 0.5 / 2f64.ln()).abs()], 1e-3);
    let nc = Channel::pauli_noncontractive();
    let up = DensityMatrix::basis_state(2, 0);
    let half = DensityMatrix::maximally_mixed(2);
    let gap = sandwiched_divergence(&nc.apply_state(&up)?, &half, 2.0)? - sandwiched_divergence(&up, &half, 2.0)?;
    rec.push("noncontractive_pure_state_keeps_d2", &[-gap.abs()], 1e-9);
    let pauli = Channel::random_pauli(2)?;
    let b = random_pauli_beta_d_lower(2)?;
    let mut slacks = Vec::new();
    for _ in 0..20 {
        let r = discrete_contraction_check(&pauli, &random_density(4, rng), Some(b))?;
        slacks.push((1.0 - b) - r.factor);
    }
    rec.push("random_pauli_contracts_by_7_8", &slacks, 1e-12);
    Ok(())
}

fn strong_converse(rec: &mut Recorder, rng: &mut SeededRng) -> Result<()> {
    let half = DensityMatrix::maximally_mixed(2);
    let v = succ_prob_bound(1.0, 10, 2.0, 0.5 / 2f64.ln(), 2.0, &half)?.value;
    rec.push("worked_example", &[-(v - 0.0379).abs()], 1e-3);
    let mut k = Vec::new();
    for lambda in [0.5, 1.0, 3.0] {
        k.push(-(k_constant(lambda, &half, 2)? - lambda / 2.0).abs());
    }
    rec.push("qubit_k_is_half_gap", &k, 0.0);
    let mut range = Vec::new();
    for _ in 0..1000 {
        let a: f64 = rand::Rng::random_range(rng, 0.01..0.99);
        let sigma = DensityMatrix::from_diagonal(&[a, 1.0 - a])?;
        let r = rand::Rng::random_range(rng, -5.0..5.0);
        let n = rand::Rng::random_range(rng, 1..50usize);
        let p = rand::Rng::random_range(rng, 1.01..10.0);
        let c = rand::Rng::random_range(rng, 1e-3..5.0);
        let t = rand::Rng::random_range(rng, 0.0..20.0);
        let b = succ_prob_bound(r, n, p, c, t, &sigma)?.value;
        range.push(b.min(1.0 - b));
    }
    rec.push("probabilities_in_unit_interval", &range, 0.0);
    let sg = Semigroup::new(Liouvillian::depolarizing(&half)?)?;
    let rows = capacity_decay_curve(&sg, 2.0, &[0.5, 1.0, 2.0], &[0.25, 0.5, 1.0], 10, None)?;
    let mono: Vec<f64> = rows.windows(2).filter(|w| w[0].t == w[1].t).map(|w| w[0].bound - w[1].bound).collect();
    rec.push("curve_decreasing_in_rate", &mono, 0.0);
    Ok(())
}

fn rothaus(rec: &mut Recorder, rng: &mut SeededRng) -> Result<()> {
    let (mut roth, mut var, mut ent) = (vec![], vec![], vec![]);
    for i in 0..50 {
        let d = 2 + i % 2;
        let space = WeightedSpace::new(random_full_rank_density(d, 0.02, rng))?;
        let y = random_positive_definite(d, rng);
        let x = &y / c64(space.weighted_norm(&y, 1.0)?, 0.0);
        roth.push(rothaus_check(&space, &x)?.slack);
        var.push(kappa(&space, &x, 2.0)?.value - variance(&space, &x)?.value);
        for p in [1.5, 2.0, 3.0] {
            ent.push(ent_p(&space, &x, p)?.value - kappa(&space, &x, p)?.value / p);
        }
    }
    let space = WeightedSpace::maximally_mixed(2);
    let mut v = CVec::zeros(2);
    v[0] = c64(1.0, 0.0);
    let x = crate::opalg::matrix::identity(2) + (ket_bra(&v) * c64(2.0, 0.0) - crate::opalg::matrix::identity(2)) * c64(0.1, 0.0);
    roth.push(rothaus_check(&space, &x)?.slack);
    rec.push("rothaus_inequality", &roth, 1e-8);
    rec.push("variance_below_kappa2", &var, 1e-8);
    rec.push("ent_p_above_kappa_p_over_p", &ent, 1e-8);
    Ok(())
}
