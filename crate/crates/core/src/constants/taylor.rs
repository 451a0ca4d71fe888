use serde::Serialize;

use super::gap_eigenpair;
use crate::dynamics::Semigroup;
use crate::error::{invalid, Error, Result};
use crate::functionals::{dirichlet_value, kappa_value};
use crate::opalg::matrix::{c64, identity, max_abs, Eigh};

fn check_args(x: f64, y: f64) -> Result<()> {
    if !(x > 0.0 && y > 0.0) {
        return Err(invalid(format!("divided differences need positive arguments, got ({x}, {y})")));
    }
    Ok(())
}

/// Residuals below this are roundoff: both functionals of `1 + εX` are
/// differences of order-one quantities, so their absolute error sits near
/// a few ulps of 1 regardless of `ε`.
pub const ROUNDOFF_FLOOR: f64 = 1e-14;

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-8 * x.max(y)
}

// Below this relative separation the closed forms lose digits to
// cancellation; the integral forms are evaluated by quadrature instead.
const QUADRATURE_SEPARATION: f64 = 0.2;

const GAUSS_LEGENDRE_8: [(f64, f64); 4] = [
    (0.183_434_642_495_65, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887),
    (0.796_666_477_413_627, 0.222_381_034_453_374),
    (0.960_289_856_497_536, 0.101_228_536_290_376),
];

/// `∫_0^1 w(s) ds` by 8-point Gauss-Legendre.
fn integrate_unit(w: impl Fn(f64) -> f64) -> f64 {
    GAUSS_LEGENDRE_8.iter().map(|&(t, c)| 0.5 * c * (w(0.5 * (1.0 - t)) + w(0.5 * (1.0 + t)))).sum()
}

fn nearby(x: f64, y: f64) -> bool {
    (x - y).abs() < QUADRATURE_SEPARATION * x.max(y)
}

/// `(x^{p−1} − y^{p−1})/(x − y)`, with `(p−1)x^{p−2}` on the diagonal.
pub fn divided_difference_f(p: f64, x: f64, y: f64) -> Result<f64> {
    check_args(x, y)?;
    Ok(f_unchecked(p, x, y))
}

fn f_unchecked(p: f64, x: f64, y: f64) -> f64 {
    if close(x, y) {
        (p - 1.0) * x.powf(p - 2.0)
    } else if nearby(x, y) {
        (p - 1.0) * integrate_unit(|s| (y + s * (x - y)).powf(p - 2.0))
    } else {
        (x.powf(p - 1.0) - y.powf(p - 1.0)) / (x - y)
    }
}

/// `((p−1)x^p − p x^{p−1} y + y^p)/(x − y)²`, with `p(p−1)x^{p−2}/2` on the
/// diagonal. The numerator is the first-order Taylor remainder of `t^p` at
/// `x`, so `g = p(p−1)∫_0^1 (1−s)(x + s(y−x))^{p−2} ds`.
pub fn divided_difference_g(p: f64, x: f64, y: f64) -> Result<f64> {
    check_args(x, y)?;
    Ok(if close(x, y) {
        p * (p - 1.0) * x.powf(p - 2.0) / 2.0
    } else if nearby(x, y) {
        p * (p - 1.0) * integrate_unit(|s| (1.0 - s) * (x + s * (y - x)).powf(p - 2.0))
    } else {
        ((p - 1.0) * x.powf(p) - p * x.powf(p - 1.0) * y + y.powf(p)) / ((x - y) * (x - y))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TaylorRow {
    pub eps: f64,
    pub dirichlet: f64,
    pub kappa: f64,
    pub dirichlet_predicted: f64,
    pub kappa_predicted: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaylorReport {
    pub p: f64,
    /// `λ_X` with `L̂(X) = −λ_X X`.
    pub eigenvalue: f64,
    /// `Σ_{ij} f_p(s_i, s_j)|b_ij|²`.
    pub coefficient: f64,
    pub rows: Vec<TaylorRow>,
    /// Least-squares slopes of `log|residual|` against `log ε`. Residuals
    /// below `ROUNDOFF_FLOOR` are dropped; a side with
    /// no residual left is exactly quadratic and gets an infinite slope.
    pub dirichlet_slope: f64,
    pub kappa_slope: f64,
}

/// Compares `E_p(1 + εX)` and `κ_p(1 + εX)` with their second-order terms,
/// `X` the gap eigenvector of a reversible `L̂` scaled to unit operator norm.
pub fn taylor_expansion_check(sg: &Semigroup, p: f64, eps_grid: &[f64]) -> Result<TaylorReport> {
    if !sg.is_primitive() {
        return Err(Error::NotPrimitive("expansion needs a primitive generator".into()));
    }
    if !sg.is_reversible() {
        return Err(Error::NotReversible);
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(invalid(format!("expansion needs finite p > 1, got {p}")));
    }
    if eps_grid.iter().any(|e| !(e.abs() < 1.0)) {
        return Err(invalid("every eps must satisfy |eps| < 1 so that 1 + eps X > 0"));
    }
    let (lambda, x) = gap_eigenpair(sg)?;
    let residual = sg.hat().apply_unchecked(&x) + &x * c64(lambda, 0.0);
    if max_abs(&residual) > 1e-8 {
        return Err(invalid("gap vector is not an eigenvector of the hat generator"));
    }
    let space = sg.space();
    let s = Eigh::new(&space.frac_power(1.0 / p));
    let u = &s.vectors;
    let b = u.adjoint() * space.gamma_unchecked(&x, 1.0 / p) * u;
    let d = sg.dim();
    let mut coefficient = 0.0;
    for i in 0..d {
        for j in 0..d {
            coefficient += f_unchecked(p, s.values[i], s.values[j]) * b[(i, j)].norm_sqr();
        }
    }
    let c = p / (2.0 * (p - 1.0));
    let rows: Vec<TaylorRow> = eps_grid
        .iter()
        .map(|&eps| {
            let y = identity(d) + &x * c64(eps, 0.0);
            let dirichlet = dirichlet_value(sg, &y, p);
            let kappa = kappa_value(space, &y, p);
            let kappa_predicted = c * eps * eps * coefficient;
            TaylorRow {
                eps,
                dirichlet,
                kappa,
                dirichlet_predicted: lambda * kappa_predicted,
                kappa_predicted,
                ratio: dirichlet / kappa,
            }
        })
        .collect();
    let slope = |pick: &dyn Fn(&TaylorRow) -> f64| {
        let live: Vec<&TaylorRow> = rows.iter().filter(|r| r.eps != 0.0).collect();
        let pts: Vec<(f64, f64)> = live
            .iter()
            .map(|r| (r.eps.abs().ln(), pick(r)))
            .filter(|&(_, res)| res.abs() > ROUNDOFF_FLOOR)
            .map(|(e, res)| (e, res.abs().ln()))
            .collect();
        if pts.is_empty() && !live.is_empty() {
            f64::INFINITY
        } else {
            fit_slope(&pts)
        }
    };
    let dirichlet_slope = slope(&|r| r.dirichlet - r.dirichlet_predicted);
    let kappa_slope = slope(&|r| r.kappa - r.kappa_predicted);
    Ok(TaylorReport { p, eigenvalue: lambda, coefficient, rows, dirichlet_slope, kappa_slope })
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Liouvillian;
    use crate::opalg::matrix::DensityMatrix;
    use crate::random::seeded_rng;
    use proptest::prelude::*;

    #[test]
    fn divided_difference_examples() {
        assert!((divided_difference_f(2.0, 3.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((divided_difference_g(2.0, 3.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((divided_difference_f(3.0, 2.0, 1.0).unwrap() - 3.0).abs() < 1e-15);
        assert!(divided_difference_f(2.0, 0.0, 1.0).is_err());
        let near = divided_difference_f(2.5, 1.0, 1.0 + 1e-9).unwrap();
        assert!((near - 1.5).abs() < 1e-12);
        // Either side of the quadrature switch agrees with the closed form.
        for (x, y) in [(1.0f64, 1.19f64), (1.0, 1.26), (4.0, 3.5)] {
            let exact = (x.powf(1.5) - y.powf(1.5)) / (x - y);
            assert!((divided_difference_f(2.5, x, y).unwrap() - exact).abs() < 1e-13);
            let g = (1.5 * x.powf(2.5) - 2.5 * x.powf(1.5) * y + y.powf(2.5)) / ((x - y) * (x - y));
            assert!((divided_difference_g(2.5, x, y).unwrap() - g).abs() < 1e-11);
        }
    }

    proptest! {
        #[test]
        fn g_symmetrizes_to_f(p in 1.01f64..6.0, x in 0.01f64..5.0, y in 0.01f64..5.0) {
            let lhs = divided_difference_g(p, x, y).unwrap() + divided_difference_g(p, y, x).unwrap();
            let rhs = p * divided_difference_f(p, x, y).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn depolarizing_expansion() {
        let sg = Semigroup::new(Liouvillian::depolarizing(&DensityMatrix::from_diagonal(&[0.7, 0.3]).unwrap()).unwrap()).unwrap();
        let grid = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
        for p in [1.5, 2.0, 3.0] {
            let r = taylor_expansion_check(&sg, p, &grid).unwrap();
            assert!(r.dirichlet_slope >= 2.9 && r.kappa_slope >= 2.9, "p={p}: {r:?}");
            assert!((r.rows[4].ratio - 1.0).abs() < 1e-3);
        }
        let zero = taylor_expansion_check(&sg, 2.0, &[0.0]).unwrap();
        assert!(zero.rows[0].dirichlet.abs() < 1e-15 && zero.rows[0].kappa.abs() < 1e-15);
    }

    #[test]
    fn rejects_irreversible() {
        let mut rng = seeded_rng(3);
        let l = Liouvillian::random_primitive(2, 2, &mut rng);
        let sg = Semigroup::new(l).unwrap();
        if !sg.is_reversible() {
            assert!(matches!(taylor_expansion_check(&sg, 2.0, &[1e-2]), Err(Error::NotReversible)));
        }
    }
}
