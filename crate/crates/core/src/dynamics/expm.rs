//! Matrix exponential of superoperator matrices.
//!
//! Diagonalizable inputs go through a complex Schur form and an explicit
//! eigenvector basis. When that basis is ill-conditioned (condition number
//! above [`EIG_COND_LIMIT`]) or the reconstruction residual is too large,
//! the plan falls back to Padé scaling and squaring.

use nalgebra::Schur;
use serde::Serialize;

use crate::opalg::matrix::{c64, max_abs, CMat, C64};
use crate::random::{ginibre, seeded_rng};

pub const EIG_COND_LIMIT: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpmRoute {
    Eigen,
    Pade,
}

/// Reusable factorization for evaluating `exp(t M)` at many times.
#[derive(Debug, Clone)]
pub struct ExpmPlan {
    route: ExpmRoute,
    matrix: CMat,
    eig: Option<(Vec<C64>, CMat, CMat)>,
    cond: f64,
}

impl ExpmPlan {
    pub fn new(m: &CMat) -> Self {
        match eigen_basis(m) {
            Some((vals, v, vinv, cond)) => {
                Self { route: ExpmRoute::Eigen, matrix: m.clone(), eig: Some((vals, v, vinv)), cond }
            }
            None => Self { route: ExpmRoute::Pade, matrix: m.clone(), eig: None, cond: f64::INFINITY },
        }
    }

    pub fn route(&self) -> ExpmRoute {
        self.route
    }

    /// Condition number of the eigenvector basis (infinite on the Padé route).
    pub fn condition(&self) -> f64 {
        self.cond
    }

    pub fn at(&self, t: f64) -> CMat {
        match &self.eig {
            Some((vals, v, vinv)) => {
                let n = vals.len();
                let mut scaled = v.clone();
                for (c, lam) in vals.iter().enumerate() {
                    let e = (lam * c64(t, 0.0)).exp();
                    for r in 0..n {
                        scaled[(r, c)] *= e;
                    }
                }
                scaled * vinv
            }
            None => (&self.matrix * c64(t, 0.0)).exp(),
        }
    }
}

/// `exp(M)` together with the route that produced it.
pub fn expm(m: &CMat) -> (CMat, ExpmRoute) {
    let plan = ExpmPlan::new(m);
    (plan.at(1.0), plan.route)
}

/// Eigenvalues of a general complex matrix from its Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let (_, t) = schur(m);
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Complex Schur form `M = Q T Q†`. The QR iteration can stall on highly
/// structured inputs; those are retried after a fixed unitary similarity.
pub fn schur(m: &CMat) -> (CMat, CMat) {
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, 5000) {
        return s.unpack();
    }
    let n = m.nrows();
    let mut rng = seeded_rng(0x5c4u64);
    for _ in 0..8 {
        let u = ginibre(n, n, &mut rng).qr().q();
        let rotated = u.adjoint() * m * &u;
        if let Some(s) = Schur::try_new(rotated, f64::EPSILON, 5000) {
            let (q, t) = s.unpack();
            return (u * q, t);
        }
    }
    panic!("Schur iteration failed to converge");
}

fn eigen_basis(m: &CMat) -> Option<(Vec<C64>, CMat, CMat, f64)> {
    let n = m.nrows();
    if n == 0 {
        return None;
    }
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let (q, t) = schur(m);
    for c in 0..n {
        for r in c + 1..n {
            if t[(r, c)].norm() > 1e-12 * scale {
                return None;
            }
        }
    }
    let vals: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    // eigenvectors of the triangular factor by back substitution
    let tiny = 1e-14 * scale;
    let mut w = CMat::zeros(n, n);
    for k in 0..n {
        w[(k, k)] = c64(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::default();
            for j in i + 1..=k {
                acc += t[(i, j)] * w[(j, k)];
            }
            let mut den = vals[k] - vals[i];
            if den.norm() < tiny {
                den = c64(tiny, 0.0);
            }
            w[(i, k)] = acc / den;
        }
        let norm = w.column(k).norm();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        let mut col = w.column_mut(k);
        col /= c64(norm, 0.0);
    }
    let v = q * w;
    let sv = v.clone().singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let cond = smax / smin;
    if !(cond <= EIG_COND_LIMIT) {
        return None;
    }
    let vinv = v.clone().try_inverse()?;
    let mut lam_v = v.clone();
    for (c, lam) in vals.iter().enumerate() {
        for r in 0..n {
            lam_v[(r, c)] *= lam;
        }
    }
    let resid = max_abs(&(m * &v - lam_v));
    if resid > 1e-10 * scale * cond.max(1.0).sqrt() {
        return None;
    }
    Some((vals, v, vinv, cond))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::matrix::{from_real_rows, max_abs_diff};

    #[test]
    fn diagonal_exponential() {
        let m = from_real_rows(&[&[-1.0, 0.0], &[0.0, 0.5]]);
        let (e, route) = expm(&m);
        assert_eq!(route, ExpmRoute::Eigen);
        assert!((e[(0, 0)].re - (-1.0f64).exp()).abs() < 1e-14);
        assert!((e[(1, 1)].re - 0.5f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn jordan_block_falls_back_to_pade() {
        let m = from_real_rows(&[&[2.0, 1.0], &[0.0, 2.0]]);
        let (e, route) = expm(&m);
        assert_eq!(route, ExpmRoute::Pade);
        let e2 = 2.0f64.exp();
        let expect = from_real_rows(&[&[e2, e2], &[0.0, e2]]);
        assert!(max_abs_diff(&e, &expect) < 1e-12 * e2);
    }

    #[test]
    fn routes_agree_on_random_matrices() {
        let mut rng = seeded_rng(3);
        for _ in 0..5 {
            let m = ginibre(6, 6, &mut rng) * c64(0.3, 0.0);
            let plan = ExpmPlan::new(&m);
            assert_eq!(plan.route(), ExpmRoute::Eigen);
            let pade = m.exp();
            assert!(max_abs_diff(&plan.at(1.0), &pade) < 1e-10);
        }
    }

    #[test]
    fn schur_eigenvalues_of_rotation() {
        let m = from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let mut ev = eigenvalues(&m);
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - c64(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - c64(0.0, 1.0)).norm() < 1e-12);
    }
}
