//! Noncommutative weighted l_p spaces over a full-rank reference state.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use super::matrix::{
    check_dim, hermitian_deviation, max_abs, CMat, DensityMatrix, Eigh, C64, TOL_HERMITIAN,
    TOL_POSITIVE,
};
use crate::error::{invalid, Error, Result};

/// Exponent of a weighted norm. `Infinity` is a dedicated sentinel rather
/// than a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl From<f64> for Exponent {
    fn from(p: f64) -> Self {
        if p == f64::INFINITY {
            Exponent::Infinity
        } else {
            Exponent::Finite(p)
        }
    }
}

/// A full-rank state `σ` together with its eigendecomposition, used to
/// evaluate `σ^r`, the weighting operator `Γ^r_σ`, weighted norms and the
/// power operator.
pub struct WeightedSpace {
    sigma: DensityMatrix,
    eig: Eigh,
    powers: RwLock<HashMap<u64, Arc<CMat>>>,
}

impl fmt::Debug for WeightedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightedSpace").field("sigma", &self.sigma).field("eigenvalues", &self.eig.values).finish()
    }
}

impl Clone for WeightedSpace {
    fn clone(&self) -> Self {
        Self { sigma: self.sigma.clone(), eig: self.eig.clone(), powers: RwLock::new(HashMap::new()) }
    }
}

impl WeightedSpace {
    pub fn new(sigma: DensityMatrix) -> Result<Self> {
        let eig = Eigh::new(&sigma);
        if !(eig.min() > 0.0) {
            return Err(Error::NotFullRank(eig.min()));
        }
        Ok(Self { sigma, eig, powers: RwLock::new(HashMap::new()) })
    }

    pub fn from_matrix(sigma: CMat) -> Result<Self> {
        Self::new(DensityMatrix::new(sigma)?)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::new(DensityMatrix::maximally_mixed(d)).expect("maximally mixed state is full rank")
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DensityMatrix::from_diagonal(diag)?)
    }

    pub fn dim(&self) -> usize {
        self.eig.values.len()
    }

    pub fn sigma(&self) -> &DensityMatrix {
        &self.sigma
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.eig.vectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.min()
    }

    /// `‖σ^{-1}‖_∞`.
    pub fn inverse_norm(&self) -> f64 {
        1.0 / self.eig.min()
    }

    /// Projector onto an eigenvector of the smallest eigenvalue of `σ`.
    pub fn min_eigenprojector(&self) -> CMat {
        let v = self.eig.vector(0);
        &v * v.adjoint()
    }

    /// `σ^r = U diag(s_i^r) U†`, cached per exponent.
    pub fn frac_power(&self, r: f64) -> Arc<CMat> {
        let key = r.to_bits();
        if let Some(m) = self.powers.read().expect("power cache poisoned").get(&key) {
            return Arc::clone(m);
        }
        let m = Arc::new(if r == 0.0 { super::matrix::identity(self.dim()) } else { self.eig.map(|s| s.powf(r)) });
        self.powers.write().expect("power cache poisoned").entry(key).or_insert(m).clone()
    }

    /// `Γ^r_σ(X) = σ^{r/2} X σ^{r/2}`.
    pub fn gamma(&self, x: &CMat, r: f64) -> Result<CMat> {
        check_dim(x, self.dim())?;
        Ok(self.gamma_unchecked(x, r))
    }

    pub(crate) fn gamma_unchecked(&self, x: &CMat, r: f64) -> CMat {
        if r == 0.0 {
            return x.clone();
        }
        let s = self.frac_power(r / 2.0);
        &*s * x * &*s
    }

    /// Relative density `Γ^{-1}_σ(ρ)`.
    pub fn relative_density(&self, rho: &CMat) -> Result<CMat> {
        self.gamma(rho, -1.0)
    }

    /// `‖X‖_{p,σ} = tr[|σ^{1/2p} X σ^{1/2p}|^p]^{1/p}`; for `p = ∞` the
    /// operator norm of `X`.
    pub fn weighted_norm(&self, x: &CMat, p: impl Into<Exponent>) -> Result<f64> {
        match p.into() {
            Exponent::Infinity => {
                check_dim(x, self.dim())?;
                Ok(super::matrix::operator_norm(x))
            }
            Exponent::Finite(p) => Ok(self.weighted_norm_pow(x, p)?.powf(1.0 / p)),
        }
    }

    /// `‖X‖^p_{p,σ}` without the final root.
    pub fn weighted_norm_pow(&self, x: &CMat, p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(invalid(format!("weighted norm exponent must be a finite p >= 1, got {p}")));
        }
        check_dim(x, self.dim())?;
        Ok(self.norm_pow_unchecked(x, p))
    }

    pub(crate) fn norm_pow_unchecked(&self, x: &CMat, p: f64) -> f64 {
        let a = self.gamma_unchecked(x, 1.0 / p);
        schatten_pow(&a, p)
    }

    /// `⟨X, Y⟩_σ = tr[Γ_σ(X†) Y]`.
    pub fn weighted_inner(&self, x: &CMat, y: &CMat) -> Result<C64> {
        check_dim(x, self.dim())?;
        check_dim(y, self.dim())?;
        Ok(self.inner_unchecked(x, y))
    }

    pub(crate) fn inner_unchecked(&self, x: &CMat, y: &CMat) -> C64 {
        let gx = self.gamma_unchecked(&x.adjoint(), 1.0);
        // tr[A B] = Σ_ij A_ij B_ji
        let n = x.nrows();
        let mut acc = C64::default();
        for i in 0..n {
            for j in 0..n {
                acc += gx[(i, j)] * y[(j, i)];
            }
        }
        acc
    }

    /// Power operator `I_{p,q}(X) = Γ^{-1/p}_σ(|Γ^{1/q}_σ(X)|^{q/p})` for
    /// positive `X`.
    pub fn power_operator(&self, x: &CMat, p: f64, q: f64) -> Result<CMat> {
        if !(p >= 1.0 && q >= 1.0) || !p.is_finite() || !q.is_finite() {
            return Err(invalid(format!("power operator needs finite p, q >= 1, got ({p}, {q})")));
        }
        check_dim(x, self.dim())?;
        check_positive(x)?;
        Ok(self.power_operator_unchecked(x, p, q))
    }

    pub(crate) fn power_operator_unchecked(&self, x: &CMat, p: f64, q: f64) -> CMat {
        let inner = self.gamma_unchecked(x, 1.0 / q);
        let r = q / p;
        let powered = Eigh::new(&inner).map(|v| v.abs().powf(r));
        self.gamma_unchecked(&powered, -1.0 / p)
    }
}

/// `tr |A|^p`, using the spectrum when `A` is Hermitian and singular values
/// otherwise.
pub(crate) fn schatten_pow(a: &CMat, p: f64) -> f64 {
    if hermitian_deviation(a) <= TOL_HERMITIAN * (1.0 + max_abs(a)) {
        Eigh::new(a).values.iter().map(|v| v.abs().powf(p)).sum()
    } else {
        let gram = a.adjoint() * a;
        Eigh::new(&gram).values.iter().map(|v| v.max(0.0).powf(p / 2.0)).sum()
    }
}

pub(crate) fn check_positive(x: &CMat) -> Result<()> {
    let dev = hermitian_deviation(x);
    if dev > TOL_HERMITIAN * (1.0 + max_abs(x)) {
        return Err(Error::NotHermitian(dev));
    }
    let min = Eigh::new(x).min();
    if min < -TOL_POSITIVE {
        return Err(Error::NotPositive(min));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::matrix::{from_real_diagonal, identity, max_abs_diff, pauli};
    use crate::random::{random_full_rank_density, random_hermitian, random_positive_definite, seeded_rng};
    use proptest::prelude::*;

    fn qubit_sigma() -> WeightedSpace {
        WeightedSpace::from_diagonal(&[0.75, 0.25]).unwrap()
    }

    #[test]
    fn frac_power_examples() {
        let ws = qubit_sigma();
        assert!(max_abs_diff(&ws.frac_power(0.0), &identity(2)) < 1e-15);
        assert!(max_abs_diff(&ws.frac_power(1.0), ws.sigma()) < 1e-14);
        let expect = from_real_diagonal(&[0.75f64.powf(-0.5), 2.0]);
        assert!(max_abs_diff(&ws.frac_power(-0.5), &expect) < 1e-12);
        assert!((expect[(0, 0)].re - 1.1547005383792515).abs() < 1e-12);
    }

    #[test]
    fn gamma_examples() {
        let ws = qubit_sigma();
        assert!(max_abs_diff(&ws.gamma(&identity(2), 1.0).unwrap(), ws.sigma()) < 1e-14);
        let g2 = ws.gamma(&identity(2), 2.0).unwrap();
        assert!(max_abs_diff(&g2, &from_real_diagonal(&[0.5625, 0.0625])) < 1e-14);
        assert!(ws.gamma(&identity(3), 1.0).is_err());
    }

    #[test]
    fn gamma_inverse_pair_on_random_hermitian() {
        let mut rng = seeded_rng(11);
        let ws = WeightedSpace::new(random_full_rank_density(3, 0.05, &mut rng)).unwrap();
        let x = random_hermitian(3, &mut rng);
        let back = ws.gamma(&ws.gamma(&x, 1.0).unwrap(), -1.0).unwrap();
        assert!(max_abs_diff(&back, &x) < 1e-12);
    }

    #[test]
    fn weighted_norm_examples() {
        let ws = qubit_sigma();
        for p in [1.0, 1.5, 2.0, 7.0] {
            assert!((ws.weighted_norm(&identity(2), p).unwrap() - 1.0).abs() < 1e-14);
        }
        let inv = from_real_diagonal(&[1.0 / 0.75, 4.0]);
        assert!((ws.weighted_norm(&inv, 1.0).unwrap() - 2.0).abs() < 1e-13);

        let half = WeightedSpace::maximally_mixed(2);
        let x = from_real_diagonal(&[1.5, 0.5]);
        assert!((half.weighted_norm(&x, 2.0).unwrap() - 1.25f64.sqrt()).abs() < 1e-14);
        assert!((half.weighted_norm(&x, f64::INFINITY).unwrap() - 1.5).abs() < 1e-14);
        assert!(matches!(half.weighted_norm(&x, 0.5), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn weighted_inner_examples() {
        let half = WeightedSpace::maximally_mixed(2);
        assert!((half.weighted_inner(&identity(2), &identity(2)).unwrap().re - 1.0).abs() < 1e-15);
        assert!(half.weighted_inner(&pauli(3), &identity(2)).unwrap().norm() < 1e-15);
        let mut rng = seeded_rng(5);
        let ws = WeightedSpace::new(random_full_rank_density(3, 0.05, &mut rng)).unwrap();
        let x = random_hermitian(3, &mut rng);
        let ip = ws.weighted_inner(&x, &x).unwrap();
        assert!(ip.im.abs() < 1e-13);
        assert!((ip.re - ws.weighted_norm(&x, 2.0).unwrap().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn power_operator_examples() {
        let ws = qubit_sigma();
        let x = from_real_diagonal(&[1.2, 0.4]);
        let i21 = ws.power_operator(&x, 2.0, 1.0).unwrap();
        let lhs = ws.weighted_norm(&i21, 2.0).unwrap().powi(2);
        let rhs = ws.weighted_norm(&x, 1.0).unwrap();
        assert!((lhs - rhs).abs() <= 1e-9 * rhs);
        assert!(max_abs_diff(&ws.power_operator(&identity(2), 3.0, 1.5).unwrap(), &identity(2)) < 1e-13);
        assert!(max_abs_diff(&ws.power_operator(&x, 2.5, 2.5).unwrap(), &x) < 1e-13);
        assert!(matches!(ws.power_operator(&pauli(3), 2.0, 1.0), Err(Error::NotPositive(_))));
    }

    #[test]
    fn rejects_singular_sigma() {
        assert!(matches!(WeightedSpace::from_diagonal(&[1.0, 0.0]), Err(Error::NotFullRank(_))));
    }

    #[test]
    fn cache_is_shared_across_threads() {
        let ws = Arc::new(qubit_sigma());
        let handles: Vec<_> = (0..4)
            .map(|k| {
                let ws = Arc::clone(&ws);
                std::thread::spawn(move || ws.frac_power(0.25 * k as f64)[(0, 0)].re)
            })
            .collect();
        for (k, h) in handles.into_iter().enumerate() {
            assert!((h.join().unwrap() - 0.75f64.powf(0.25 * k as f64)).abs() < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn norms_are_monotone_in_p(seed in 0u64..10_000, d in 2usize..4) {
            let mut rng = seeded_rng(seed);
            let ws = WeightedSpace::new(random_full_rank_density(d, 0.02, &mut rng)).unwrap();
            let x = random_positive_definite(d, &mut rng);
            let grid = [1.0, 1.3, 2.0, 3.5, 8.0];
            for w in grid.windows(2) {
                let lo = ws.weighted_norm(&x, w[0]).unwrap();
                let hi = ws.weighted_norm(&x, w[1]).unwrap();
                prop_assert!(lo <= hi * (1.0 + 1e-12));
            }
            let n1 = ws.weighted_norm(&x, 1.0).unwrap();
            let tr = crate::opalg::matrix::trace(&ws.gamma(&x, 1.0).unwrap()).re;
            prop_assert!((n1 - tr).abs() < 1e-12 * (1.0 + tr));
        }

        #[test]
        fn half_gamma_is_an_isometry(seed in 0u64..10_000) {
            let mut rng = seeded_rng(seed);
            let ws = WeightedSpace::new(random_full_rank_density(3, 0.02, &mut rng)).unwrap();
            let x = random_hermitian(3, &mut rng);
            let y = random_hermitian(3, &mut rng);
            let lhs = ws.weighted_inner(&x, &y).unwrap();
            let rhs = crate::opalg::matrix::hs_inner(&ws.gamma(&x, 0.5).unwrap(), &ws.gamma(&y, 0.5).unwrap());
            prop_assert!((lhs - rhs).norm() < 1e-10);
        }

        #[test]
        fn power_operator_norm_identity(seed in 0u64..10_000, p in 1.0f64..6.0, q in 1.0f64..6.0) {
            let mut rng = seeded_rng(seed);
            let ws = WeightedSpace::new(random_full_rank_density(2 + (seed % 2) as usize, 0.02, &mut rng)).unwrap();
            let x = random_positive_definite(ws.dim(), &mut rng);
            let lhs = ws.weighted_norm_pow(&ws.power_operator(&x, p, q).unwrap(), p).unwrap();
            let rhs = ws.weighted_norm_pow(&x, q).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
        }
    }
}
