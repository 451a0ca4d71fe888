//! Linear maps on `d × d` matrices stored as `d² × d²` matrices acting on
//! column-stacked vectorizations.

use crate::error::{Error, Result};
use crate::opalg::matrix::{c64, check_dim, max_abs, CMat, C64};

use super::expm::{self, ExpmRoute};

#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMat,
}

/// Column-stacking: entry `(r, c)` of a `d × d` matrix sits at `r + c·d`.
#[inline]
pub fn vec_index(r: usize, c: usize, d: usize) -> usize {
    r + c * d
}

pub fn vectorize(x: &CMat) -> CMat {
    CMat::from_column_slice(x.len(), 1, x.as_slice())
}

pub fn unvectorize(v: &[C64], d: usize) -> CMat {
    CMat::from_column_slice(d, d, v)
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: CMat) -> Result<Self> {
        let n = dim * dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows().max(matrix.ncols()) });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("superoperator has non-finite entries".into()));
        }
        Ok(Self { dim, matrix })
    }

    /// Builds the matrix column by column from the images of the matrix
    /// units `E_rc`.
    pub fn from_fn(dim: usize, f: impl Fn(&CMat) -> CMat) -> Self {
        let n = dim * dim;
        let mut m = CMat::zeros(n, n);
        let mut unit = CMat::zeros(dim, dim);
        for c in 0..dim {
            for r in 0..dim {
                unit[(r, c)] = c64(1.0, 0.0);
                let img = f(&unit);
                m.column_mut(vec_index(r, c, dim)).copy_from_slice(img.as_slice());
                unit[(r, c)] = C64::default();
            }
        }
        Self { dim, matrix: m }
    }

    /// `X ↦ A X B`.
    pub fn sandwich(a: &CMat, b: &CMat) -> Self {
        Self { dim: a.nrows(), matrix: b.transpose().kronecker(a) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: CMat::identity(dim * dim, dim * dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, matrix: CMat::zeros(dim * dim, dim * dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        check_dim(x, self.dim)?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &CMat) -> CMat {
        let v = &self.matrix * CMat::from_column_slice(x.len(), 1, x.as_slice());
        unvectorize(v.as_slice(), self.dim)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(Self { dim: self.dim, matrix: &self.matrix * &other.matrix })
    }

    /// Hilbert-Schmidt adjoint: `tr[A† T(B)] = tr[T*(A)† B]`.
    pub fn adjoint(&self) -> Self {
        Self { dim: self.dim, matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { dim: self.dim, matrix: &self.matrix * c64(c, 0.0) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(Self { dim: self.dim, matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Choi matrix `Σ_ij E_ij ⊗ T(E_ij)`.
    pub fn choi(&self) -> CMat {
        let d = self.dim;
        let mut out = CMat::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let col = self.matrix.column(vec_index(i, j, d));
                for k in 0..d {
                    for l in 0..d {
                        out[(i * d + k, j * d + l)] = col[vec_index(k, l, d)];
                    }
                }
            }
        }
        out
    }

    /// `T ⊗ S` acting on the `d_T·d_S` dimensional product space.
    pub fn kron(&self, other: &Self) -> Self {
        let (d1, d2) = (self.dim, other.dim);
        let d = d1 * d2;
        let mut m = CMat::zeros(d * d, d * d);
        for b1 in 0..d1 {
            for a1 in 0..d1 {
                let row1 = vec_index(a1, b1, d1);
                for b1p in 0..d1 {
                    for a1p in 0..d1 {
                        let s1 = self.matrix[(row1, vec_index(a1p, b1p, d1))];
                        if s1 == C64::default() {
                            continue;
                        }
                        for b2 in 0..d2 {
                            for a2 in 0..d2 {
                                let row2 = vec_index(a2, b2, d2);
                                let out_row = vec_index(a1 * d2 + a2, b1 * d2 + b2, d);
                                for b2p in 0..d2 {
                                    for a2p in 0..d2 {
                                        let s2 = other.matrix[(row2, vec_index(a2p, b2p, d2))];
                                        let in_col = vec_index(a1p * d2 + a2p, b1p * d2 + b2p, d);
                                        m[(out_row, in_col)] += s1 * s2;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Self { dim: d, matrix: m }
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        expm::eigenvalues(&self.matrix)
    }

    /// `exp(t T)` and the route used.
    pub fn exp(&self, t: f64) -> (Self, ExpmRoute) {
        let (m, route) = expm::expm(&(&self.matrix * c64(t, 0.0)));
        (Self { dim: self.dim, matrix: m }, route)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// Largest `|tr T(E_ij) − tr E_ij|`.
    pub fn trace_defect(&self, preserving: bool) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for c in 0..d * d {
            let col = self.matrix.column(c);
            let tr: C64 = (0..d).map(|k| col[vec_index(k, k, d)]).sum();
            let target = if preserving && c % (d + 1) == 0 { 1.0 } else { 0.0 };
            worst = worst.max((tr - c64(target, 0.0)).norm());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::matrix::{max_abs_diff, pauli};
    use crate::random::{ginibre, seeded_rng};

    #[test]
    fn sandwich_matches_direct_product() {
        let mut rng = seeded_rng(1);
        let (a, b, x) = (ginibre(3, 3, &mut rng), ginibre(3, 3, &mut rng), ginibre(3, 3, &mut rng));
        let s = Superoperator::sandwich(&a, &b);
        assert!(max_abs_diff(&s.apply(&x).unwrap(), &(&a * &x * &b)) < 1e-12);
        let f = Superoperator::from_fn(3, |y| &a * y * &b);
        assert!(max_abs_diff(f.matrix(), s.matrix()) < 1e-13);
    }

    #[test]
    fn adjoint_is_hilbert_schmidt_adjoint() {
        let mut rng = seeded_rng(2);
        let t = Superoperator::from_matrix(2, ginibre(4, 4, &mut rng)).unwrap();
        let (a, b) = (ginibre(2, 2, &mut rng), ginibre(2, 2, &mut rng));
        let lhs = crate::opalg::matrix::hs_inner(&a, &t.apply(&b).unwrap());
        let rhs = crate::opalg::matrix::hs_inner(&t.adjoint().apply(&a).unwrap(), &b);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn identity_choi_is_unnormalized_maximally_entangled() {
        let c = Superoperator::identity(2).choi();
        assert_eq!(c[(0, 0)].re, 1.0);
        assert_eq!(c[(0, 3)].re, 1.0);
        assert_eq!(c[(3, 0)].re, 1.0);
        assert_eq!(c[(1, 1)].re, 0.0);
    }

    #[test]
    fn kron_acts_on_product_operators() {
        let mut rng = seeded_rng(4);
        let a = Superoperator::from_matrix(2, ginibre(4, 4, &mut rng)).unwrap();
        let b = Superoperator::from_matrix(3, ginibre(9, 9, &mut rng)).unwrap();
        let (x, y) = (ginibre(2, 2, &mut rng), ginibre(3, 3, &mut rng));
        let lhs = a.kron(&b).apply(&x.kronecker(&y)).unwrap();
        let rhs = a.apply(&x).unwrap().kronecker(&b.apply(&y).unwrap());
        assert!(max_abs_diff(&lhs, &rhs) < 1e-11);
    }

    #[test]
    fn rejects_wrong_shape() {
        assert!(Superoperator::from_matrix(2, CMat::zeros(3, 3)).is_err());
        assert!(Superoperator::identity(2).apply(&pauli(0).kronecker(&pauli(0))).is_err());
    }
}
