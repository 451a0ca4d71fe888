//! Dense complex matrices and the validated structure wrappers used across
//! the crate.

use std::ops::Deref;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Entrywise tolerance for Hermiticity checks.
pub const TOL_HERMITIAN: f64 = 1e-10;
/// Eigenvalues in `[-TOL_POSITIVE, 0)` are clamped to zero.
pub const TOL_POSITIVE: f64 = 1e-10;
/// Allowed deviation of a density matrix trace from one.
pub const TOL_TRACE: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn from_real_diagonal(diag: &[f64]) -> CMat {
    let d = diag.len();
    CMat::from_fn(d, d, |i, j| if i == j { c64(diag[i], 0.0) } else { C64::default() })
}

/// Builds a matrix from real row-major entries.
pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| c64(rows[i][j], 0.0))
}

pub fn trace(a: &CMat) -> C64 {
    a.diagonal().iter().copied().sum()
}

/// Hilbert-Schmidt scalar product `tr[A† B]`.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation from `A = A†`.
pub fn hermitian_deviation(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * c64(0.5, 0.0)
}

pub(crate) fn check_square(a: &CMat) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    Ok(a.nrows())
}

pub(crate) fn check_dim(a: &CMat, d: usize) -> Result<()> {
    check_square(a)?;
    if a.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, found: a.nrows() });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigh {
    /// Decomposes the Hermitian part of `a`.
    pub fn new(a: &CMat) -> Self {
        let n = a.nrows();
        if n == 0 {
            return Self { values: Vec::new(), vectors: CMat::zeros(0, 0) };
        }
        let eig = SymmetricEigen::new(hermitian_part(a));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Self { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    /// `U f(D) U†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &v) in self.values.iter().enumerate() {
            let fv = f(v);
            for r in 0..n {
                scaled[(r, c)] *= fv;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn vector(&self, k: usize) -> CVec {
        self.vectors.column(k).into_owned()
    }
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn hermitian_fn(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    Eigh::new(a).map(f)
}

/// `|A|` for Hermitian `A`.
pub fn abs_hermitian(a: &CMat) -> CMat {
    hermitian_fn(a, f64::abs)
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    a.clone().singular_values().iter().copied().collect()
}

pub fn trace_norm(a: &CMat) -> f64 {
    if hermitian_deviation(a) <= TOL_HERMITIAN * (1.0 + max_abs(a)) {
        Eigh::new(a).values.iter().map(|v| v.abs()).sum()
    } else {
        singular_values(a).iter().sum()
    }
}

pub fn operator_norm(a: &CMat) -> f64 {
    singular_values(a).into_iter().fold(0.0, f64::max)
}

/// Pauli matrices: 0 = identity, 1 = X, 2 = Y, 3 = Z.
pub fn pauli(k: usize) -> CMat {
    let (o, z, i) = (c64(1.0, 0.0), C64::default(), c64(0.0, 1.0));
    match k {
        0 => CMat::from_row_slice(2, 2, &[o, z, z, o]),
        1 => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        3 => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("pauli index {k} out of range"),
    }
}

pub fn ket_bra(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// A matrix equal to its conjugate transpose within [`TOL_HERMITIAN`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    /// Validates and stores the exact Hermitian part.
    pub fn new(m: CMat) -> Result<Self> {
        check_square(&m)?;
        let dev = hermitian_deviation(&m);
        if dev > TOL_HERMITIAN {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self(hermitian_part(&m)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(from_real_diagonal(diag))
    }

    pub fn identity(d: usize) -> Self {
        Self(identity(d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(CMat::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn eigh(&self) -> Eigh {
        Eigh::new(&self.0)
    }
}

impl Deref for HermitianMatrix {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0
    }
}

/// A Hermitian matrix with eigenvalues `>= -TOL_POSITIVE`. Slightly negative
/// eigenvalues are clamped to zero and the clamp is recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveMatrix {
    base: HermitianMatrix,
    min_eigenvalue: f64,
    clamped: bool,
}

impl PositiveMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        let base = HermitianMatrix::new(m)?;
        let eig = base.eigh();
        let min = eig.min();
        if min < -TOL_POSITIVE {
            return Err(Error::NotPositive(min));
        }
        if min < 0.0 {
            let fixed = eig.map(|v| v.max(0.0));
            return Ok(Self { base: HermitianMatrix(hermitian_part(&fixed)), min_eigenvalue: 0.0, clamped: true });
        }
        Ok(Self { base, min_eigenvalue: min, clamped: false })
    }

    /// Strict variant: all eigenvalues strictly positive.
    pub fn new_definite(m: CMat) -> Result<Self> {
        let out = Self::new(m)?;
        if out.min_eigenvalue <= 0.0 {
            return Err(Error::NotFullRank(out.min_eigenvalue));
        }
        Ok(out)
    }

    pub fn is_definite(&self) -> bool {
        self.min_eigenvalue > 0.0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// Whether eigenvalues in `[-TOL_POSITIVE, 0)` were clamped.
    pub fn clamped(&self) -> bool {
        self.clamped
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.base.0
    }

    pub fn into_inner(self) -> CMat {
        self.base.0
    }
}

impl Deref for PositiveMatrix {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.base.0
    }
}

/// A positive matrix with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(PositiveMatrix);

impl DensityMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        let pos = PositiveMatrix::new(m)?;
        let tr = trace(&pos);
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::InvalidTrace(tr.re));
        }
        Ok(Self(pos))
    }

    /// Divides a positive matrix by its trace before validating.
    pub fn normalized(m: CMat) -> Result<Self> {
        let tr = trace(&m).re;
        if !(tr > 0.0) {
            return Err(Error::InvalidTrace(tr));
        }
        Self::new(m / c64(tr, 0.0))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let m = identity(d) / c64(d as f64, 0.0);
        Self(PositiveMatrix { base: HermitianMatrix(m), min_eigenvalue: 1.0 / d as f64, clamped: false })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(from_real_diagonal(diag))
    }

    /// Projector onto the normalized vector `v`.
    pub fn pure(v: &CVec) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        Self::new(ket_bra(&(v / c64(n, 0.0))))
    }

    /// Pure state `|k><k|` in the computational basis.
    pub fn basis_state(d: usize, k: usize) -> Self {
        let mut m = CMat::zeros(d, d);
        m[(k, k)] = c64(1.0, 0.0);
        Self(PositiveMatrix { base: HermitianMatrix(m), min_eigenvalue: if d == 1 { 1.0 } else { 0.0 }, clamped: false })
    }

    pub fn dim(&self) -> usize {
        self.0.base.dim()
    }

    pub fn is_full_rank(&self) -> bool {
        self.0.is_definite()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.min_eigenvalue
    }

    pub fn clamped(&self) -> bool {
        self.0.clamped
    }

    pub fn positive(&self) -> &PositiveMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0.base.0
    }

    pub fn into_inner(self) -> CMat {
        self.0.base.0
    }
}

impl Deref for DensityMatrix {
    type Target = CMat;
    fn deref(&self) -> &CMat {
        &self.0.base.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_rejects_asymmetric() {
        let m = from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn positive_clamps_tiny_negative_eigenvalues() {
        let m = from_real_diagonal(&[1.0, -5e-11]);
        let p = PositiveMatrix::new(m).unwrap();
        assert!(p.clamped());
        assert_eq!(p.min_eigenvalue(), 0.0);
        assert!(PositiveMatrix::new(from_real_diagonal(&[1.0, -1e-6])).is_err());
    }

    #[test]
    fn density_requires_unit_trace() {
        assert!(matches!(DensityMatrix::from_diagonal(&[0.5, 0.6]), Err(Error::InvalidTrace(_))));
        let rho = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        assert!(rho.is_full_rank());
        assert!(!DensityMatrix::basis_state(2, 0).is_full_rank());
    }

    #[test]
    fn eigh_sorts_and_reconstructs() {
        let m = pauli(1) * c64(0.3, 0.0) + pauli(3) * c64(0.2, 0.0) + identity(2);
        let e = Eigh::new(&m);
        assert!(e.values[0] <= e.values[1]);
        assert!(max_abs_diff(&e.map(|v| v), &m) < 1e-14);
    }

    #[test]
    fn pauli_algebra() {
        let xy = pauli(1) * pauli(2);
        assert!(max_abs_diff(&xy, &(pauli(3) * c64(0.0, 1.0))) < 1e-15);
        assert!((trace_norm(&pauli(3)) - 2.0).abs() < 1e-14);
        assert!((operator_norm(&(pauli(1) * c64(3.0, 0.0))) - 3.0).abs() < 1e-12);
    }
}
