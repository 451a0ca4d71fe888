//! Generators of quantum dynamical semigroups.

use std::sync::OnceLock;

use nalgebra::SVD;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::opalg::matrix::{
    c64, check_dim, hermitian_part, identity, max_abs, trace, CMat, DensityMatrix, Eigh, HermitianMatrix, C64,
};
use crate::opalg::WeightedSpace;
use crate::random::{ginibre, random_hermitian};

use super::expm::ExpmPlan;
use super::superop::{unvectorize, Superoperator};

/// Largest `d^{2n}` accepted by tensor-power constructions.
pub const TENSOR_GUARD: usize = 4096;

/// Tolerance on `‖L(σ)‖_max` for `σ` to count as a fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GklsData {
    pub hamiltonian: HermitianMatrix,
    pub lindblad_ops: Vec<CMat>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointReport {
    /// Present when the kernel contains a state (always, for one-dimensional kernels).
    #[serde(skip)]
    pub sigma: Option<DensityMatrix>,
    pub kernel_dim: usize,
    pub peripheral_count: usize,
    pub primitive: bool,
    pub min_eig_sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    superop: Superoperator,
    gkls: Option<GklsData>,
}

impl Liouvillian {
    /// Validates trace annihilation and complete positivity of `e^{hL}`
    /// at `h = 1e-3`.
    pub fn from_superop(superop: Superoperator) -> Result<Self> {
        let scale = superop.max_abs().max(1.0);
        let defect = superop.trace_defect(false);
        if defect > 1e-9 * scale {
            return Err(Error::InvalidGenerator(format!("not trace-annihilating (defect {defect:e})")));
        }
        let (step, _) = superop.exp(1e-3);
        let min = Eigh::new(&step.choi()).min();
        if min < -1e-7 {
            return Err(Error::InvalidGenerator(format!("exp(1e-3 L) is not completely positive (Choi min {min:e})")));
        }
        Ok(Self { superop, gkls: None })
    }

    /// `L(ρ) = −i[H, ρ] + Σ_k (L_k ρ L_k† − ½{L_k† L_k, ρ})`.
    pub fn build_gkls(hamiltonian: HermitianMatrix, lindblad_ops: Vec<CMat>) -> Result<Self> {
        let d = hamiltonian.dim();
        for op in &lindblad_ops {
            check_dim(op, d)?;
        }
        let one = identity(d);
        let mi = c64(0.0, -1.0);
        let mut m = Superoperator::sandwich(&hamiltonian, &one).into_matrix() * mi
            - Superoperator::sandwich(&one, &hamiltonian).into_matrix() * mi;
        for op in &lindblad_ops {
            let ldl = op.adjoint() * op * c64(0.5, 0.0);
            m += Superoperator::sandwich(op, &op.adjoint()).into_matrix();
            m -= Superoperator::sandwich(&ldl, &one).into_matrix();
            m -= Superoperator::sandwich(&one, &ldl).into_matrix();
        }
        let superop = Superoperator::from_matrix(d, m)?;
        Ok(Self { superop, gkls: Some(GklsData { hamiltonian, lindblad_ops }) })
    }

    /// `L_σ(ρ) = tr(ρ) σ − ρ`.
    pub fn depolarizing(sigma: &DensityMatrix) -> Result<Self> {
        if !sigma.is_full_rank() {
            return Err(Error::NotFullRank(sigma.min_eigenvalue()));
        }
        let d = sigma.dim();
        let s = CMat::from_column_slice(d * d, 1, sigma.as_slice());
        let one = identity(d);
        let tr_row = CMat::from_column_slice(d * d, 1, one.as_slice()).transpose();
        let m = s * tr_row - CMat::identity(d * d, d * d);
        Ok(Self { superop: Superoperator::from_matrix(d, m)?, gkls: None })
    }

    pub fn zero(d: usize) -> Self {
        Self { superop: Superoperator::zero(d), gkls: None }
    }

    /// GKLS generator with a GUE Hamiltonian and `k` Ginibre jump operators,
    /// all scaled by `1/√d`.
    pub fn random(d: usize, k: usize, rng: &mut impl Rng) -> Self {
        let s = c64(1.0 / (d as f64).sqrt(), 0.0);
        let h = HermitianMatrix::new(random_hermitian(d, rng) * s).expect("hermitian by construction");
        let ops = (0..k).map(|_| ginibre(d, d, rng) * s).collect();
        Self::build_gkls(h, ops).expect("dimensions agree")
    }

    /// Draws [`Liouvillian::random`] instances until one is primitive.
    pub fn random_primitive(d: usize, k: usize, rng: &mut impl Rng) -> Self {
        loop {
            let l = Self::random(d, k, rng);
            if l.fixed_point().map(|r| r.primitive).unwrap_or(false) {
                return l;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.superop.dim()
    }

    pub fn superop(&self) -> &Superoperator {
        &self.superop
    }

    pub fn gkls(&self) -> Option<&GklsData> {
        self.gkls.as_ref()
    }

    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        self.superop.apply(x)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let gkls = self.gkls.as_ref().filter(|_| c >= 0.0).map(|g| GklsData {
            hamiltonian: HermitianMatrix::new(g.hamiltonian.as_matrix() * c64(c, 0.0)).expect("hermitian"),
            lindblad_ops: g.lindblad_ops.iter().map(|k| k * c64(c.sqrt(), 0.0)).collect(),
        });
        Self { superop: self.superop.scale(c), gkls }
    }

    /// Adds the coherent part `−i[H, ·]`.
    pub fn with_hamiltonian(&self, h: &HermitianMatrix) -> Result<Self> {
        check_dim(h, self.dim())?;
        let one = identity(self.dim());
        let mi = c64(0.0, -1.0);
        let m = self.superop.matrix() + Superoperator::sandwich(h, &one).into_matrix() * mi
            - Superoperator::sandwich(&one, h).into_matrix() * mi;
        Ok(Self { superop: Superoperator::from_matrix(self.dim(), m)?, gkls: None })
    }

    pub fn fixed_point(&self) -> Result<FixedPointReport> {
        let d = self.dim();
        let m = self.superop.matrix();
        let eig = self.superop.eigenvalues();
        let norm = eig.iter().map(|z| z.norm()).fold(max_abs(m), f64::max);
        let tol = 1e-9 * norm.max(f64::MIN_POSITIVE);
        let peripheral_count = eig.iter().filter(|z| z.re.abs() <= tol).count();
        kernel_report(m, d, tol, peripheral_count)
    }

    /// `Γ^{-1}_σ ∘ L ∘ Γ_σ`.
    pub fn hat_generator(&self, space: &WeightedSpace) -> Result<Superoperator> {
        check_dim(space.sigma(), self.dim())?;
        let residual = max_abs(&self.superop.apply_unchecked(space.sigma()));
        if residual > FIXED_POINT_TOL {
            return Err(Error::NotFixedPoint(residual));
        }
        Ok(conjugate_by_gamma(&self.superop, space, -1.0))
    }

    /// Detailed balance `Γ^{-1}_σ L Γ_σ = L*` within `1e-8`.
    pub fn is_reversible(&self, space: &WeightedSpace) -> Result<bool> {
        let hat = self.hat_generator(space)?;
        let dev = max_abs(&(hat.matrix() - self.superop.matrix().adjoint()));
        Ok(dev <= 1e-8 * self.superop.max_abs().max(1.0))
    }

    pub fn evolve(&self, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        check_dim(rho, self.dim())?;
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("evolution time must be >= 0, got {t}")));
        }
        let (step, _) = self.superop.exp(t);
        to_density(&step.apply_unchecked(rho))
    }

    /// Generator whose hat generator is `½(L̂ + L̂^{†σ})`.
    pub fn reversibilize(&self) -> Result<Self> {
        let report = self.fixed_point()?;
        if !report.primitive {
            return Err(Error::NotPrimitive(format!("kernel dimension {}", report.kernel_dim)));
        }
        let space = WeightedSpace::new(report.sigma.expect("primitive report carries sigma"))?;
        let back = conjugate_by_gamma(&self.superop.adjoint(), &space, 1.0);
        let m = (self.superop.matrix() + back.matrix()) * c64(0.5, 0.0);
        Self::from_superop(Superoperator::from_matrix(self.dim(), m)?)
    }

    /// `Σ_i id^{⊗(i−1)} ⊗ L ⊗ id^{⊗(n−i)}`.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("tensor power needs n >= 1".into()));
        }
        guard_tensor(self.dim(), n)?;
        let d = self.dim();
        let mut acc = self.superop.clone();
        let mut dk = d;
        for _ in 1..n {
            let left = acc.kron(&Superoperator::identity(d));
            let right = Superoperator::identity(dk).kron(&self.superop);
            acc = left.add(&right)?;
            dk *= d;
        }
        Ok(Self { superop: acc, gkls: if n == 1 { self.gkls.clone() } else { None } })
    }
}

pub(crate) fn guard_tensor(d: usize, n: usize) -> Result<()> {
    let mut total: usize = 1;
    for _ in 0..n {
        total = total.saturating_mul(d * d);
    }
    if total > TENSOR_GUARD {
        return Err(Error::ResourceGuard(format!("d^(2n) = {total} exceeds {TENSOR_GUARD}")));
    }
    Ok(())
}

/// `Γ^{r}_σ ∘ T ∘ Γ^{-r}_σ` with `r ∈ {1, −1}`.
pub(crate) fn conjugate_by_gamma(t: &Superoperator, space: &WeightedSpace, r: f64) -> Superoperator {
    let out = space.frac_power(r / 2.0);
    let inn = space.frac_power(-r / 2.0);
    let g_out = Superoperator::sandwich(&out, &out);
    let g_in = Superoperator::sandwich(&inn, &inn);
    g_out.compose(t).and_then(|x| x.compose(&g_in)).expect("dimensions agree")
}

/// Kernel analysis shared by generators (`m`) and channels (`m − 1`).
pub(crate) fn kernel_report(m: &CMat, d: usize, tol: f64, peripheral_count: usize) -> Result<FixedPointReport> {
    let svd = right_svd(m);
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let kernel: Vec<usize> = (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] <= tol).collect();
    if kernel.is_empty() {
        return Err(Error::InvalidGenerator("numerically empty null space".into()));
    }
    let candidate = if kernel.len() == 1 {
        let v: Vec<C64> = v_t.row(kernel[0]).iter().map(|z| z.conj()).collect();
        let x = unvectorize(&v, d);
        let tr = trace(&x);
        if tr.norm() < 1e-12 {
            None
        } else {
            Some(hermitian_part(&(x / tr)))
        }
    } else {
        let mixed = identity(d) / c64(d as f64, 0.0);
        let vm = CMat::from_column_slice(d * d, 1, mixed.as_slice());
        let mut proj = CMat::zeros(d * d, 1);
        for &k in &kernel {
            let row = v_t.row(k);
            let coef: C64 = row.iter().zip(vm.iter()).map(|(a, b)| a * b).sum();
            for i in 0..d * d {
                proj[i] += row[i].conj() * coef;
            }
        }
        let x = unvectorize(proj.as_slice(), d);
        let tr = trace(&x);
        if tr.norm() < 1e-12 {
            None
        } else {
            Some(hermitian_part(&(x / tr)))
        }
    };
    let sigma = candidate.and_then(|x| DensityMatrix::new(x).ok());
    let min_eig_sigma = sigma.as_ref().map_or(f64::NAN, |s| Eigh::new(s).min());
    let primitive = kernel.len() == 1 && peripheral_count == 1 && min_eig_sigma > 1e-12;
    Ok(FixedPointReport { sigma, kernel_dim: kernel.len(), peripheral_count, primitive, min_eig_sigma })
}

/// SVD with right singular vectors; a stalled iteration is retried on a
/// unitarily rotated copy, which leaves the right singular vectors unchanged.
fn right_svd(m: &CMat) -> SVD<C64, nalgebra::Dyn, nalgebra::Dyn> {
    if let Some(svd) = SVD::try_new(m.clone(), false, true, f64::EPSILON, 10_000) {
        return svd;
    }
    let mut rng = crate::random::seeded_rng(0x5bd);
    loop {
        let u = ginibre(m.nrows(), m.nrows(), &mut rng).qr().q();
        if let Some(svd) = SVD::try_new(u * m, false, true, f64::EPSILON, 10_000) {
            return svd;
        }
    }
}

/// Hermitian part of an evolved state, renormalized after a `1e-9` trace check.
pub(crate) fn to_density(x: &CMat) -> Result<DensityMatrix> {
    let tr = trace(x);
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::InvalidTrace(tr.re));
    }
    DensityMatrix::normalized(hermitian_part(x))
}

/// A generator together with its full-rank fixed point, weighted space and
/// hat generator.
#[derive(Debug)]
pub struct Semigroup {
    generator: Liouvillian,
    space: WeightedSpace,
    hat: Superoperator,
    primitive: bool,
    plan: OnceLock<ExpmPlan>,
}

impl Clone for Semigroup {
    fn clone(&self) -> Self {
        Self {
            generator: self.generator.clone(),
            space: self.space.clone(),
            hat: self.hat.clone(),
            primitive: self.primitive,
            plan: OnceLock::new(),
        }
    }
}

impl Semigroup {
    /// Requires a primitive generator.
    pub fn new(generator: Liouvillian) -> Result<Self> {
        let report = generator.fixed_point()?;
        if !report.primitive {
            return Err(Error::NotPrimitive(format!(
                "kernel dimension {}, peripheral eigenvalues {}, min eigenvalue of fixed point {:e}",
                report.kernel_dim, report.peripheral_count, report.min_eig_sigma
            )));
        }
        let space = WeightedSpace::new(report.sigma.expect("primitive report carries sigma"))?;
        let hat = generator.hat_generator(&space)?;
        Ok(Self { generator, space, hat, primitive: true, plan: OnceLock::new() })
    }

    /// Only checks that the full-rank `sigma` is annihilated by the generator.
    pub fn with_fixed_point(generator: Liouvillian, sigma: DensityMatrix) -> Result<Self> {
        let space = WeightedSpace::new(sigma)?;
        let hat = generator.hat_generator(&space)?;
        let primitive = generator.fixed_point().map(|r| r.primitive).unwrap_or(false);
        Ok(Self { generator, space, hat, primitive, plan: OnceLock::new() })
    }

    pub fn generator(&self) -> &Liouvillian {
        &self.generator
    }

    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn sigma(&self) -> &DensityMatrix {
        self.space.sigma()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn hat(&self) -> &Superoperator {
        &self.hat
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    pub fn is_reversible(&self) -> bool {
        let dev = max_abs(&(self.hat.matrix() - self.generator.superop().matrix().adjoint()));
        dev <= 1e-8 * self.generator.superop().max_abs().max(1.0)
    }

    fn plan(&self) -> &ExpmPlan {
        self.plan.get_or_init(|| ExpmPlan::new(self.generator.superop().matrix()))
    }

    /// `e^{tL}` as a superoperator, from a cached factorization.
    pub fn propagator(&self, t: f64) -> Superoperator {
        Superoperator::from_matrix(self.dim(), self.plan().at(t)).expect("square")
    }

    pub fn evolve(&self, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        check_dim(rho, self.dim())?;
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!("evolution time must be >= 0, got {t}")));
        }
        to_density(&self.propagator(t).apply_unchecked(rho))
    }

    /// `X_t = e^{tL̂}(X)` computed as `Γ^{-1}(e^{tL}(Γ(X)))`.
    pub fn evolve_relative(&self, x: &CMat, t: f64) -> CMat {
        let rho = self.space.gamma_unchecked(x, 1.0);
        let out = self.propagator(t).apply_unchecked(&rho);
        self.space.gamma_unchecked(&out, -1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::matrix::{max_abs_diff, pauli};
    use crate::random::{random_density, seeded_rng};

    fn qubit_depol() -> Liouvillian {
        Liouvillian::depolarizing(&DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap()).unwrap()
    }

    #[test]
    fn zero_generator() {
        let l = Liouvillian::build_gkls(HermitianMatrix::zeros(2), vec![]).unwrap();
        assert_eq!(l.superop().max_abs(), 0.0);
        assert!(Liouvillian::from_superop(l.superop().clone()).is_ok());
        let space = WeightedSpace::maximally_mixed(2);
        assert!(l.is_reversible(&space).unwrap());
    }

    #[test]
    fn pauli_dephasing_fixed_point_is_maximally_mixed() {
        let s = c64(0.5f64.sqrt(), 0.0);
        let ops = (1..4).map(|k| pauli(k) * s).collect();
        let l = Liouvillian::build_gkls(HermitianMatrix::zeros(2), ops).unwrap();
        let rep = l.fixed_point().unwrap();
        assert!(rep.primitive);
        assert!(max_abs_diff(rep.sigma.as_ref().unwrap(), &(identity(2) * c64(0.5, 0.0))) < 1e-12);
    }

    #[test]
    fn depolarizing_spectrum_and_fixed_point() {
        let l = qubit_depol();
        let rep = l.fixed_point().unwrap();
        assert!(rep.primitive);
        assert_eq!(rep.kernel_dim, 1);
        assert!((rep.min_eig_sigma - 0.25).abs() < 1e-12);
        let mut ev: Vec<f64> = l.superop().eigenvalues().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[2] + 1.0).abs() < 1e-12 && ev[3].abs() < 1e-12);
        assert!(l.is_reversible(&WeightedSpace::from_diagonal(&[0.75, 0.25]).unwrap()).unwrap());
    }

    #[test]
    fn unitary_generator_is_not_primitive() {
        let l = Liouvillian::build_gkls(HermitianMatrix::new(pauli(3)).unwrap(), vec![]).unwrap();
        let rep = l.fixed_point().unwrap();
        assert!(!rep.primitive);
        assert!(rep.kernel_dim >= 2);
        assert!(matches!(Semigroup::new(l), Err(Error::NotPrimitive(_))));
    }

    #[test]
    fn random_gkls_instances_are_primitive() {
        let mut rng = seeded_rng(20);
        let primitive = (0..20).filter(|_| Liouvillian::random(2, 3, &mut rng).fixed_point().unwrap().primitive).count();
        assert_eq!(primitive, 20);
    }

    #[test]
    fn hat_of_depolarizing_matches_closed_form() {
        let l = qubit_depol();
        let space = WeightedSpace::from_diagonal(&[0.75, 0.25]).unwrap();
        let hat = l.hat_generator(&space).unwrap();
        let mut rng = seeded_rng(8);
        let x = random_hermitian(2, &mut rng);
        let expect = identity(2) * trace(&space.gamma(&x, 1.0).unwrap()) - &x;
        assert!(max_abs_diff(&hat.apply(&x).unwrap(), &expect) < 1e-12);
    }

    #[test]
    fn hat_rejects_non_fixed_point() {
        let l = qubit_depol();
        assert!(matches!(l.hat_generator(&WeightedSpace::maximally_mixed(2)), Err(Error::NotFixedPoint(_))));
    }

    #[test]
    fn coherent_term_breaks_detailed_balance() {
        let h = HermitianMatrix::new(pauli(1)).unwrap();
        let l = qubit_depol().with_hamiltonian(&h).unwrap();
        let rep = l.fixed_point().unwrap();
        assert!(rep.primitive);
        let space = WeightedSpace::new(rep.sigma.unwrap()).unwrap();
        assert!(!l.is_reversible(&space).unwrap());
        let space = WeightedSpace::from_diagonal(&[0.75, 0.25]).unwrap();
        let commuting = qubit_depol().with_hamiltonian(&HermitianMatrix::new(pauli(3)).unwrap()).unwrap();
        assert!(!commuting.is_reversible(&space).unwrap());
    }

    #[test]
    fn depolarizing_evolution_closed_form() {
        let l = qubit_depol();
        let mut rng = seeded_rng(9);
        let rho = random_density(2, &mut rng);
        let sigma = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        for t in [0.0, 0.5, 1.0, 2.0] {
            let out = l.evolve(&rho, t).unwrap();
            let e = (-t).exp();
            let expect = rho.as_matrix() * c64(e, 0.0) + sigma.as_matrix() * c64(1.0 - e, 0.0);
            assert!(max_abs_diff(&out, &expect) < 1e-12);
        }
        assert!(l.evolve(&rho, -1.0).is_err());
    }

    #[test]
    fn tensor_square_of_depolarizing() {
        let l = qubit_depol();
        let l2 = l.tensor_power(2).unwrap();
        let rep = l2.fixed_point().unwrap();
        let sigma = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        let ss = sigma.as_matrix().kronecker(sigma.as_matrix());
        assert!(max_abs_diff(rep.sigma.as_ref().unwrap(), &ss) < 1e-10);
        assert!(matches!(l.tensor_power(7), Err(Error::ResourceGuard(_))));
        assert_eq!(l.tensor_power(1).unwrap(), l);
    }

    #[test]
    fn semigroup_relative_evolution_matches() {
        let mut rng = seeded_rng(12);
        let sg = Semigroup::new(Liouvillian::random(2, 2, &mut rng)).unwrap();
        let rho = random_density(2, &mut rng);
        let x = sg.space().relative_density(&rho).unwrap();
        let lhs = sg.space().relative_density(&sg.evolve(&rho, 0.7).unwrap()).unwrap();
        let (step, _) = sg.hat().exp(0.7);
        assert!(max_abs_diff(&lhs, &step.apply(&x).unwrap()) < 1e-8);
        assert!(max_abs_diff(&sg.evolve_relative(&x, 0.7), &lhs) < 1e-10);
    }
}
