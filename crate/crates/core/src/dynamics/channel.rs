//! Completely positive trace-preserving maps and discrete semigroups.

use crate::error::{Error, Result};
use crate::opalg::matrix::{c64, check_dim, identity, max_abs, max_abs_diff, pauli, trace, CMat, DensityMatrix, Eigh};
use crate::opalg::WeightedSpace;

use super::liouvillian::{conjugate_by_gamma, guard_tensor, kernel_report, to_density, FixedPointReport, Liouvillian, Semigroup};
use super::superop::Superoperator;

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    superop: Superoperator,
    kraus: Option<Vec<CMat>>,
}

impl Channel {
    /// Validates Choi positivity and trace preservation within `1e-9`.
    pub fn from_superop(superop: Superoperator) -> Result<Self> {
        let min = Eigh::new(&superop.choi()).min();
        if min < -1e-9 {
            return Err(Error::InvalidChannel(format!("Choi matrix not positive (min eigenvalue {min:e})")));
        }
        let defect = superop.trace_defect(true);
        if defect > 1e-9 {
            return Err(Error::InvalidChannel(format!("not trace-preserving (defect {defect:e})")));
        }
        Ok(Self { superop, kraus: None })
    }

    /// `ρ ↦ Σ_k K_k ρ K_k†` with `Σ_k K_k† K_k = 1`.
    pub fn from_kraus(ops: Vec<CMat>) -> Result<Self> {
        let d = ops.first().ok_or_else(|| Error::InvalidChannel("empty Kraus list".into()))?.nrows();
        let mut m = CMat::zeros(d * d, d * d);
        let mut completeness = CMat::zeros(d, d);
        for k in &ops {
            check_dim(k, d)?;
            m += Superoperator::sandwich(k, &k.adjoint()).into_matrix();
            completeness += k.adjoint() * k;
        }
        let dev = max_abs_diff(&completeness, &identity(d));
        if dev > 1e-9 {
            return Err(Error::InvalidChannel(format!("Kraus operators incomplete (deviation {dev:e})")));
        }
        Ok(Self { superop: Superoperator::from_matrix(d, m)?, kraus: Some(ops) })
    }

    /// `ρ ↦ tr(ρ) σ`.
    pub fn replacement(sigma: &DensityMatrix) -> Self {
        let d = sigma.dim();
        let s = CMat::from_column_slice(d * d, 1, sigma.as_slice());
        let one = identity(d);
        let tr_row = CMat::from_column_slice(d * d, 1, one.as_slice()).transpose();
        Self { superop: Superoperator::from_matrix(d, s * tr_row).expect("square"), kraus: None }
    }

    /// `ρ ↦ tr(ρ) 1/d`.
    pub fn completely_depolarizing(d: usize) -> Self {
        Self::replacement(&DensityMatrix::maximally_mixed(d))
    }

    pub fn identity(d: usize) -> Self {
        Self { superop: Superoperator::identity(d), kraus: Some(vec![identity(d)]) }
    }

    /// Qubit channel with `T(1) = 1`, `T(σ_x) = T(σ_y) = 0`, `T(σ_z) = σ_x`.
    pub fn pauli_noncontractive() -> Self {
        let superop = Superoperator::from_fn(2, |x| {
            (identity(2) * trace(x) + pauli(1) * trace(&(pauli(3) * x))) * c64(0.5, 0.0)
        });
        Self { superop, kraus: None }
    }

    /// `Σ_i p_i id^{⊗(i−1)} ⊗ T ⊗ id^{⊗(n−i)}`.
    pub fn random_local(t: &Channel, probs: &[f64], n: usize) -> Result<Self> {
        if n == 0 || probs.len() != n {
            return Err(Error::InvalidParameter(format!("need {n} >= 1 probabilities, got {}", probs.len())));
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("weights must be a probability vector".into()));
        }
        let d = t.dim();
        guard_tensor(d, n)?;
        let dn = d.pow(n as u32);
        let mut acc = Superoperator::zero(dn);
        for (i, &p) in probs.iter().enumerate() {
            let left = Superoperator::identity(d.pow(i as u32));
            let right = Superoperator::identity(d.pow((n - i - 1) as u32));
            let term = left.kron(&t.superop).kron(&right);
            acc = acc.add(&term.scale(p))?;
        }
        Ok(Self { superop: acc, kraus: None })
    }

    /// Completely depolarizing noise hitting one of `n` qubits uniformly at random.
    pub fn random_pauli(n: usize) -> Result<Self> {
        if n > 5 {
            return Err(Error::ResourceGuard(format!("random Pauli channel limited to n <= 5, got {n}")));
        }
        let probs = vec![1.0 / n as f64; n];
        Self::random_local(&Self::completely_depolarizing(2), &probs, n)
    }

    pub fn dim(&self) -> usize {
        self.superop.dim()
    }

    pub fn superop(&self) -> &Superoperator {
        &self.superop
    }

    pub fn kraus(&self) -> Option<&[CMat]> {
        self.kraus.as_deref()
    }

    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        self.superop.apply(x)
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        to_density(&self.apply(rho)?)
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(Self { superop: self.superop.compose(&other.superop)?, kraus: None })
    }

    pub fn power(&self, k: usize) -> Self {
        let mut acc = Superoperator::identity(self.dim());
        for _ in 0..k {
            acc = self.superop.compose(&acc).expect("same dimension");
        }
        Self { superop: acc, kraus: None }
    }

    /// Fixed points of `T`; the peripheral spectrum is `|λ| ≥ 1 − 1e-9`.
    pub fn fixed_point(&self) -> Result<FixedPointReport> {
        let d = self.dim();
        let shifted = self.superop.matrix() - CMat::identity(d * d, d * d);
        let peripheral_count = self.superop.eigenvalues().iter().filter(|z| z.norm() >= 1.0 - 1e-9).count();
        kernel_report(&shifted, d, 1e-9, peripheral_count)
    }

    /// `T̂ = Γ^{-1}_σ ∘ T ∘ Γ_σ`.
    pub fn hat(&self, space: &WeightedSpace) -> Result<Superoperator> {
        check_dim(space.sigma(), self.dim())?;
        let residual = max_abs(&(self.superop.apply_unchecked(space.sigma()) - space.sigma().as_matrix()));
        if residual > 1e-8 {
            return Err(Error::NotFixedPoint(residual));
        }
        Ok(conjugate_by_gamma(&self.superop, space, -1.0))
    }

    /// The generator whose hat generator is `T* T̂ − id`, i.e. the
    /// Schrödinger-picture map `Γ_σ T* Γ^{-1}_σ T − id`, together with the
    /// fixed point of `T`.
    pub fn discrete_generator(&self) -> Result<Semigroup> {
        let report = self.fixed_point()?;
        if !report.primitive {
            return Err(Error::NotPrimitive(format!(
                "kernel dimension {}, peripheral eigenvalues {}",
                report.kernel_dim, report.peripheral_count
            )));
        }
        let sigma = report.sigma.expect("primitive report carries sigma");
        let space = WeightedSpace::new(sigma.clone())?;
        let petz = conjugate_by_gamma(&self.superop.adjoint(), &space, 1.0);
        let l = petz.compose(&self.superop)?.sub(&Superoperator::identity(self.dim()))?;
        let generator = Liouvillian::from_superop(l)?;
        Semigroup::with_fixed_point(generator, sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::matrix::{from_real_diagonal, max_abs_diff};
    use crate::random::{random_density, seeded_rng};

    #[test]
    fn noncontractive_channel_action() {
        let t = Channel::pauli_noncontractive();
        assert!(Channel::from_superop(t.superop().clone()).is_ok());
        let up = (identity(2) + pauli(3)) * c64(0.5, 0.0);
        let plus = (identity(2) + pauli(1)) * c64(0.5, 0.0);
        assert!(max_abs_diff(&t.apply(&up).unwrap(), &plus) < 1e-14);
        let mut rng = seeded_rng(1);
        let rho = random_density(2, &mut rng);
        let twice = t.power(2).apply(&rho).unwrap();
        assert!(max_abs_diff(&twice, &(identity(2) * c64(0.5, 0.0))) < 1e-14);
        assert!(t.fixed_point().unwrap().primitive);
    }

    #[test]
    fn random_pauli_single_qubit_is_depolarizing() {
        let t = Channel::random_pauli(1).unwrap();
        assert_eq!(t.superop(), Channel::completely_depolarizing(2).superop());
        assert!(Channel::random_pauli(6).is_err());
    }

    #[test]
    fn random_pauli_two_qubits() {
        let t = Channel::random_pauli(2).unwrap();
        let checked = Channel::from_superop(t.superop().clone()).unwrap();
        let rep = checked.fixed_point().unwrap();
        assert!(rep.primitive);
        assert!(max_abs_diff(rep.sigma.as_ref().unwrap(), &from_real_diagonal(&[0.25; 4])) < 1e-12);
        let uniform = Channel::random_local(&Channel::completely_depolarizing(2), &[0.5, 0.5], 2).unwrap();
        assert_eq!(uniform, t);
    }

    #[test]
    fn kraus_validation() {
        let amp = vec![
            CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.6, 0.0)]),
            CMat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.8, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]),
        ];
        let ch = Channel::from_kraus(amp).unwrap();
        assert!(Channel::from_superop(ch.superop().clone()).is_ok());
        assert!(Channel::from_kraus(vec![pauli(3) * c64(0.9, 0.0)]).is_err());
        assert!(Channel::random_local(&ch, &[0.7, 0.2], 2).is_err());
    }

    #[test]
    fn discrete_generator_of_depolarizing_channel() {
        let sg = Channel::completely_depolarizing(2).discrete_generator().unwrap();
        // T* T̂ − id for T̂(X) = tr(X/2)·1 is again the depolarizing hat generator
        let l = Liouvillian::depolarizing(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert!(max_abs_diff(sg.generator().superop().matrix(), l.superop().matrix()) < 1e-12);
        assert!(sg.is_primitive());
    }

    #[test]
    fn discrete_generator_of_noncontractive_channel_is_not_primitive() {
        let sg = Channel::pauli_noncontractive().discrete_generator().unwrap();
        assert!(!sg.is_primitive());
        let z = pauli(3);
        assert!(max_abs(&sg.generator().apply(&z).unwrap()) < 1e-12);
    }
}
