//! Seeded random instance generators. Every generator takes the RNG
//! explicitly so each randomized test is reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::opalg::matrix::{c64, hermitian_part, identity, trace, CMat, CVec, DensityMatrix};

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for restart `k` of a run seeded with `seed`.
pub fn split_rng(seed: u64, k: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k + 1);
    rng
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Ginibre matrix with iid standard normal real and imaginary parts.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c64(gaussian(rng), gaussian(rng)))
}

/// GUE-like Hermitian matrix.
pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMat {
    hermitian_part(&ginibre(d, d, rng))
}

/// `G G† + 0.05·1`, strictly positive.
pub fn random_positive_definite(d: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(d, d, rng);
    hermitian_part(&(&g * g.adjoint())) + identity(d) * c64(0.05, 0.0)
}

pub fn random_state_vector(d: usize, rng: &mut impl Rng) -> CVec {
    let v = CVec::from_fn(d, |_, _| c64(gaussian(rng), gaussian(rng)));
    let n = v.norm();
    v / c64(n, 0.0)
}

pub fn random_pure_state(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    DensityMatrix::pure(&random_state_vector(d, rng)).expect("nonzero gaussian vector")
}

/// Ginibre-induced density matrix mixed with `floor·d` of the identity so
/// its smallest eigenvalue is at least `floor`.
pub fn random_full_rank_density(d: usize, floor: f64, rng: &mut impl Rng) -> DensityMatrix {
    let g = ginibre(d, d, rng);
    let w = hermitian_part(&(&g * g.adjoint()));
    let w = &w / trace(&w);
    let mix = floor * d as f64;
    let m = w * c64(1.0 - mix, 0.0) + identity(d) * c64(floor, 0.0);
    DensityMatrix::normalized(hermitian_part(&m)).expect("mixture of states is a state")
}

/// Density matrix drawn from the Ginibre ensemble; full rank almost surely.
pub fn random_density(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    random_full_rank_density(d, 0.0, rng)
}
