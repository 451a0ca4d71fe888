//! Dense complex matrix algebra and σ-weighted noncommutative l_p spaces.

pub mod matrix;
pub mod weighted;

pub use matrix::{
    c64, from_real_diagonal, hermitian_fn, identity, pauli, trace, trace_norm, CMat, CVec, DensityMatrix, Eigh,
    HermitianMatrix, PositiveMatrix, C64,
};
pub use weighted::{Exponent, WeightedSpace};
