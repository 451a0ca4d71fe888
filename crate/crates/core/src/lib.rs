//! Sandwiched Rényi divergences, entropy functionals and convergence
//! constants for primitive quantum dynamical semigroups on `d × d` matrices.
//!
//! Operators are dense `nalgebra` complex matrices. Superoperators act on
//! column-stacked vectorizations, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod constants;
pub mod divergence;
pub mod dynamics;
pub mod error;
pub mod estimate;
pub mod functionals;
pub mod io;
pub mod opalg;
pub mod optim;
pub mod random;
pub mod verify;

pub use error::{Error, Result};
