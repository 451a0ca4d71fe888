//! Generators, channels and their evolution.

pub mod channel;
pub mod expm;
pub mod liouvillian;
pub mod superop;

pub use channel::Channel;
pub use expm::{ExpmPlan, ExpmRoute};
pub use liouvillian::{FixedPointReport, GklsData, Liouvillian, Semigroup};
pub use superop::Superoperator;
