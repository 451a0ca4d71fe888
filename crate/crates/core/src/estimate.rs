//! Result type shared by the estimators.

use serde::Serialize;

use crate::opalg::matrix::CMat;

/// How a constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Eigenvalue,
    /// Infimum estimated from above by local search.
    OptimizationUpperBound,
    /// Supremum estimated from below by local search.
    OptimizationLowerBound,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantEstimate {
    pub value: f64,
    pub method: Method,
    pub restarts: usize,
    pub converged: bool,
    #[serde(serialize_with = "crate::io::ser_opt_matrix")]
    pub witness: Option<CMat>,
    /// Search class and restrictions, e.g. "hermitian Y" or "pure inputs".
    pub detail: String,
}

impl ConstantEstimate {
    pub fn exact(value: f64, method: Method, detail: impl Into<String>) -> Self {
        Self { value, method, restarts: 0, converged: true, witness: None, detail: detail.into() }
    }
}
