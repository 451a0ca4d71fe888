//! JSON formats for matrices, generators and channels.
//!
//! Matrices: `{"dim": d, "re": [[...]], "im": [[...]]}` in row-major order;
//! a missing `im` means a real matrix.

use serde::{Deserialize, Serialize, Serializer};

use crate::dynamics::{Channel, Liouvillian, Superoperator};
use crate::error::{Error, Result};
use crate::opalg::matrix::{c64, CMat, DensityMatrix, HermitianMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        let rows = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(i, j)).collect()).collect()
        };
        let re = rows(&|i, j| m[(i, j)].re);
        let has_im = m.iter().any(|z| z.im != 0.0);
        let im = has_im.then(|| rows(&|i, j| m[(i, j)].im));
        Self { dim: m.nrows(), re, im }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let n = self.re.len();
        let m = self.re.first().map_or(0, Vec::len);
        if self.re.iter().any(|r| r.len() != m) {
            return Err(Error::Parse("ragged rows in \"re\"".into()));
        }
        if let Some(im) = &self.im {
            if im.len() != n || im.iter().any(|r| r.len() != m) {
                return Err(Error::Parse("\"im\" shape differs from \"re\"".into()));
            }
        }
        if n != self.dim && m != self.dim {
            return Err(Error::Parse(format!("\"dim\" = {} disagrees with {n}x{m} entries", self.dim)));
        }
        Ok(CMat::from_fn(n, m, |i, j| c64(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))))
    }
}

pub fn parse_matrix(text: &str) -> Result<CMat> {
    let mj: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    mj.to_matrix()
}

pub fn parse_density(text: &str) -> Result<DensityMatrix> {
    DensityMatrix::new(parse_matrix(text)?)
}

pub fn matrix_to_json(m: &CMat) -> String {
    serde_json::to_string(&MatrixJson::from_matrix(m)).expect("plain data serializes")
}

pub(crate) fn ser_opt_matrix<S: Serializer>(m: &Option<CMat>, s: S) -> std::result::Result<S::Ok, S::Error> {
    m.as_ref().map(MatrixJson::from_matrix).serialize(s)
}

pub(crate) fn ser_matrix<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from_matrix(m).serialize(s)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorJson {
    Gkls {
        #[serde(rename = "H")]
        hamiltonian: MatrixJson,
        #[serde(rename = "L", default)]
        lindblad_ops: Vec<MatrixJson>,
    },
    Superop {
        dim: usize,
        matrix: MatrixJson,
    },
    Depolarizing {
        sigma: MatrixJson,
    },
    RandomPauli {
        n: usize,
    },
}

/// What a generator file describes: a continuous-time generator or a channel.
#[derive(Debug, Clone)]
pub enum Dynamics {
    Continuous { generator: Liouvillian, depolarizing_sigma: Option<DensityMatrix> },
    Discrete(Channel),
}

impl GeneratorJson {
    pub fn build(&self) -> Result<Dynamics> {
        Ok(match self {
            GeneratorJson::Gkls { hamiltonian, lindblad_ops } => {
                let h = HermitianMatrix::new(hamiltonian.to_matrix()?)?;
                let ops = lindblad_ops.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
                Dynamics::Continuous { generator: Liouvillian::build_gkls(h, ops)?, depolarizing_sigma: None }
            }
            GeneratorJson::Superop { dim, matrix } => {
                let s = Superoperator::from_matrix(*dim, matrix.to_matrix()?)?;
                Dynamics::Continuous { generator: Liouvillian::from_superop(s)?, depolarizing_sigma: None }
            }
            GeneratorJson::Depolarizing { sigma } => {
                let sigma = DensityMatrix::new(sigma.to_matrix()?)?;
                Dynamics::Continuous {
                    generator: Liouvillian::depolarizing(&sigma)?,
                    depolarizing_sigma: Some(sigma),
                }
            }
            GeneratorJson::RandomPauli { n } => Dynamics::Discrete(Channel::random_pauli(*n)?),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelJson {
    Kraus {
        ops: Vec<MatrixJson>,
    },
    Superop {
        dim: usize,
        matrix: MatrixJson,
    },
    RandomPauli {
        n: usize,
    },
    CompletelyDepolarizing {
        dim: usize,
    },
    PauliNoncontractive,
}

impl ChannelJson {
    pub fn build(&self) -> Result<Channel> {
        match self {
            ChannelJson::Kraus { ops } => {
                Channel::from_kraus(ops.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?)
            }
            ChannelJson::Superop { dim, matrix } => Channel::from_superop(Superoperator::from_matrix(*dim, matrix.to_matrix()?)?),
            ChannelJson::RandomPauli { n } => Channel::random_pauli(*n),
            ChannelJson::CompletelyDepolarizing { dim } => Ok(Channel::completely_depolarizing(*dim)),
            ChannelJson::PauliNoncontractive => Ok(Channel::pauli_noncontractive()),
        }
    }
}

/// Parses either a generator or a channel description.
pub fn parse_dynamics(text: &str) -> Result<Dynamics> {
    if let Ok(g) = serde_json::from_str::<GeneratorJson>(text) {
        return g.build();
    }
    match serde_json::from_str::<ChannelJson>(text) {
        Ok(c) => Ok(Dynamics::Discrete(c.build()?)),
        Err(e) => Err(Error::Parse(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::matrix::{max_abs_diff, pauli};

    #[test]
    fn matrix_round_trip() {
        let m = pauli(2);
        let back = parse_matrix(&matrix_to_json(&m)).unwrap();
        assert!(max_abs_diff(&m, &back) < 1e-15);
        let real = parse_matrix(r#"{"dim":2,"re":[[0.75,0],[0,0.25]]}"#).unwrap();
        assert_eq!(real[(1, 1)].re, 0.25);
    }

    #[test]
    fn malformed_matrices_are_rejected() {
        assert!(matches!(parse_matrix(r#"{"dim":2,"re":[[1,0],[0]]}"#), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn generator_kinds() {
        let dep = r#"{"kind":"depolarizing","sigma":{"dim":2,"re":[[0.75,0],[0,0.25]]}}"#;
        assert!(matches!(parse_dynamics(dep).unwrap(), Dynamics::Continuous { depolarizing_sigma: Some(_), .. }));
        let gkls = r#"{"kind":"gkls","H":{"dim":2,"re":[[1,0],[0,-1]]},"L":[{"dim":2,"re":[[0,1],[0,0]]}]}"#;
        assert!(matches!(parse_dynamics(gkls).unwrap(), Dynamics::Continuous { depolarizing_sigma: None, .. }));
        assert!(matches!(parse_dynamics(r#"{"kind":"random_pauli","n":2}"#).unwrap(), Dynamics::Discrete(_)));
        assert!(matches!(parse_dynamics(r#"{"kind":"pauli_noncontractive"}"#).unwrap(), Dynamics::Discrete(_)));
        assert!(parse_dynamics(r#"{"kind":"nope"}"#).is_err());
    }
}
