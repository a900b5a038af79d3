use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};

/// How the entries of a [`Network`] are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Nonnegative transmission rates summed into the hazard.
    Additive,
    /// Signed log-influences; the hazard multiplies `exp(alpha)` factors.
    Multiplicative,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Additive => "additive",
            ModelKind::Multiplicative => "multiplicative",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(ModelKind::Additive),
            "multiplicative" => Ok(ModelKind::Multiplicative),
            other => Err(Error::InvalidConfig(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Dense edge-parameter matrix. Entry `(j, i)` is the influence of node `j`
/// on node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    kind: ModelKind,
    params: Array2<f64>,
}

impl Network {
    pub fn new(kind: ModelKind, params: Array2<f64>) -> Result<Self> {
        let (rows, cols) = params.dim();
        if rows != cols {
            return Err(Error::InvalidNetwork(format!(
                "parameter matrix must be square, got {rows}x{cols}"
            )));
        }
        for ((j, i), &a) in params.indexed_iter() {
            if !a.is_finite() {
                return Err(Error::InvalidNetwork(format!("entry ({j}, {i}) is {a}")));
            }
            if j == i && a != 0.0 {
                return Err(Error::InvalidNetwork(format!(
                    "self-influence ({j}, {j}) must be 0, got {a}"
                )));
            }
            if kind == ModelKind::Additive && a < 0.0 {
                return Err(Error::InvalidNetwork(format!(
                    "additive rate ({j}, {i}) is negative: {a}"
                )));
            }
        }
        Ok(Network { kind, params })
    }

    pub fn zeros(kind: ModelKind, num_nodes: usize) -> Self {
        Network {
            kind,
            params: Array2::zeros((num_nodes, num_nodes)),
        }
    }

    /// Builds a network from `(j, i, alpha)` triples; unlisted entries are 0.
    pub fn from_edges(
        kind: ModelKind,
        num_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut params = Array2::zeros((num_nodes, num_nodes));
        for (j, i, a) in edges {
            if j >= num_nodes || i >= num_nodes {
                return Err(Error::InvalidNetwork(format!(
                    "edge ({j}, {i}) outside a {num_nodes}-node universe"
                )));
            }
            params[[j, i]] = a;
        }
        Network::new(kind, params)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn num_nodes(&self) -> usize {
        self.params.nrows()
    }

    pub fn params(&self) -> &Array2<f64> {
        &self.params
    }

    /// Influence of `j` on `i`.
    #[inline]
    pub fn alpha(&self, j: usize, i: usize) -> f64 {
        self.params[[j, i]]
    }

    /// Nonzero off-diagonal entries as `(j, i, alpha)`, row-major.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.params
            .indexed_iter()
            .filter(|&((j, i), &a)| j != i && a != 0.0)
            .map(|((j, i), &a)| (j, i, a))
            .collect()
    }

    /// For every node, the nodes it influences with a nonzero parameter.
    pub fn out_neighbors(&self) -> Vec<Vec<usize>> {
        let n = self.num_nodes();
        (0..n)
            .map(|j| (0..n).filter(|&i| i != j && self.params[[j, i]] != 0.0).collect())
            .collect()
    }

    pub(crate) fn expect_kind(&self, expected: ModelKind) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::WrongKind {
                expected,
                found: self.kind,
            })
        }
    }

    pub(crate) fn expect_nodes(&self, n: usize) -> Result<()> {
        if self.num_nodes() == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: n,
                found: self.num_nodes(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn validates_invariants() {
        assert!(Network::new(ModelKind::Additive, array![[0.0, 1.0], [0.0, 0.0]]).is_ok());
        assert!(Network::new(ModelKind::Additive, array![[0.0, -1.0], [0.0, 0.0]]).is_err());
        assert!(Network::new(ModelKind::Multiplicative, array![[0.0, -1.0], [0.0, 0.0]]).is_ok());
        assert!(Network::new(ModelKind::Multiplicative, array![[1.0, 0.0], [0.0, 0.0]]).is_err());
        assert!(Network::new(ModelKind::Multiplicative, array![[0.0, f64::NAN], [0.0, 0.0]]).is_err());
        assert!(Network::new(ModelKind::Additive, Array2::zeros((2, 3))).is_err());
    }

    #[test]
    fn edges_and_neighbors() {
        let net = Network::from_edges(ModelKind::Additive, 3, [(0, 1, 0.5), (2, 1, 0.25)]).unwrap();
        assert_eq!(net.edges(), vec![(0, 1, 0.5), (2, 1, 0.25)]);
        assert_eq!(net.out_neighbors(), vec![vec![1], vec![], vec![1]]);
        assert!(Network::from_edges(ModelKind::Additive, 2, [(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn kind_round_trips_through_strings() {
        for kind in [ModelKind::Additive, ModelKind::Multiplicative] {
            assert_eq!(kind.to_string().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("cox".parse::<ModelKind>().is_err());
    }
}
