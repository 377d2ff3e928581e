//! Text representation of graphs.
//!
//! Either an edge list (1-based agents, `[from, to, weight]` meaning
//! `a[to][from] = weight`):
//!
//! ```toml
//! n = 3
//! edges = [[1, 2, 1.0], [2, 3, 0.5], [3, 1, 2.0]]
//! ```
//!
//! or a full Laplacian given row by row:
//!
//! ```toml
//! laplacian = [[1.0, -1.0], [-1.0, 1.0]]
//! ```

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::WeightedDigraph;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSpec {
    Edges {
        n: usize,
        edges: Vec<(usize, usize, f64)>,
    },
    Laplacian {
        laplacian: Vec<Vec<f64>>,
    },
}

impl GraphSpec {
    pub fn to_graph(&self) -> Result<WeightedDigraph> {
        match self {
            GraphSpec::Edges { n, edges } => {
                let mut zero_based = Vec::with_capacity(edges.len());
                for &(from, to, w) in edges {
                    if from == 0 || to == 0 {
                        return Err(Error::InvalidGraph(format!(
                            "edge [{from}, {to}, {w}]: agents are numbered from 1"
                        )));
                    }
                    zero_based.push((from - 1, to - 1, w));
                }
                WeightedDigraph::from_edges(*n, &zero_based)
            }
            GraphSpec::Laplacian { laplacian } => {
                let n = laplacian.len();
                if let Some(r) = laplacian.iter().position(|r| r.len() != n) {
                    return Err(Error::InvalidGraph(format!(
                        "Laplacian row {} has {} entries, expected {n}",
                        r + 1,
                        laplacian[r].len()
                    )));
                }
                let m = DMatrix::from_row_iterator(n, n, laplacian.iter().flatten().copied());
                WeightedDigraph::from_laplacian(&m)
            }
        }
    }

    /// Edge-list form of `g`.
    pub fn from_graph(g: &WeightedDigraph) -> Self {
        GraphSpec::Edges {
            n: g.n(),
            edges: g
                .edges()
                .into_iter()
                .map(|(f, t, w)| (f + 1, t + 1, w))
                .collect(),
        }
    }
}

impl WeightedDigraph {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: GraphSpec = toml::from_str(s).map_err(|e| Error::Parse {
            path: "<graph>".into(),
            message: e.to_string(),
        })?;
        spec.to_graph()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_is_one_based_receiver_first() {
        let g = WeightedDigraph::from_toml_str("n = 2\nedges = [[2, 1, 2.5]]\n").unwrap();
        assert_eq!(g.weight(0, 1), 2.5);
        assert_eq!(g.weight(1, 0), 0.0);
    }

    #[test]
    fn laplacian_form() {
        let g = WeightedDigraph::from_toml_str("laplacian = [[1.0, -1.0], [-1.0, 1.0]]").unwrap();
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 0), 1.0);
    }

    #[test]
    fn zero_index_rejected() {
        assert!(WeightedDigraph::from_toml_str("n = 2\nedges = [[0, 1, 1.0]]").is_err());
    }

    #[test]
    fn malformed_reports_location() {
        let err = WeightedDigraph::from_toml_str("n = 2\nedges = [[1, 2, ]").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }
}
