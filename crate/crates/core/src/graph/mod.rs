//! Weighted digraphs, in-degree Laplacians and connectivity.
//!
//! Weights follow the receiver-first convention `a_ij > 0` iff agent `j`
//! sends to agent `i`, so row `i` of the Laplacian `L = Deg_in - A` collects
//! everything agent `i` listens to.

mod io;
mod scc;
mod spectral;

use nalgebra::DMatrix;

pub use io::GraphSpec;
pub use scc::{condense, Block, ClosedBlockSpectra, SccDecomposition};
pub use spectral::{left_null_vector, spectral_ratio, symmetric_eigenvalues, SpectralRatio};

use crate::{Error, Result};

/// Row-sum tolerance used when a graph is given as a Laplacian.
const LAPLACIAN_ROW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    weights: DMatrix<f64>,
}

impl WeightedDigraph {
    /// Builds a graph from `weights[(i, j)] = a_ij`.
    pub fn from_adjacency(weights: DMatrix<f64>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::InvalidGraph(format!(
                "adjacency is {}×{}, expected square",
                weights.nrows(),
                weights.ncols()
            )));
        }
        for i in 0..weights.nrows() {
            for j in 0..weights.ncols() {
                let a = weights[(i, j)];
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::InvalidGraph(format!(
                        "weight a[{i}][{j}] = {a} is not a finite nonnegative value"
                    )));
                }
                if i == j && a != 0.0 {
                    return Err(Error::InvalidGraph(format!("self-loop a[{i}][{i}] = {a}")));
                }
            }
        }
        Ok(Self { weights })
    }

    /// Builds a graph from `(from, to, weight)` triples with 0-based agents;
    /// each triple sets `a[to][from] = weight`. Repeated pairs accumulate.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut w = DMatrix::zeros(n, n);
        for &(from, to, weight) in edges {
            if from >= n || to >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({from}, {to}) out of range for {n} agents"
                )));
            }
            if from == to {
                return Err(Error::InvalidGraph(format!("self-loop on agent {from}")));
            }
            w[(to, from)] += weight;
        }
        Self::from_adjacency(w)
    }

    /// Recovers `A` from a full Laplacian by negating its off-diagonals.
    /// Rows must sum to zero up to a relative tolerance of `1e-9`.
    pub fn from_laplacian(l: &DMatrix<f64>) -> Result<Self> {
        if !l.is_square() {
            return Err(Error::InvalidGraph("Laplacian must be square".into()));
        }
        let scale = l.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for i in 0..l.nrows() {
            let s: f64 = l.row(i).iter().sum();
            if s.abs() > LAPLACIAN_ROW_SUM_TOL * scale {
                return Err(Error::InvalidGraph(format!(
                    "Laplacian row {i} sums to {s:e}"
                )));
            }
        }
        let n = l.nrows();
        let w = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { -l[(i, j)] });
        Self::from_adjacency(w)
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    /// `a_ij`: weight with which agent `i` listens to agent `j`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Agents `j` with `a_ij > 0`, paired with the weight.
    pub fn in_neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.n()).filter_map(move |j| {
            let a = self.weights[(i, j)];
            (a > 0.0).then_some((j, a))
        })
    }

    /// Agents `i` that listen to `j`.
    pub fn out_neighbors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&i| self.weights[(i, j)] > 0.0)
    }

    /// `in_neighbors` for every agent, collected.
    pub(crate) fn in_neighbors_weighted(&self) -> Vec<Vec<(usize, f64)>> {
        (0..self.n())
            .map(|i| self.in_neighbors(i).collect())
            .collect()
    }

    /// Sender-to-receiver adjacency lists (the direction information flows).
    pub(crate) fn flow_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n())
            .map(|j| self.out_neighbors(j).collect())
            .collect()
    }

    /// `(from, to, weight)` triples in row-major order of `A`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for to in 0..n {
            for from in 0..n {
                let a = self.weights[(to, from)];
                if a > 0.0 {
                    out.push((from, to, a));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    pub entries: DMatrix<f64>,
    pub indegrees: Vec<f64>,
}

impl Laplacian {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }
}

/// `L = Deg_in - A`.
pub fn build_laplacian(g: &WeightedDigraph) -> Laplacian {
    let a = g.adjacency();
    let n = g.n();
    let indegrees: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
    let entries = DMatrix::from_fn(n, n, |i, j| if i == j { indegrees[i] } else { -a[(i, j)] });
    Laplacian { entries, indegrees }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Connectivity {
    StronglyConnected,
    SpanningTree,
    Neither,
}

pub fn classify_connectivity(g: &WeightedDigraph) -> Connectivity {
    let comps = scc::tarjan(&g.flow_lists());
    if comps.len() <= 1 {
        return Connectivity::StronglyConnected;
    }
    if scc::closed_components(g, &comps).len() == 1 {
        Connectivity::SpanningTree
    } else {
        Connectivity::Neither
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::bundled::seven_agent_laplacian;

    #[test]
    fn edgeless_laplacian_is_zero() {
        let g = WeightedDigraph::from_edges(3, &[]).unwrap();
        let l = build_laplacian(&g);
        assert!(l.entries.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_edge_laplacian() {
        // agent 1 receives from agent 2 with weight 2
        let g = WeightedDigraph::from_edges(2, &[(1, 0, 2.0)]).unwrap();
        let l = build_laplacian(&g);
        assert_eq!(
            l.entries,
            DMatrix::from_row_slice(2, 2, &[2.0, -2.0, 0.0, 0.0])
        );
        assert_eq!(l.indegrees, vec![2.0, 0.0]);
    }

    #[test]
    fn seven_agent_adjacency_rebuilds_laplacian() {
        let expected = seven_agent_laplacian();
        let a = DMatrix::from_fn(7, 7, |i, j| if i == j { 0.0 } else { -expected[(i, j)] });
        let l = build_laplacian(&WeightedDigraph::from_adjacency(a).unwrap());
        for (x, y) in l.entries.iter().zip(expected.iter()) {
            assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
        }
        for i in 0..7 {
            assert!(l.entries.row(i).iter().sum::<f64>().abs() <= 1e-12);
        }
    }

    #[test]
    fn rejects_negative_weight_and_self_loop() {
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 1)] = -1.0;
        assert!(matches!(
            WeightedDigraph::from_adjacency(a),
            Err(Error::InvalidGraph(_))
        ));
        let mut a = DMatrix::zeros(2, 2);
        a[(1, 1)] = 0.5;
        assert!(matches!(
            WeightedDigraph::from_adjacency(a),
            Err(Error::InvalidGraph(_))
        ));
    }

    #[test]
    fn laplacian_loader_checks_row_sums() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, 0.0, 0.0]);
        assert!(WeightedDigraph::from_laplacian(&bad).is_err());
        let g = WeightedDigraph::from_laplacian(&seven_agent_laplacian()).unwrap();
        assert_eq!(g.weight(0, 2), 5.2);
        assert_eq!(g.weight(4, 3), 0.0);
    }

    #[test]
    fn classification_examples() {
        let cycle = WeightedDigraph::from_edges(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(
            classify_connectivity(&cycle),
            Connectivity::StronglyConnected
        );
        // v2 -> v1
        let chain = WeightedDigraph::from_edges(2, &[(1, 0, 1.0)]).unwrap();
        assert_eq!(classify_connectivity(&chain), Connectivity::SpanningTree);
        let seven = WeightedDigraph::from_laplacian(&seven_agent_laplacian()).unwrap();
        assert_eq!(classify_connectivity(&seven), Connectivity::SpanningTree);
        let empty = WeightedDigraph::from_edges(3, &[]).unwrap();
        assert_eq!(classify_connectivity(&empty), Connectivity::Neither);
        // two roots feeding one agent
        let forked = WeightedDigraph::from_edges(3, &[(0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(classify_connectivity(&forked), Connectivity::Neither);
    }
}
