//! Dense `n × p` agent-state storage.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Row-major `n × p` matrix: one row of `p` components per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct States {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl States {
    pub fn zeros(n: usize, p: usize) -> Self {
        Self {
            n,
            p,
            data: vec![0.0; n * p],
        }
    }

    pub fn from_flat(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::Dimension(format!(
                "expected {} values for {n} agents × {p} components, got {}",
                n * p,
                data.len()
            )));
        }
        Ok(Self { n, p, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if p == 0 {
            return Err(Error::Dimension(
                "states need at least one component".into(),
            ));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::Dimension(format!(
                "agent {i} has {} components, expected {p}",
                r.len()
            )));
        }
        Ok(Self {
            n,
            p,
            data: rows.concat(),
        })
    }

    /// Scalar agents (`p = 1`).
    pub fn from_scalars(values: &[f64]) -> Self {
        Self {
            n: values.len(),
            p: 1,
            data: values.to_vec(),
        }
    }

    pub fn agents(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn get(&self, i: usize, l: usize) -> f64 {
        self.data[i * self.p + l]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.p.max(1))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
