//! Lyapunov candidates evaluated along simulated trajectories.
//!
//! With one block (strongly connected graph):
//!
//! ```text
//! V(t) = Σ_i ξ_i Σ_l ∫_{r_l}^{x_{i,l}(t)} (g_l(s) - g_l(r_l)) ds
//! W(t) = V(t) + 2 Σ_i ξ_i L_ii α_i / β_i · e^{-β_i t}
//! ```
//!
//! With two blocks, `V1` and `V2` are the same sums restricted to each block
//! (reference `ν(0)`), and
//!
//! ```text
//! W_r = V1 + K_v V2 + 3 n1 Σ_j d¹_j α_j/β_j e^{-β_j t}
//!                   + 3 n2 Σ_j d²_j α_j/β_j e^{-β_j t}
//!                   + K_v Σ_j ξ²_j L²²_jj α_j/β_j e^{-β_j t}
//! ```
//!
//! Deeper condensations are rejected.

use serde::Serialize;

use super::weighted_initial_average;
use crate::graph::SccDecomposition;
use crate::nonlinearity::Outputs;
use crate::sim::{Scenario, SimulationRecord};
use crate::states::States;
use crate::{Error, Result};

/// `Σ_{k ∈ block m} ξ^m_k Σ_l G_l(x_k)` with `G_l` anchored at `reference_l`.
pub fn lyapunov_block_v(
    dec: &SccDecomposition,
    m: usize,
    outputs: &Outputs,
    x: &States,
    reference: &[f64],
) -> Result<f64> {
    let b = &dec.blocks[m];
    let mut v = 0.0;
    for (&i, &w) in b.agents.iter().zip(&b.xi) {
        let f = outputs.for_agent(i);
        let mut s = 0.0;
        for (l, (&xl, &rl)) in x.row(i).iter().zip(reference).enumerate() {
            s += f.antiderivative(l, rl, xl)?;
        }
        v += w * s;
    }
    Ok(v)
}

/// Sum of the per-block values; for a strongly connected graph this is `V`.
pub fn lyapunov_v(
    dec: &SccDecomposition,
    outputs: &Outputs,
    x: &States,
    reference: &[f64],
) -> Result<f64> {
    if reference.len() != x.dim() {
        return Err(Error::Dimension(format!(
            "reference has {} components, states {}",
            reference.len(),
            x.dim()
        )));
    }
    (0..dec.depth())
        .map(|m| lyapunov_block_v(dec, m, outputs, x, reference))
        .sum()
}

/// Constants of the two-block construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoBlockConstants {
    /// `ρ(Q¹)`.
    pub rho_q1: f64,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// Lipschitz bound of `g` on `[-h, h]` over the closed block.
    pub k_s2: f64,
    pub varrho: f64,
    pub rho2_q2: f64,
    pub rho_u2: f64,
    /// Zero when the closed block is a single agent (`ρ(U²) = 0`); `V2` is
    /// then identically zero.
    pub k_v: f64,
}

impl TwoBlockConstants {
    fn new(dec: &SccDecomposition, outputs: &Outputs) -> Self {
        let (b1, b2) = (&dec.blocks[0], &dec.blocks[1]);
        let l11 = dec.block_matrix(0, 0);
        let l12 = dec.block_matrix(0, 1);
        let rho_q1 = b1.q_spectral_radius;
        let col = |m: &nalgebra::DMatrix<f64>, j: usize| -> f64 {
            (0..b1.len())
                .map(|i| (b1.xi[i] * m[(i, j)]).powi(2))
                .sum::<f64>()
                / rho_q1
        };
        let d1: Vec<f64> = (0..b1.len()).map(|j| col(&l11, j)).collect();
        let d2: Vec<f64> = (0..b2.len()).map(|j| col(&l12, j)).collect();
        let k_s2 = b2
            .agents
            .iter()
            .flat_map(|&i| outputs.for_agent(i).components().iter())
            .map(|c| {
                let h = if c.h.is_finite() { c.h } else { 1.0 };
                c.lipschitz_on(-h, h)
            })
            .fold(0.0, f64::max);
        let varrho = outputs.varrho_over(b2.agents.iter().copied());
        let (rho2_q2, rho_u2) = (dec.closed.rho2_q, dec.closed.rho_u);
        let n2 = b2.len() as f64;
        let max_d2 = d2.iter().copied().fold(0.0, f64::max);
        let min_xi2 = b2.xi.iter().copied().fold(f64::INFINITY, f64::min);
        let k_v = if rho_u2 > 0.0 && rho2_q2 > 0.0 {
            (2.0 * n2 * k_s2 * k_s2 * max_d2 / min_xi2 + 1.0) * 2.0 * rho_u2
                / (varrho * varrho * rho2_q2)
        } else {
            0.0
        };
        Self {
            rho_q1,
            d1,
            d2,
            k_s2,
            varrho,
            rho2_q2,
            rho_u2,
            k_v,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovSeries {
    pub depth: usize,
    /// `x̄(0)` or `ν(0)`.
    pub reference: Vec<f64>,
    pub times: Vec<f64>,
    /// One-block series; empty otherwise.
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// Two-block series; empty otherwise.
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub wr: Vec<f64>,
    /// `½ Σ_{i ∈ closed} ξ_i ‖g(x_i) - ν(0)‖²`.
    pub mu: Vec<f64>,
    /// `q_i(t) = -½ Σ_j L_ij ‖g(x_j) - g(x_i)‖²`, one row per sample.
    pub q: Vec<Vec<f64>>,
    pub constants: Option<TwoBlockConstants>,
    /// First sample time after which every closed-block state stays inside
    /// `(-h, h)`.
    pub t1: Option<f64>,
}

impl LyapunovSeries {
    /// `W` for one block, `W_r` for two.
    pub fn primary(&self) -> &[f64] {
        if self.depth == 1 {
            &self.w
        } else {
            &self.wr
        }
    }

    pub fn min_value(&self) -> f64 {
        self.v
            .iter()
            .chain(&self.v1)
            .chain(&self.v2)
            .chain(&self.w)
            .chain(&self.wr)
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Largest increase `f(t_{k+1}) - f(t_k)` over consecutive samples with
/// `t_k ≥ from`; zero or negative for a nonincreasing series.
pub fn nonincreasing_violation(times: &[f64], values: &[f64], from: f64) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .filter(|(t, _)| t[0] >= from)
        .map(|(_, v)| v[1] - v[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Earliest sample time from which every closed-block agent satisfies
/// `|x_{i,l}| < h_l` at all later samples.
pub fn detect_t1(
    dec: &SccDecomposition,
    outputs: &Outputs,
    record: &SimulationRecord,
) -> Option<f64> {
    let closed = &dec.closed_block().agents;
    let inside = |x: &States| {
        closed.iter().all(|&i| {
            let f = outputs.for_agent(i);
            x.row(i)
                .iter()
                .zip(f.components())
                .all(|(v, c)| v.abs() < c.h)
        })
    };
    let mut t1 = None;
    for s in record.samples.iter().rev() {
        if !inside(&s.x) {
            break;
        }
        t1 = Some(s.t);
    }
    t1
}

pub fn lyapunov_series(
    dec: &SccDecomposition,
    scenario: &Scenario,
    record: &SimulationRecord,
) -> Result<LyapunovSeries> {
    let depth = dec.depth();
    if depth > 2 {
        return Err(Error::UnsupportedDepth(depth));
    }
    let outputs = &scenario.outputs;
    let reference = weighted_initial_average(dec, &scenario.x0);
    let n = scenario.n();
    let p = scenario.p();
    let neighbours: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| scenario.graph.in_neighbors(i).collect())
        .collect();
    let constants = (depth == 2).then(|| TwoBlockConstants::new(dec, outputs));
    let lap = &dec.permuted_laplacian;
    let closed = dec.closed_block();

    let mut out = LyapunovSeries {
        depth,
        reference: reference.clone(),
        times: Vec::with_capacity(record.samples.len()),
        v: Vec::new(),
        w: Vec::new(),
        v1: Vec::new(),
        v2: Vec::new(),
        wr: Vec::new(),
        mu: Vec::new(),
        q: Vec::new(),
        constants: constants.clone(),
        t1: detect_t1(dec, outputs, record),
    };

    let mut g = States::zeros(n, p);
    for s in &record.samples {
        let t = s.t;
        for i in 0..n {
            outputs.for_agent(i).apply_into(s.x.row(i), g.row_mut(i));
        }
        let q: Vec<f64> = (0..n)
            .map(|i| {
                0.5 * neighbours[i]
                    .iter()
                    .map(|&(j, a)| {
                        a * g
                            .row(j)
                            .iter()
                            .zip(g.row(i))
                            .map(|(x, y)| (x - y) * (x - y))
                            .sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .collect();
        let mu = 0.5
            * closed
                .agents
                .iter()
                .zip(&closed.xi)
                .map(|(&i, &w)| {
                    w * g
                        .row(i)
                        .iter()
                        .zip(&reference)
                        .map(|(x, r)| (x - r) * (x - r))
                        .sum::<f64>()
                })
                .sum::<f64>();
        // Σ_j c_j α_j/β_j e^{-β_j t} over one block, with per-position weights c
        let tail = |m: usize, c: &dyn Fn(usize) -> f64| -> f64 {
            dec.blocks[m]
                .agents
                .iter()
                .enumerate()
                .map(|(k, &i)| {
                    c(k) * scenario.alpha[i] / scenario.beta[i] * (-scenario.beta[i] * t).exp()
                })
                .sum()
        };
        out.times.push(t);
        out.q.push(q);
        out.mu.push(mu);
        if depth == 1 {
            let v = lyapunov_block_v(dec, 0, outputs, &s.x, &reference)?;
            let b = &dec.blocks[0];
            let extra = 2.0
                * tail(0, &|k| {
                    b.xi[k] * lap[(b.range.start + k, b.range.start + k)]
                });
            out.v.push(v);
            out.w.push(v + extra);
        } else {
            let c = constants.as_ref().expect("two-block constants");
            let v1 = lyapunov_block_v(dec, 0, outputs, &s.x, &reference)?;
            let v2 = lyapunov_block_v(dec, 1, outputs, &s.x, &reference)?;
            let (n1, n2) = (dec.blocks[0].len() as f64, dec.blocks[1].len() as f64);
            let b2 = &dec.blocks[1];
            let wr = v1
                + c.k_v * v2
                + 3.0 * n1 * tail(0, &|k| c.d1[k])
                + 3.0 * n2 * tail(1, &|k| c.d2[k])
                + c.k_v
                    * tail(1, &|k| {
                        b2.xi[k] * lap[(b2.range.start + k, b2.range.start + k)]
                    });
            out.v1.push(v1);
            out.v2.push(v2);
            out.wr.push(wr);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{condense, WeightedDigraph};
    use crate::nonlinearity::OutputFunction;

    fn cycle2() -> SccDecomposition {
        condense(&WeightedDigraph::from_edges(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap()).unwrap()
    }

    #[test]
    fn v_vanishes_at_reference() {
        let dec = cycle2();
        let out: Outputs = OutputFunction::saturation(1, 1.0).into();
        assert_eq!(
            lyapunov_v(&dec, &out, &States::from_scalars(&[0.3, 0.3]), &[0.3]).unwrap(),
            0.0
        );
    }

    #[test]
    fn identity_v_is_weighted_quadratic() {
        let dec = cycle2();
        let out: Outputs = OutputFunction::identity(1).into();
        let v = lyapunov_v(&dec, &out, &States::from_scalars(&[1.0, 0.0]), &[0.5]).unwrap();
        assert!((v - 0.125).abs() < 1e-15);
    }

    #[test]
    fn violation_ignores_samples_before_cutoff() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let v = [1.0, 2.0, 1.5, 1.0];
        assert_eq!(nonincreasing_violation(&t, &v, 0.0), 1.0);
        assert_eq!(nonincreasing_violation(&t, &v, 1.0), -0.5);
    }
}
