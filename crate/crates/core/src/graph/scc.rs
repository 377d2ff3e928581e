//! Strongly connected components and the block upper-triangular form.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use super::spectral::{left_null_vector, symmetric_eigenvalues};
use super::{build_laplacian, WeightedDigraph};
use crate::{Error, Result};

/// Tarjan's algorithm over adjacency lists. Components come out in reverse
/// topological order of the condensation; members are unsorted.
pub(crate) fn tarjan(graph: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State {
        index: usize,
        stack: Vec<usize>,
        on_stack: Vec<bool>,
        idx: Vec<Option<usize>>,
        low: Vec<usize>,
        comps: Vec<Vec<usize>>,
    }

    fn strongconnect(v: usize, graph: &[Vec<usize>], s: &mut State) {
        s.idx[v] = Some(s.index);
        s.low[v] = s.index;
        s.index += 1;
        s.stack.push(v);
        s.on_stack[v] = true;

        for &w in &graph[v] {
            match s.idx[w] {
                None => {
                    strongconnect(w, graph, s);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                Some(_) => {}
            }
        }

        if Some(s.low[v]) == s.idx[v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().expect("tarjan stack underflow");
                s.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            s.comps.push(comp);
        }
    }

    let n = graph.len();
    let mut s = State {
        index: 0,
        stack: Vec::new(),
        on_stack: vec![false; n],
        idx: vec![None; n],
        low: vec![0; n],
        comps: Vec::new(),
    };
    for v in 0..n {
        if s.idx[v].is_none() {
            strongconnect(v, graph, &mut s);
        }
    }
    s.comps
}

/// Components that receive nothing from agents outside themselves.
pub(crate) fn closed_components(g: &WeightedDigraph, comps: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let comp_of = component_index(g.n(), comps);
    comps
        .iter()
        .enumerate()
        .filter(|(c, members)| {
            members
                .iter()
                .all(|&i| g.in_neighbors(i).all(|(j, _)| comp_of[j] == *c))
        })
        .map(|(_, members)| {
            let mut m = members.clone();
            m.sort_unstable();
            m
        })
        .collect()
}

fn component_index(n: usize, comps: &[Vec<usize>]) -> Vec<usize> {
    let mut comp_of = vec![0; n];
    for (c, members) in comps.iter().enumerate() {
        for &v in members {
            comp_of[v] = c;
        }
    }
    comp_of
}

/// Spectral data attached to every diagonal block `L^{m,m}`.
#[derive(Debug, Clone)]
pub struct Block {
    /// Original agent indices, ascending.
    pub agents: Vec<usize>,
    /// Position of the block inside the permuted ordering.
    pub range: Range<usize>,
    /// `L^{m,m}`.
    pub laplacian: DMatrix<f64>,
    /// `L̃^{m,m}`: `L^{m,m}` with its diagonal replaced by the negated
    /// in-block off-diagonal row sums.
    pub tilde: DMatrix<f64>,
    /// Diagonal of `L^{m,m} - L̃^{m,m}`: weight received from later blocks.
    pub d: Vec<f64>,
    /// Positive left null vector of `L̃^{m,m}` summing to one.
    pub xi: Vec<f64>,
    /// `Q^m = ½(Ξ L^{m,m} + (Ξ L^{m,m})ᵀ)`.
    pub q: DMatrix<f64>,
    pub q_min_eig: f64,
    pub q_spectral_radius: f64,
}

impl Block {
    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }
}

/// Extra quantities for the closed (last) block.
#[derive(Debug, Clone)]
pub struct ClosedBlockSpectra {
    /// `U = Ξ - ξ ξᵀ`.
    pub u: DMatrix<f64>,
    /// Smallest eigenvalue of `Q^M` above `1e-9 · ρ(Q^M)`; zero if none.
    pub rho2_q: f64,
    pub rho_u: f64,
}

#[derive(Debug, Clone)]
pub struct SccDecomposition {
    /// `permutation[k]` is the original index of the agent at position `k`.
    pub permutation: Vec<usize>,
    pub blocks: Vec<Block>,
    /// `P L Pᵀ`; block upper triangular.
    pub permuted_laplacian: DMatrix<f64>,
    pub closed: ClosedBlockSpectra,
}

impl SccDecomposition {
    /// Number of blocks `M`.
    pub fn depth(&self) -> usize {
        self.blocks.len()
    }

    pub fn closed_block(&self) -> &Block {
        self.blocks
            .last()
            .expect("decomposition has at least one block")
    }

    /// `L^{m,q}` (0-based block indices).
    pub fn block_matrix(&self, m: usize, q: usize) -> DMatrix<f64> {
        let rm = &self.blocks[m].range;
        let rq = &self.blocks[q].range;
        self.permuted_laplacian
            .view((rm.start, rq.start), (rm.len(), rq.len()))
            .into_owned()
    }

    /// Block index of original agent `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.agents.binary_search(&i).is_ok())
            .expect("agent belongs to a block")
    }

    /// `ξ` over all agents (original order) when `M = 1`.
    pub fn global_xi(&self) -> Option<Vec<f64>> {
        (self.depth() == 1).then(|| {
            let b = &self.blocks[0];
            let mut xi = vec![0.0; b.len()];
            for (k, &i) in b.agents.iter().enumerate() {
                xi[i] = b.xi[k];
            }
            xi
        })
    }
}

/// Permutes the graph into block upper-triangular form with the unique
/// closed SCC last.
///
/// Blocks are emitted in an order where every block only listens to itself
/// and to later blocks; incomparable blocks are ordered by their smallest
/// agent index.
pub fn condense(g: &WeightedDigraph) -> Result<SccDecomposition> {
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidGraph("graph has no agents".into()));
    }
    let mut comps = tarjan(&g.flow_lists());
    for c in &mut comps {
        c.sort_unstable();
    }
    let closed = closed_components(g, &comps);
    if closed.len() != 1 {
        return Err(Error::NoSpanningTree { closed });
    }

    let order = block_order(g, &comps);
    let permutation: Vec<usize> = order
        .iter()
        .flat_map(|&c| comps[c].iter().copied())
        .collect();

    let l = build_laplacian(g);
    let permuted = DMatrix::from_fn(n, n, |r, c| l.entries[(permutation[r], permutation[c])]);

    let mut blocks = Vec::with_capacity(order.len());
    let mut start = 0;
    for &c in &order {
        let agents = comps[c].clone();
        let range = start..start + agents.len();
        start = range.end;
        blocks.push(block_data(&permuted, agents, range)?);
    }

    let last = blocks.last().expect("at least one block");
    let closed = closed_spectra(last);
    Ok(SccDecomposition {
        permutation,
        blocks,
        permuted_laplacian: permuted,
        closed,
    })
}

fn block_order(g: &WeightedDigraph, comps: &[Vec<usize>]) -> Vec<usize> {
    let m = comps.len();
    let comp_of = component_index(g.n(), comps);
    // listens_to[x] = blocks x receives from; x must precede each of them
    let mut listens_to = vec![Vec::new(); m];
    let mut listeners = vec![0usize; m];
    for (x, members) in comps.iter().enumerate() {
        let mut sources: Vec<usize> = members
            .iter()
            .flat_map(|&i| g.in_neighbors(i).map(|(j, _)| comp_of[j]))
            .filter(|&y| y != x)
            .collect();
        sources.sort_unstable();
        sources.dedup();
        for &y in &sources {
            listeners[y] += 1;
        }
        listens_to[x] = sources;
    }
    let key = |c: usize| comps[c][0];
    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = (0..m)
        .filter(|&c| listeners[c] == 0)
        .map(|c| Reverse((key(c), c)))
        .collect();
    let mut order = Vec::with_capacity(m);
    while let Some(Reverse((_, x))) = ready.pop() {
        order.push(x);
        for &y in &listens_to[x] {
            listeners[y] -= 1;
            if listeners[y] == 0 {
                ready.push(Reverse((key(y), y)));
            }
        }
    }
    debug_assert_eq!(order.len(), m, "condensation must be acyclic");
    order
}

fn block_data(permuted: &DMatrix<f64>, agents: Vec<usize>, range: Range<usize>) -> Result<Block> {
    let k = range.len();
    let lmm = permuted
        .view((range.start, range.start), (k, k))
        .into_owned();
    let mut tilde = lmm.clone();
    for i in 0..k {
        let off: f64 = (0..k).filter(|&j| j != i).map(|j| lmm[(i, j)]).sum();
        tilde[(i, i)] = -off;
    }
    let d: Vec<f64> = (0..k).map(|i| lmm[(i, i)] - tilde[(i, i)]).collect();
    let xi = left_null_vector(&tilde)?;
    let xi_diag = DMatrix::from_diagonal(&DVector::from_column_slice(&xi));
    let xl = &xi_diag * &lmm;
    let q = (&xl + xl.transpose()) * 0.5;
    let eig = symmetric_eigenvalues(&q);
    let q_min_eig = eig.first().copied().unwrap_or(0.0);
    let q_spectral_radius = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(Block {
        agents,
        range,
        laplacian: lmm,
        tilde,
        d,
        xi,
        q,
        q_min_eig,
        q_spectral_radius,
    })
}

fn closed_spectra(b: &Block) -> ClosedBlockSpectra {
    let xi = DVector::from_column_slice(&b.xi);
    let u = DMatrix::from_diagonal(&xi) - &xi * xi.transpose();
    let u_eig = symmetric_eigenvalues(&u);
    let rho_u = u_eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let threshold = 1e-9 * b.q_spectral_radius;
    let rho2_q = symmetric_eigenvalues(&b.q)
        .into_iter()
        .find(|&v| v > threshold)
        .unwrap_or(0.0);
    ClosedBlockSpectra { u, rho2_q, rho_u }
}
