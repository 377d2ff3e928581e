//! Left null vectors and symmetric spectra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::scc::{tarjan, SccDecomposition};
use crate::{Error, Result};

const NULL_VECTOR_RESIDUAL: f64 = 1e-10;
const ROW_SUM_TOL: f64 = 1e-9;

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Positive `ξ` with `ξᵀ B = 0` and `Σ ξ = 1` for an irreducible block with
/// zero row sums.
///
/// Solves `Bᵀ ξ = 0` directly: the last equation is redundant (the rows of
/// `Bᵀ` sum to zero) and is replaced by the normalisation. One step of
/// iterative refinement follows the LU solve.
pub fn left_null_vector(block: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !block.is_square() || block.is_empty() {
        return Err(Error::Dimension(
            "left null vector needs a non-empty square block".into(),
        ));
    }
    let k = block.nrows();
    let norm = inf_norm(block);
    for i in 0..k {
        let s: f64 = block.row(i).iter().sum();
        if s.abs() > ROW_SUM_TOL * norm.max(1.0) {
            return Err(Error::Numeric {
                message: format!("block row {i} does not sum to zero"),
                residual: s.abs(),
            });
        }
    }
    if k == 1 {
        return Ok(vec![1.0]);
    }

    let links: Vec<Vec<usize>> = (0..k)
        .map(|j| (0..k).filter(|&i| i != j && block[(i, j)] != 0.0).collect())
        .collect();
    let comps = tarjan(&links);
    if comps.len() != 1 {
        return Err(Error::Reducible(format!(
            "{} strongly connected parts",
            comps.len()
        )));
    }

    let mut system = block.transpose();
    for c in 0..k {
        system[(k - 1, c)] = 1.0;
    }
    let mut rhs = DVector::zeros(k);
    rhs[k - 1] = 1.0;
    let lu = system.clone().lu();
    let mut xi = lu.solve(&rhs).ok_or_else(|| Error::Numeric {
        message: "singular normalised null-space system".into(),
        residual: f64::NAN,
    })?;
    let correction = rhs - &system * &xi;
    if let Some(delta) = lu.solve(&correction) {
        xi += delta;
    }
    let total = xi.sum();
    xi /= total;

    let residual = (xi.transpose() * block)
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    if residual > NULL_VECTOR_RESIDUAL * norm {
        return Err(Error::Numeric {
            message: "left null vector residual above tolerance".into(),
            residual,
        });
    }
    if let Some(bad) = xi.iter().find(|&&v| v <= 0.0) {
        return Err(Error::Numeric {
            message: "left null vector is not positive".into(),
            residual: *bad,
        });
    }
    Ok(xi.iter().copied().collect())
}

/// `ρ₂(Q^M) / ρ(U^M)` together with the semidefiniteness certificate for
/// `Q^M - ratio · U^M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralRatio {
    /// `+∞` when `degenerate`.
    pub ratio: f64,
    /// `ρ(U^M) = 0`, i.e. the closed SCC is a single agent.
    pub degenerate: bool,
    pub rho2_q: f64,
    pub rho_u: f64,
    /// Minimum eigenvalue of `Q^M - ratio · U^M` (of `Q^M` alone when degenerate).
    pub certificate_min_eig: f64,
}

impl SpectralRatio {
    pub fn certificate_holds(&self, tol: f64) -> bool {
        self.certificate_min_eig >= -tol
    }
}

pub fn spectral_ratio(dec: &SccDecomposition) -> SpectralRatio {
    let last = dec.closed_block();
    let spectra = &dec.closed;
    if spectra.rho_u <= f64::EPSILON {
        return SpectralRatio {
            ratio: f64::INFINITY,
            degenerate: true,
            rho2_q: spectra.rho2_q,
            rho_u: spectra.rho_u,
            certificate_min_eig: symmetric_eigenvalues(&last.q)
                .first()
                .copied()
                .unwrap_or(0.0),
        };
    }
    let ratio = spectra.rho2_q / spectra.rho_u;
    let gap = &last.q - &spectra.u * ratio;
    SpectralRatio {
        ratio,
        degenerate: false,
        rho2_q: spectra.rho2_q,
        rho_u: spectra.rho_u,
        certificate_min_eig: symmetric_eigenvalues(&gap)[0],
    }
}
