//! Condenses the seven-agent graph into its strongly connected blocks and
//! prints the spectral data attached to each.

use etcon::cli::bundled::seven_agent_laplacian;
use etcon::graph::{condense, spectral_ratio, WeightedDigraph};
use etcon::prelude::*;

fn main() {
    let g = WeightedDigraph::from_laplacian(&seven_agent_laplacian()).unwrap();
    println!("connectivity: {:?}", classify_connectivity(&g));
    let dec = condense(&g).unwrap();
    println!(
        "permutation (1-based): {:?}",
        dec.permutation.iter().map(|i| i + 1).collect::<Vec<_>>()
    );
    for (m, b) in dec.blocks.iter().enumerate() {
        println!(
            "block {}: agents {:?}, xi {:.4?}, d {:?}, min eig Q {:.4}, rho(Q) {:.4}",
            m + 1,
            b.agents.iter().map(|i| i + 1).collect::<Vec<_>>(),
            b.xi,
            b.d,
            b.q_min_eig,
            b.q_spectral_radius
        );
    }
    let r = spectral_ratio(&dec);
    println!(
        "closed block: rho2(Q) = {:.4}, rho(U) = {:.4}, ratio = {:.4}, certificate min eig = {:.2e}",
        r.rho2_q, r.rho_u, r.ratio, r.certificate_min_eig
    );
    println!("permuted Laplacian:{:.1}", dec.permuted_laplacian);
}
