//! With a tiny threshold the event-triggered flow approaches x' = -Lx.
//! Compares against the matrix exponential at a few times.

use etcon::graph::build_laplacian;
use etcon::prelude::*;
use nalgebra::DVector;

fn main() {
    let g = WeightedDigraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 0.7), (2, 0, 1.3)]).unwrap();
    let x0 = [3.0, -1.0, 0.5];
    let l = build_laplacian(&g).entries;
    for alpha in [1e-2, 1e-6, 1e-10] {
        let s = Scenario::builder(g.clone(), OutputFunction::identity(1))
            .initial_states(States::from_scalars(&x0))
            .uniform_triggering(alpha, 1.0)
            .horizon(5.0)
            .build()
            .unwrap();
        let rec = run(
            &s,
            &EngineConfig {
                stride: 0.5,
                record_segments: false,
                ..EngineConfig::default()
            },
        )
        .unwrap();
        let worst = rec
            .samples
            .iter()
            .map(|smp| {
                let exact = (&l * -smp.t).exp() * DVector::from_column_slice(&x0);
                smp.x
                    .as_slice()
                    .iter()
                    .zip(exact.iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        println!(
            "alpha = {alpha:.0e}: {:>7} events, sup deviation {worst:.3e}",
            rec.total_events()
        );
    }
}
