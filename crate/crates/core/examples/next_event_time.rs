//! Next triggering time for the symmetric two-agent case, where the first
//! crossing solves t^2 = e^{-t}.

use etcon::prelude::*;
use etcon::sim::EngineState;

fn main() {
    let g = WeightedDigraph::from_edges(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
    let scenario = Scenario::builder(g, OutputFunction::identity(1))
        .initial_states(States::from_scalars(&[1.0, 0.0]))
        .uniform_triggering(1.0, 1.0)
        .horizon(5.0)
        .build()
        .unwrap();
    let state = EngineState::initial(&scenario);
    println!("inputs at t = 0: {:?}", state.u.as_slice());
    for agent in 0..2 {
        let t = next_event_time(&state, &scenario, agent, 5.0, &EngineConfig::default()).unwrap();
        println!("agent {}: next event at {t:?}", agent + 1);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let m = 0.5 * (lo + hi);
        if m * m > (-m).exp() {
            hi = m
        } else {
            lo = m
        }
    }
    println!("bisection root of t^2 = e^-t: {lo:.12}");

    let record = run(&scenario, &EngineConfig::default()).unwrap();
    for (i, ev) in record.events.iter().enumerate() {
        println!("agent {} events: {:.5?}", i + 1, ev);
    }
}
