//! Runs the two bundled seven-agent scenarios.
//!
//! Scenario A under the exact law produces ever shorter inter-event times,
//! so it is run twice: with a small event budget to show the guard, and with
//! a tiny threshold floor to reach the horizon.

use etcon::analysis::terminal_spread;
use etcon::cli::bundled;
use etcon::graph::condense;
use etcon::prelude::*;

fn report(label: &str, scenario: &Scenario, cfg: &EngineConfig) {
    let dec = condense(&scenario.graph).unwrap();
    let cond = check_conditions(&dec, &scenario.outputs, &scenario.x0);
    let record = match run(scenario, cfg) {
        Ok(r) => r,
        Err(Error::ZenoSuspected(z)) => {
            println!(
                "{label}: guard fired for agent {} at t = {:.4} (shrink rate {:?})",
                z.agent + 1,
                z.time,
                z.shrink_rate
            );
            z.partial
        }
        Err(e) => panic!("{e}"),
    };
    let spread = terminal_spread(&cond.consensus_value, &record.final_state);
    println!(
        "{label}: nu(0) = {:.4}, sufficient = {}, necessary = {:?}, t = {:.3}, spread {:.2e}, events {:?}",
        cond.consensus_value[0],
        cond.sufficient,
        cond.necessary,
        record.end_time,
        spread,
        record.event_counts()
    );
}

fn main() {
    let a = bundled::bundled("paper_fig2")
        .unwrap()
        .to_scenario()
        .unwrap();
    let b = bundled::bundled("paper_fig3")
        .unwrap()
        .to_scenario()
        .unwrap();
    let lean = EngineConfig {
        record_segments: false,
        ..EngineConfig::default()
    };

    report(
        "A, exact law",
        &a,
        &EngineConfig {
            max_events_per_agent: 20_000,
            ..lean.clone()
        },
    );
    report(
        "A, floor 1e-12",
        &a,
        &EngineConfig {
            threshold_floor: 1e-12,
            ..lean.clone()
        },
    );
    report("B, exact law", &b, &lean);
}
