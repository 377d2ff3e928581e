//! Lyapunov series on a strongly connected scenario (W) and on the
//! two-block seven-agent scenario (Wr after the detected T1).

use etcon::analysis::nonincreasing_violation;
use etcon::cli::bundled;
use etcon::graph::condense;
use etcon::prelude::*;

fn main() {
    let g = WeightedDigraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 2.0), (2, 0, 1.5), (0, 2, 0.5)])
        .unwrap();
    let s = Scenario::builder(g, OutputFunction::saturation(1, 1.0))
        .initial_states(States::from_scalars(&[2.0, -0.5, 0.4]))
        .uniform_triggering(1.0, 0.5)
        .horizon(15.0)
        .build()
        .unwrap();
    let dec = condense(&s.graph).unwrap();
    let rec = run(&s, &EngineConfig::default()).unwrap();
    let w = lyapunov_series(&dec, &s, &rec).unwrap();
    println!(
        "strong: condition {}, W(0) = {:.4}, W(T) = {:.3e}, max step increase {:.2e}",
        check_conditions(&dec, &s.outputs, &s.x0).sufficient,
        w.w[0],
        w.w[w.w.len() - 1],
        nonincreasing_violation(&w.times, &w.w, 0.0)
    );

    let mut file = bundled::bundled("paper_fig2").unwrap();
    file.tolerances.threshold_floor = Some(1e-12);
    let a = file.to_scenario().unwrap();
    let dec = condense(&a.graph).unwrap();
    let rec = run(&a, &file.engine_config()).unwrap();
    let series = lyapunov_series(&dec, &a, &rec).unwrap();
    let c = series.constants.as_ref().unwrap();
    println!(
        "two blocks: rho(Q1) = {:.4}, K_v = {:.4}, d1 = {:.4?}, d2 = {:.4?}",
        c.rho_q1, c.k_v, c.d1, c.d2
    );
    let t1 = series.t1.unwrap();
    println!(
        "T1 = {t1}, Wr(0) = {:.4}, max Wr increase after T1 {:.2e}, min of all series {:.2e}",
        series.wr[0],
        nonincreasing_violation(&series.times, &series.wr, t1),
        series.min_value()
    );
    for k in (0..series.times.len()).step_by(200) {
        println!(
            "  t = {:>5.2}: V1 {:.3e}  V2 {:.3e}  Wr {:.3e}  mu {:.3e}",
            series.times[k], series.v1[k], series.v2[k], series.wr[k], series.mu[k]
        );
    }
}
