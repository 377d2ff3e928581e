//! Seeded random scenarios of both connectivity classes, run to the horizon.

use etcon::analysis::{conservation_residual, trigger_excess};
use etcon::cli::{generate_random, Topology};
use etcon::graph::condense;
use etcon::prelude::*;

fn main() {
    for topology in [Topology::Strong, Topology::SpanningTree] {
        for seed in 0..5 {
            let file = generate_random(4 + seed as usize, 1, seed, topology).unwrap();
            let s = file.to_scenario().unwrap();
            let dec = condense(&s.graph).unwrap();
            let rec = run(&s, &file.engine_config()).unwrap();
            let v = etcon::analysis::verdict(&dec, &s.outputs, &s.x0, &rec, file.epsilon());
            println!(
                "{:<32} blocks {} {:<16} events {:>5}  achieved {:<5} drift {:.1e} excess {:.1e}",
                file.name,
                dec.depth(),
                file.output,
                rec.total_events(),
                v.achieved,
                conservation_residual(&dec, &s.x0, &rec),
                trigger_excess(&s, &rec)
            );
        }
    }
    println!(
        "\n{}",
        generate_random(3, 2, 1, Topology::SpanningTree)
            .unwrap()
            .to_toml_string()
    );
}
