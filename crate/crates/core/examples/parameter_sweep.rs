//! Tabulates inter-event statistics over a grid of triggering parameters.

use etcon::cli::{bundled, run_sweep, RunOptions, SweepGrid};

fn main() {
    let file = bundled::bundled("paper_fig3").unwrap();
    let out = std::env::temp_dir().join("etcon-sweep-example");
    let grid = SweepGrid::parse(&["alpha=0.1,1,10", "beta=1,5,10"]).unwrap();
    let opts = RunOptions {
        out_dir: Some(out.clone()),
        ..RunOptions::default()
    };
    let reports = run_sweep(&file, &grid, &opts).unwrap();
    for r in &reports {
        let s = &r.summary;
        let min = s
            .min_inter_event
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        println!(
            "{:<28} events {:>4}  min gap {:.3e}",
            r.out_dir.file_name().unwrap().to_string_lossy(),
            s.total_events,
            min
        );
    }
    println!("table: {}", out.join("sweep.csv").display());
}
