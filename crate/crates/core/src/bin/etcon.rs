use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use etcon::cli::{
    bundled, generate_random, run_scenario, run_sweep, RunOptions, ScenarioFile, SweepGrid,
    Topology,
};

/// Event-triggered consensus simulator.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with_all = ["bundled", "generate"])]
    scenario: Option<PathBuf>,

    /// Bundled scenario: paper_fig2, paper_fig3 or example.
    #[arg(long, conflicts_with = "generate")]
    bundled: Option<String>,

    /// Override the horizon.
    #[arg(long)]
    horizon: Option<f64>,

    /// Override the dense output stride.
    #[arg(long)]
    stride: Option<f64>,

    /// Output directory (runs) or file (generate).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Sweep triggering parameters, e.g. `--sweep alpha=1,5,10 beta=1,10`.
    #[arg(long, num_args = 1..=2, value_name = "KEY=LIST")]
    sweep: Option<Vec<String>>,

    /// Also write the per-agent q_i and μ series.
    #[arg(long)]
    emit_lyapunov: bool,

    /// Print a random scenario file instead of running: strong or spanning-tree.
    #[arg(long, value_name = "CONNECTIVITY")]
    generate: Option<Topology>,

    /// Agents for --generate.
    #[arg(long, default_value_t = 5)]
    agents: usize,

    /// State dimension for --generate.
    #[arg(long, default_value_t = 1)]
    dim: usize,

    /// Seed for --generate.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match real_main(args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn real_main(args: Args) -> etcon::Result<u8> {
    if let Some(topology) = args.generate {
        let file = generate_random(args.agents, args.dim, args.seed, topology)?;
        match &args.out {
            Some(path) => file.save(path)?,
            None => print!("{}", file.to_toml_string()),
        }
        return Ok(0);
    }

    let file = match (&args.scenario, &args.bundled) {
        (Some(path), _) => ScenarioFile::load(path)?,
        (None, Some(name)) => bundled::bundled(name).ok_or_else(|| {
            etcon::Error::InvalidScenario(format!(
                "no bundled scenario `{name}` (have {:?})",
                bundled::NAMES
            ))
        })?,
        (None, None) => {
            return Err(etcon::Error::InvalidScenario(
                "pass --scenario <path>, --bundled <name> or --generate <connectivity>".into(),
            ))
        }
    };
    let opts = RunOptions {
        horizon: args.horizon,
        stride: args.stride,
        out_dir: args.out.clone(),
        emit_lyapunov: args.emit_lyapunov,
    };

    if let Some(sweep) = &args.sweep {
        let grid = SweepGrid::parse(sweep)?;
        let reports = run_sweep(&file, &grid, &opts)?;
        let worst = reports.iter().map(|r| r.exit_code()).max().unwrap_or(0);
        println!(
            "{} runs written under {}",
            reports.len(),
            reports.first().map_or(String::new(), |r| r
                .out_dir
                .parent()
                .unwrap_or(&r.out_dir)
                .display()
                .to_string())
        );
        return Ok(worst as u8);
    }

    let report = run_scenario(&file, &opts)?;
    let s = &report.summary;
    println!(
        "{}: {:?} at t = {}, {} events",
        s.scenario, s.termination, s.end_time, s.total_events
    );
    if let Some(v) = &s.verdict {
        println!(
            "consensus value {:?}, terminal spread {:.3e}, achieved = {}",
            v.consensus_value, v.terminal_spread, v.achieved
        );
    }
    println!("artifacts in {}", report.out_dir.display());
    Ok(report.exit_code() as u8)
}
