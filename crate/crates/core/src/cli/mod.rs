//! Scenario files, bundled scenarios, random generation, and the run and
//! sweep drivers behind the `etcon` binary.

pub mod artifacts;
pub mod bundled;
mod file;
mod generate;

use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use artifacts::{RunSummary, Termination};
pub use file::{InitialStates, PerAgent, ScenarioFile, Tolerances};
pub use generate::{generate_random, Topology};

use crate::analysis::{
    check_conditions, conservation_residual, lyapunov_series, nonincreasing_violation,
    trigger_excess, verdict, LyapunovSeries,
};
use crate::graph::{classify_connectivity, condense};
use crate::sim::{min_inter_event, run, Scenario, SimulationRecord};
use crate::{Error, Result};

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub horizon: Option<f64>,
    pub stride: Option<f64>,
    pub out_dir: Option<PathBuf>,
    /// Also write `lyapunov_detail.csv` (`μ` and `q_i`).
    pub emit_lyapunov: bool,
}

impl RunOptions {
    fn apply(&self, file: &ScenarioFile) -> ScenarioFile {
        let mut f = file.clone();
        if let Some(h) = self.horizon {
            f.horizon = h;
        }
        if let Some(s) = self.stride {
            f.stride = s;
        }
        f
    }

    fn out_dir(&self, file: &ScenarioFile) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| file.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("runs").join(&file.name))
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub summary: RunSummary,
    pub out_dir: PathBuf,
}

impl RunReport {
    /// 0 on completion, 2 when the event-storm guard stopped the run.
    pub fn exit_code(&self) -> i32 {
        match self.summary.termination {
            Termination::Completed => 0,
            Termination::ZenoSuspected => 2,
        }
    }
}

pub fn scenario_hash(file: &ScenarioFile) -> String {
    hex::encode(Sha256::digest(file.to_toml_string().as_bytes()))
}

/// Runs one scenario file and writes `trajectory.csv`, `events.csv`,
/// `lyapunov.csv` (one or two blocks) and `summary.json` into the output
/// directory.
///
/// An event storm is not an `Err`: artifacts for the partial run are written
/// and the summary says `zeno-suspected`. Input and numeric errors are
/// returned as `Err`.
pub fn run_scenario(file: &ScenarioFile, opts: &RunOptions) -> Result<RunReport> {
    let file = opts.apply(file);
    let scenario = file.to_scenario()?;
    let cfg = file.engine_config();
    cfg.validate()?;
    let out_dir = opts.out_dir(&file);
    std::fs::create_dir_all(&out_dir)?;
    info!("running {} into {}", scenario.name, out_dir.display());

    let (record, zeno) = match run(&scenario, &cfg) {
        Ok(r) => (r, None),
        Err(Error::ZenoSuspected(report)) => {
            warn!(
                "{}: {}",
                scenario.name,
                Error::ZenoSuspected(report.clone())
            );
            let summary = artifacts::ZenoSummary::from(report.as_ref());
            (report.partial, Some(summary))
        }
        Err(e) => return Err(e),
    };
    let summary = summarize(
        &file,
        &scenario,
        &record,
        zeno,
        &out_dir,
        opts.emit_lyapunov,
    )?;
    artifacts::write_trajectory(&out_dir.join("trajectory.csv"), &record)?;
    artifacts::write_events(&out_dir.join("events.csv"), &record)?;
    artifacts::write_summary(&out_dir.join("summary.json"), &summary)?;
    Ok(RunReport { summary, out_dir })
}

fn summarize(
    file: &ScenarioFile,
    scenario: &Scenario,
    record: &SimulationRecord,
    zeno: Option<artifacts::ZenoSummary>,
    out_dir: &Path,
    emit_detail: bool,
) -> Result<RunSummary> {
    let mut notes = Vec::new();
    let connectivity = classify_connectivity(&scenario.graph);
    let dec = match condense(&scenario.graph) {
        Ok(d) => Some(d),
        Err(e) => {
            notes.push(format!("no consensus prediction: {e}"));
            None
        }
    };
    let termination = if zeno.is_some() {
        notes.push(format!(
            "stopped early at t = {} by the event-storm guard",
            record.end_time
        ));
        Termination::ZenoSuspected
    } else {
        Termination::Completed
    };
    let quiet: Vec<usize> = (0..record.n)
        .filter(|&i| record.events[i].len() == 1)
        .map(|i| i + 1)
        .collect();
    if !quiet.is_empty() {
        notes.push(format!(
            "agents {quiet:?} never triggered after t = 0 within the horizon"
        ));
    }

    let mut lyap = None;
    if let Some(dec) = &dec {
        match lyapunov_series(dec, scenario, record) {
            Ok(series) => {
                artifacts::write_lyapunov(&out_dir.join("lyapunov.csv"), &series)?;
                if emit_detail {
                    artifacts::write_lyapunov_detail(
                        &out_dir.join("lyapunov_detail.csv"),
                        &series,
                    )?;
                }
                lyap = Some(lyapunov_summary(&series));
            }
            Err(Error::UnsupportedDepth(m)) => {
                notes.push(format!("Lyapunov series skipped: {m} blocks"))
            }
            Err(e) => return Err(e),
        }
    }

    Ok(RunSummary {
        scenario: scenario.name.clone(),
        scenario_hash: scenario_hash(file),
        termination,
        horizon: scenario.horizon,
        end_time: record.end_time,
        connectivity,
        output: scenario.outputs.tag(),
        event_counts: record.event_counts(),
        total_events: record.total_events(),
        min_inter_event: min_inter_event(record),
        mean_inter_event: mean_inter_event(record),
        last_event: record
            .events
            .iter()
            .map(|e| *e.last().expect("t = 0 event"))
            .collect(),
        quiescent: record.quiescent.clone(),
        conservation_residual: dec
            .as_ref()
            .map(|d| conservation_residual(d, &scenario.x0, record)),
        trigger_excess: trigger_excess(scenario, record),
        conditions: dec
            .as_ref()
            .map(|d| check_conditions(d, &scenario.outputs, &scenario.x0)),
        verdict: dec
            .as_ref()
            .map(|d| verdict(d, &scenario.outputs, &scenario.x0, record, file.epsilon())),
        lyapunov: lyap,
        zeno,
        config: file.engine_config(),
        notes,
    })
}

fn lyapunov_summary(series: &LyapunovSeries) -> artifacts::LyapunovSummary {
    let from = if series.depth == 1 {
        0.0
    } else {
        series.t1.unwrap_or(f64::INFINITY)
    };
    artifacts::LyapunovSummary {
        series: if series.depth == 1 { "W" } else { "Wr" }.into(),
        min_value: series.min_value(),
        max_increase: nonincreasing_violation(&series.times, series.primary(), from),
        t1: series.t1,
        constants: series.constants.clone(),
    }
}

pub fn mean_inter_event(record: &SimulationRecord) -> Vec<Option<f64>> {
    record
        .events
        .iter()
        .map(|ev| (ev.len() >= 2).then(|| (ev[ev.len() - 1] - ev[0]) / (ev.len() - 1) as f64))
        .collect()
}

/// Values for a parameter sweep; `None` keeps the file's setting.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepGrid {
    pub alpha: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
}

impl SweepGrid {
    /// Parses arguments of the form `alpha=1,2,5` and `beta=0.5,1`.
    pub fn parse<S: AsRef<str>>(args: &[S]) -> Result<Self> {
        let mut grid = SweepGrid::default();
        for a in args {
            let a = a.as_ref();
            let (key, list) = a.split_once('=').ok_or_else(|| {
                Error::InvalidScenario(format!("sweep argument `{a}` is not key=v1,v2,..."))
            })?;
            let values = list
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::InvalidScenario(format!("sweep `{a}`: {e}")))?;
            if values.is_empty() {
                return Err(Error::InvalidScenario(format!("sweep `{a}` has no values")));
            }
            match key.trim() {
                "alpha" => grid.alpha = Some(values),
                "beta" => grid.beta = Some(values),
                other => {
                    return Err(Error::InvalidScenario(format!(
                        "cannot sweep `{other}` (alpha | beta)"
                    )))
                }
            }
        }
        Ok(grid)
    }

    fn points(&self, file: &ScenarioFile) -> Vec<(PerAgent, PerAgent)> {
        let alphas: Vec<PerAgent> = match &self.alpha {
            Some(v) => v.iter().map(|&a| PerAgent::Uniform(a)).collect(),
            None => vec![file.alpha.clone()],
        };
        let betas: Vec<PerAgent> = match &self.beta {
            Some(v) => v.iter().map(|&b| PerAgent::Uniform(b)).collect(),
            None => vec![file.beta.clone()],
        };
        alphas
            .iter()
            .flat_map(|a| betas.iter().map(move |b| (a.clone(), b.clone())))
            .collect()
    }
}

fn label(v: &PerAgent) -> String {
    match v {
        PerAgent::Uniform(x) => x.to_string(),
        PerAgent::List(_) => "file".into(),
    }
}

/// Runs every `(α, β)` combination concurrently, each into its own
/// subdirectory, and tabulates event statistics in `sweep.csv`.
pub fn run_sweep(
    file: &ScenarioFile,
    grid: &SweepGrid,
    opts: &RunOptions,
) -> Result<Vec<RunReport>> {
    let base = opts.out_dir(file);
    std::fs::create_dir_all(&base)?;
    let points = grid.points(file);
    let reports: Vec<Result<RunReport>> = points
        .par_iter()
        .map(|(a, b)| {
            let mut f = file.clone();
            f.alpha = a.clone();
            f.beta = b.clone();
            let dir = base.join(format!("alpha_{}_beta_{}", label(a), label(b)));
            let o = RunOptions {
                out_dir: Some(dir),
                ..opts.clone()
            };
            run_scenario(&f, &o)
        })
        .collect();
    let reports: Vec<RunReport> = reports.into_iter().collect::<Result<_>>()?;

    let mut w = csv::Writer::from_path(base.join("sweep.csv"))?;
    w.write_record([
        "alpha",
        "beta",
        "termination",
        "end_time",
        "total_events",
        "min_inter_event",
        "mean_inter_event",
        "terminal_spread",
        "achieved",
    ])?;
    for ((a, b), r) in points.iter().zip(&reports) {
        let s = &r.summary;
        let min = s
            .min_inter_event
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let means: Vec<f64> = s.mean_inter_event.iter().flatten().copied().collect();
        let mean = if means.is_empty() {
            f64::NAN
        } else {
            means.iter().sum::<f64>() / means.len() as f64
        };
        let (spread, achieved) = s
            .verdict
            .as_ref()
            .map_or((String::new(), String::new()), |v| {
                (v.terminal_spread.to_string(), v.achieved.to_string())
            });
        w.write_record([
            label(a),
            label(b),
            format!("{:?}", s.termination).to_lowercase(),
            s.end_time.to_string(),
            s.total_events.to_string(),
            if min.is_finite() {
                min.to_string()
            } else {
                String::new()
            },
            if mean.is_finite() {
                mean.to_string()
            } else {
                String::new()
            },
            spread,
            achieved,
        ])?;
    }
    w.flush()?;
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_arguments() {
        let g = SweepGrid::parse(&["alpha=1,2.5", "beta=0.5"]).unwrap();
        assert_eq!(g.alpha, Some(vec![1.0, 2.5]));
        assert_eq!(g.beta, Some(vec![0.5]));
        assert!(SweepGrid::parse(&["gamma=1"]).is_err());
        assert!(SweepGrid::parse(&["alpha"]).is_err());
        assert!(SweepGrid::parse(&["alpha=1,x"]).is_err());
    }

    #[test]
    fn sweep_points_cross_product() {
        let f = bundled::bundled("example").unwrap();
        let g = SweepGrid::parse(&["alpha=1,2", "beta=0.5,1,2"]).unwrap();
        assert_eq!(g.points(&f).len(), 6);
        let only_beta = SweepGrid::parse(&["beta=3"]).unwrap();
        assert_eq!(
            only_beta.points(&f),
            vec![(f.alpha.clone(), PerAgent::Uniform(3.0))]
        );
    }

    #[test]
    fn hash_changes_with_content() {
        let f = bundled::bundled("paper_fig2").unwrap();
        let mut g = f.clone();
        assert_eq!(scenario_hash(&f), scenario_hash(&g));
        g.horizon = 10.0;
        assert_ne!(scenario_hash(&f), scenario_hash(&g));
    }
}
